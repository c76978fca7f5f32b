#pragma once

// Central numeric tolerances.  Everything that compares floating-point
// quantities anywhere in the library goes through one of these constants.

namespace dpopt {

inline constexpr double kSumTol  = 1e-9;   // distribution / row mass must be 1 within this
inline constexpr double kDistTol = 1e-9;   // total-variation threshold for "same distribution"
inline constexpr double kDpSlack = 1e-9;   // relative slack when checking privacy ratios
inline constexpr double kQuadTol = 1e-8;   // absolute target error for adaptive quadrature
inline constexpr double kFeasTol = 1e-7;   // LP feasibility / dual certificate slack
inline constexpr double kRankTol = 1e-8;   // relative singular-value cutoff for rank decisions

}  // namespace dpopt
