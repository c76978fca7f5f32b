#pragma once

#include <stdexcept>
#include <string>

namespace dpopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonStochasticRow : Error { using Error::Error; };
struct NegativeEntry : Error { using Error::Error; };
struct SupportMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidN : Error { using Error::Error; };
struct InvalidEpsilon : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct EmptyGuessSet : Error { using Error::Error; };
struct EvaluationFailure : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct InvalidWitness : Error { using Error::Error; };
struct LinearDependence : Error { using Error::Error; };
struct SamplerStall : Error { using Error::Error; };

// A numerical claim the experiment drivers promise to uphold was violated;
// the CLI maps this family to its own exit code.
struct AssertionViolation : Error { using Error::Error; };
struct ChainViolation : AssertionViolation { using AssertionViolation::AssertionViolation; };

// Carries the error estimate actually achieved when quadrature gives up.
struct QuadratureNonconvergence : Error {
    double achieved;
    QuadratureNonconvergence(const std::string& what, double achieved_error)
        : Error(what + " (achieved error " + std::to_string(achieved_error) + ")"),
          achieved(achieved_error) {}
};

}  // namespace dpopt
