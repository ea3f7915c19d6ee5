#pragma once

#include <stdexcept>
#include <string>

namespace homcl {

/// Base class for every failure this library reports on purpose.
/// Programming errors (bad sizes, null callbacks) use the std exceptions.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A model callback produced a NaN or infinity.
struct NonFiniteOutput : Error {
    using Error::Error;
};

/// A Hessian evaluation was not symmetric within tolerance.
struct AsymmetryDetected : Error {
    AsymmetryDetected(const std::string& what, double defect_)
        : Error(what), defect(defect_) {}
    double defect = 0.0;
};

/// A structural hypothesis check failed; `tag` names the violated check.
struct ValidationFailed : Error {
    ValidationFailed(const std::string& what, std::string tag_)
        : Error(what), tag(std::move(tag_)) {}
    std::string tag;
};

/// The integrated fundamental solution lost the symplectic identity,
/// which signals too few integration steps.
struct SymplecticDriftExceeded : Error {
    SymplecticDriftExceeded(const std::string& what, double defect_)
        : Error(what), defect(defect_) {}
    double defect = 0.0;
};

/// A dense eigenvalue computation did not converge.
struct EigenSolverFailure : Error {
    using Error::Error;
};

/// An asymptotic system has spectrum on the imaginary axis / unit circle;
/// `side` is "+" or "-".
struct NotHyperbolic : Error {
    NotHyperbolic(const std::string& what, std::string side_)
        : Error(what), side(std::move(side_)) {}
    std::string side;
};

/// The banded LU factorization hit an exactly singular pivot.  Callers that
/// scan for singular points treat this as sigma_min == 0.
struct FactorizationFailure : Error {
    using Error::Error;
};

/// A singular value sits inside the rank-decision band; the kernel dimension
/// cannot be trusted on this grid.
struct RankAmbiguous : Error {
    using Error::Error;
};

/// The discretized Schroedinger operator has no negative eigenvalue, so no
/// bifurcation point exists in (-inf, 0) on this grid.
struct NoNegativeEigenvalue : Error {
    NoNegativeEigenvalue(const std::string& what, double lambda_min_)
        : Error(what), lambda_min(lambda_min_) {}
    double lambda_min = 0.0;
};

/// The tail of a discrete solution is numerically zero; no decay rate can be
/// fitted.
struct TailUnderflow : Error {
    using Error::Error;
};

/// Newton iteration failed to reach the requested residual.
struct NoConvergence : Error {
    NoConvergence(const std::string& what, double final_residual_)
        : Error(what), final_residual(final_residual_) {}
    double final_residual = 0.0;
};

/// The (possibly bordered) Newton system could not be solved.
struct SingularJacobian : Error {
    using Error::Error;
};

/// Branch switching requires a one-dimensional kernel.
struct KernelNotSimple : Error {
    KernelNotSimple(const std::string& what, int dimension_)
        : Error(what), dimension(dimension_) {}
    int dimension = 0;
};

/// A regularity criterion was requested for a bundle of the wrong shape
/// (e.g. the autonomous criterion on a genuinely time-dependent bundle).
struct ModeMismatch : Error {
    using Error::Error;
};

/// A kernel basis vector has (numerically) zero norm.
struct DegenerateKernel : Error {
    using Error::Error;
};

/// A run configuration violates an invariant; the message names the field.
struct ConfigInvalid : Error {
    ConfigInvalid(const std::string& what, std::string field_)
        : Error(what), field(std::move(field_)) {}
    std::string field;
};

/// A file could not be written or read; the message carries the path.
struct IoFailure : Error {
    using Error::Error;
};

}  // namespace homcl
