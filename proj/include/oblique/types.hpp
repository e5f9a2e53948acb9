#ifndef OBLIQUE_TYPES_HPP
#define OBLIQUE_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace oblique {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Coefficients of a vector in the fixed orthonormal ambient basis of H.
using AmbientVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode named by a module contract gets its own
// type so callers (and tests) can discriminate.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct SingularFrame : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct SingularOperator : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};
struct InsufficientParameters : Error {
    using Error::Error;
};
struct RepMismatch : Error {
    using Error::Error;
};
struct DegenerateState : Error {
    using Error::Error;
};
struct AmbientUnavailable : Error {
    using Error::Error;
};
struct ConfigParseError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

struct ScNotConverged : Error {
    int iterations;
    double residual;
    ScNotConverged(const std::string& msg, int iters, double resid)
        : Error(msg), iterations(iters), residual(resid) {}
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules.
// ---------------------------------------------------------------------------

inline double inf_norm(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double inf_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Residual of `diff` relative to the scale of the objects involved,
/// with +1 so that identically-zero tensors still give a finite ratio.
inline double rel_residual(double diff, double scale) { return diff / (scale + 1.0); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Force exact Hermiticity on a matrix that is Hermitian up to roundoff.
inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace oblique

#endif
