#ifndef OBLIQUE_TENSOR_CORE_HPP
#define OBLIQUE_TENSOR_CORE_HPP

#include <utility>
#include <vector>

#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Oblique-axes tensor algebra: metric, duals, index motion, representation
// conversion, Hermitian matrix functions, second-rank inversion.
//
// Conventions (N basis kets |e_mu> living in an M-dim orthonormal ambient):
//   S_mu_nu   = <e_mu|e_nu>          lower metric (overlap)
//   S^mu^nu   = <e^mu|e^nu>          upper metric = matrix inverse of S
//   |e^nu>    = |e_mu> S^mu^nu       dual frame
//   psi^mu    = <e^mu|psi>           contravariant ket components
//   psi_mu    = <psi|e_mu>           covariant bra components
//   H^mu_nu   = <e^mu|H|e_nu>        natural representation
//   H_mu_nu   = <e_mu|H|e_nu>        matrix representation,  H^._. = S^{-1} H_..
// ===========================================================================

/// Guard against inverting a numerically dependent frame: smallest metric
/// eigenvalue must exceed this fraction of the largest.
inline constexpr double kLinIndepThreshold = 1e-8;

/// Below this absolute eigenvalue the Hermitian square-root pair is refused.
inline constexpr double kSqrtEigFloor = 1e-12;

class BasisFrame {
public:
    /// Columns of `vectors` are the basis kets in ambient coordinates.
    BasisFrame(Matrix vectors, RealVector param);
    BasisFrame() = default;

    int ambient_dim() const { return static_cast<int>(vectors_.rows()); }
    int dim() const { return static_cast<int>(vectors_.cols()); }
    int n_params() const { return static_cast<int>(param_.size()); }

    const Matrix& vectors() const { return vectors_; }
    const Matrix& metric() const { return metric_; }
    const Matrix& inv_metric() const { return inv_metric_; }
    const RealVector& param() const { return param_; }

    /// Dual kets |e^mu> as ambient columns:  E * S^{-1}.
    Matrix duals() const { return vectors_ * inv_metric_; }

    /// Ambient projector onto the spanned space, P = E S^{-1} E^dag.
    Matrix projector() const { return vectors_ * inv_metric_ * vectors_.adjoint(); }

    double smallest_metric_eigenvalue() const { return eig_min_; }

private:
    Matrix vectors_;     // M x N
    Matrix metric_;      // S_mu_nu
    Matrix inv_metric_;  // S^mu^nu
    RealVector param_;
    double eig_min_ = 0.0;
};

struct StateKet {
    Vector comps;  // psi^mu
};

struct StateBra {
    Vector comps;  // psi_mu
};

enum class Rep { natural, matrix };

/// Second-rank operator tensor with its representation tag
/// (natural H^mu_nu or matrix H_mu_nu).
struct SecondRankOp {
    Matrix entries;
    Rep rep = Rep::natural;
};

inline SecondRankOp natural_op(Matrix m) { return {std::move(m), Rep::natural}; }
inline SecondRankOp matrix_op(Matrix m) { return {std::move(m), Rep::matrix}; }

/// Gram-matrix frame construction. Throws SingularFrame when the smallest
/// metric eigenvalue falls at or below kLinIndepThreshold * largest, and
/// DimensionMismatch on ragged input.
BasisFrame build_frame(const std::vector<AmbientVector>& vectors, const RealVector& param);
BasisFrame build_frame(const Matrix& vectors, const RealVector& param);

/// psi_mu = psi^nu* S_nu_mu
StateBra lower_bra(const StateKet& ket, const BasisFrame& frame);
/// psi^mu = S^mu^nu psi_nu*
StateKet raise_ket(const StateBra& bra, const BasisFrame& frame);

/// Convert between natural and matrix representations through the metric.
SecondRankOp convert_rep(const SecondRankOp& op, const BasisFrame& frame, Rep target);

/// Hermiticity test in the operator's own representation:
/// matrix rep  H_mu_nu = H_nu_mu*;  natural rep  H^mu_nu = (S H S^{-1})^*_nu_mu.
double hermiticity_defect(const SecondRankOp& op, const BasisFrame& frame);

/// (S^{1/2}, S^{-1/2}) of a Hermitian positive-definite matrix.
/// Throws NotPositiveDefinite when any eigenvalue <= kSqrtEigFloor.
std::pair<Matrix, Matrix> herm_sqrt_pair(const Matrix& s);

/// Inverse second-rank tensor in the given representation:
/// matrix rep    A_nu_sigma B^sigma^mu = delta
/// natural rep   A^mu_sigma B^sigma_nu = delta
SecondRankOp invert_second_rank(const SecondRankOp& op);

}  // namespace oblique

#endif
