#ifndef OBLIQUE_CONNECTION_HPP
#define OBLIQUE_CONNECTION_HPP

#include <vector>

#include "oblique/basis.hpp"
#include "oblique/tensor_core.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// The affine connection of a parameter-dependent frame.
//
// One variant is stored, D_{mu nu i} = <e_mu | d_i e_nu>, together with the
// metric derivative assembled from the same frame derivatives. The remaining
// seven index placements are derived on demand through the metric and the
// sign/shift rules; naming below encodes the index pattern:
//   first letter  = placement of mu (d = down, u = up)
//   second letter = placement of nu
//   _right / _mid = position of the Latin (derivative) index
// e.g. ud_right(i) is D^mu_{nu i}, du_mid(i) is D_{mu i}^nu.
// ===========================================================================

class ChristoffelSet {
public:
    ChristoffelSet(BasisFrame frame, std::vector<Matrix> d_lower, std::vector<Matrix> d_metric);

    int dim() const { return frame_.dim(); }
    int n_params() const { return static_cast<int>(d_lower_.size()); }
    const BasisFrame& frame() const { return frame_; }

    const Matrix& dd_right(int i) const { return d_lower_[static_cast<size_t>(i)]; }  // D_{mu nu i}
    Matrix dd_mid(int i) const;   // D_{mu i nu}
    Matrix ud_right(int i) const; // D^mu_{nu i}
    Matrix ud_mid(int i) const;   // D^mu_{i nu}
    Matrix du_right(int i) const; // D_mu^nu_i
    Matrix du_mid(int i) const;   // D_{mu i}^nu
    Matrix uu_right(int i) const; // D^{mu nu}_i
    Matrix uu_mid(int i) const;   // D^mu_i^nu

    const Matrix& d_metric_lower(int i) const { return d_metric_[static_cast<size_t>(i)]; }
    Matrix d_metric_upper(int i) const;  // d_i S^{mu nu} = -S^{-1} (d_i S) S^{-1}

    double max_norm() const;  // max_i ||D_{.. i}||_inf, the residual scale
private:
    BasisFrame frame_;
    std::vector<Matrix> d_lower_;
    std::vector<Matrix> d_metric_;
};

/// D_{mu nu i} = <e_mu | d_i e_nu> from ambient inner products.
ChristoffelSet christoffel(const BasisFrame& frame, const FrameDerivatives& derivs);

/// Ambient derivatives of the dual kets, d_i |e^mu>, by the product rule
/// through d_i S^{mu nu} (no finite differences on duals).
std::vector<Matrix> dual_frame_derivs(const BasisFrame& frame, const FrameDerivatives& derivs);

/// Covariant derivative of contravariant components:
///   (dh_i psi)^mu = d_i psi^mu + D^mu_{nu i} psi^nu
/// `dpsi` holds d_i psi^mu as column i.
Matrix covariant_derivative_ket(const Matrix& dpsi, const StateKet& psi,
                                const ChristoffelSet& chris);

/// Covariant derivative of covariant components:
///   (dh_i psi)_mu = d_i psi_mu - psi_nu D^nu_{mu i}
Matrix covariant_derivative_bra(const Matrix& dpsi_bar, const StateBra& psi_bar,
                                const ChristoffelSet& chris);

/// Covariant derivative of a second-rank operator in the representation given
/// by `rep` (must match the operator's tag):
///   natural: dh_i H^mu_nu = d_i H^mu_nu + [D, H]^mu_{nu i}
///   matrix:  dh_i H_mu_nu = d_i H_mu_nu + D_mu^sig_i H_sig_nu + H_mu_sig D^sig_{i nu}
std::vector<Matrix> covariant_derivative_operator(const std::vector<Matrix>& dh,
                                                  const SecondRankOp& h,
                                                  const ChristoffelSet& chris, Rep rep);

/// First-order parallel transport: psi^mu - D^mu_{nu i} psi^nu dR^i.
StateKet parallel_transport_step(const StateKet& psi, const ChristoffelSet& chris,
                                 const RealVector& dr);

/// Anti-Hermitian (rotation) and Hermitian (deformation) parts of D_{mu nu i}.
struct RotationDeformation {
    std::vector<Matrix> rotation;     // (D - D^dag)/2 per parameter
    std::vector<Matrix> deformation;  // (D + D^dag)/2 per parameter
};
RotationDeformation rotation_deformation_split(const ChristoffelSet& chris);

/// Max relative residuals of the connection identity families, each side
/// assembled from independently computed ambient inner products (frame,
/// frame derivatives, duals, dual derivatives). Residuals are relative to
/// ||D||_inf + 1.
struct ConnectionReport {
    double shifting = 0.0;
    double conjugation = 0.0;
    double raising_lowering = 0.0;
    double derived_right = 0.0;
    double derived_left = 0.0;
    double derived_final = 0.0;
    double metric_constancy = 0.0;

    double worst() const;
};

ConnectionReport verify_connection_identities(const ChristoffelSet& chris,
                                              const BasisFrame& frame,
                                              const FrameDerivatives& derivs);

}  // namespace oblique

#endif
