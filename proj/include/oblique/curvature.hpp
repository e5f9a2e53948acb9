#ifndef OBLIQUE_CURVATURE_HPP
#define OBLIQUE_CURVATURE_HPP

#include <vector>

#include "oblique/basis.hpp"
#include "oblique/connection.hpp"
#include "oblique/parallel.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Riemann curvature of the moving frame bundle and its Berry forms.
//
//   R^mu_{i nu j} = d_i D^mu_{nu j} - d_j D^mu_{nu i}
//                   + D^mu_{lam i} D^lam_{nu j} - D^mu_{lam j} D^lam_{nu i}
//
// The quantum-index trace R^mu_{i mu j} is the Ricci form, which for a
// single-state frame reduces to the Berry curvature. Conventions exposed
// here: ricci_* return the raw trace R_ij; the physicist-normalized Berry
// curvature is i * R_ij; the Chern number is (1/2 pi i) * sum R_{theta phi}.
// ===========================================================================

struct CurvatureTensor {
    // blocks(i, j) is the N x N matrix R^mu_{i nu j}
    std::vector<Matrix> blocks;
    int n_params = 0;
    int dim = 0;
    RealVector point;

    const Matrix& block(int i, int j) const {
        return blocks[static_cast<size_t>(i * n_params + j)];
    }
    /// max_ij || R(i,j) + R(j,i) ||_inf
    double antisymmetry_defect() const;
};

/// Assemble the curvature tensor at R. The analytic scheme requires analytic
/// first and second frame derivatives; the FD scheme differentiates the
/// Christoffel field with central steps of scheme.h. Throws
/// InsufficientParameters when the family has P < 2.
CurvatureTensor riemann(const BasisFamily& family, const RealVector& r,
                        const DerivScheme& scheme);

/// Residual of the commutator definition against the assembled tensor:
///   max_ij | R^mu_{i nu j} psi^nu - (dh_i dh_j - dh_j dh_i) psi^mu |
/// with the nested covariant derivatives evaluated on a central stencil of
/// frames at step h and constant psi components. The reference tensor uses
/// analytic derivatives when available, otherwise a refined FD step.
double commutator_check(const BasisFamily& family, const RealVector& r, const StateKet& psi,
                        double h = 1e-3);

/// Berry connection trace, A_j = i D^mu_{mu j}, one entry per parameter.
std::vector<Complex> berry_connection_trace(const ChristoffelSet& chris);

enum class RicciForm {
    orthonormal,   // 2i Im <d_i e_mu | d_j e_mu>, valid for invariably orthonormal frames
    nonorthogonal  // <d_i e^mu | d_j e_mu> - <d_j e^mu | d_i e_mu>, the general trace
};

/// Ricci (Berry) form R_ij as a P x P antisymmetric complex matrix.
Matrix ricci_berry(const BasisFamily& family, const RealVector& r, const DerivScheme& scheme,
                   RicciForm form);

/// The non-orthogonal expansion of the same trace,
///   2i Im{ S^{mu nu} <d_i e_nu | d_j e_mu> }
///   + (d_i S^{mu nu}) D_{nu mu j} - (d_j S^{mu nu}) D_{nu mu i},
/// numerically independent of the direct route above.
Matrix ricci_berry_expanded(const BasisFamily& family, const RealVector& r,
                            const DerivScheme& scheme);

/// Quantum-index trace of an assembled curvature tensor.
Matrix ricci_from_riemann(const CurvatureTensor& curv);

/// max_{i<j} | tr(D_i D_j - D_j D_i) | over natural-rep Christoffel blocks.
double trace_cancellation_defect(const ChristoffelSet& chris);

/// (1/2 pi i) * midpoint quadrature of R_{theta phi} over the sphere for a
/// P = 2 family parameterized by (theta, phi); poles are excluded by the
/// half-cell offset of the midpoint grid.
double chern_number(const BasisFamily& family, int n_theta, int n_phi,
                    const DerivScheme& scheme = DerivScheme::analytic(),
                    par::Execution ex = par::Execution::serial);

}  // namespace oblique

#endif
