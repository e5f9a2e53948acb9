#ifndef OBLIQUE_FORCES_HPP
#define OBLIQUE_FORCES_HPP

#include <functional>
#include <memory>
#include <vector>

#include "oblique/basis.hpp"
#include "oblique/connection.hpp"
#include "oblique/tensor_core.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Parameter derivatives of the energy: generalized eigensolutions,
// Hellmann-Feynman in both representations, and the Pulay split into
// in-space and out-of-space contributions.
// ===========================================================================

inline constexpr double kDegeneracyGapTol = 1e-8;

/// An operator on the ambient space with explicit parameter dependence.
/// `apply` maps an M x k block to H * block at the point R; apply_param_deriv
/// applies (d_i H) instead.
class AmbientHamiltonian {
public:
    virtual ~AmbientHamiltonian() = default;
    virtual int ambient_dim() const = 0;
    virtual int n_params() const = 0;
    virtual Matrix apply(const Matrix& block, const RealVector& r) const = 0;
    virtual Matrix apply_param_deriv(int i, const Matrix& block, const RealVector& r) const = 0;
};

/// Dense ambient operator H0 + sum_i R^i V_i (all Hermitian), so that
/// d_i H = V_i exactly.
class DenseAmbientHamiltonian : public AmbientHamiltonian {
public:
    DenseAmbientHamiltonian(Matrix h0, std::vector<Matrix> linear_terms);

    int ambient_dim() const override { return static_cast<int>(h0_.rows()); }
    int n_params() const override { return static_cast<int>(v_.size()); }
    Matrix apply(const Matrix& block, const RealVector& r) const override;
    Matrix apply_param_deriv(int i, const Matrix& block, const RealVector& r) const override;

private:
    Matrix h0_;
    std::vector<Matrix> v_;
};

/// One-body grid operator, kinetic by central differences plus a local
/// potential with explicit parameter dependence:
///   (H psi)_k = -(psi_{k+1} - 2 psi_k + psi_{k-1}) / (2 dx^2) + V(x_k; R) psi_k
class Grid1DHamiltonian : public AmbientHamiltonian {
public:
    using Potential = std::function<double(double x, const RealVector& r)>;
    using PotentialDeriv = std::function<double(int i, double x, const RealVector& r)>;

    Grid1DHamiltonian(RealVector grid, double dx, int n_params, Potential v, PotentialDeriv dv);

    int ambient_dim() const override { return static_cast<int>(x_.size()); }
    int n_params() const override { return p_; }
    Matrix apply(const Matrix& block, const RealVector& r) const override;
    Matrix apply_param_deriv(int i, const Matrix& block, const RealVector& r) const override;

private:
    RealVector x_;
    double dx_;
    int p_;
    Potential v_;
    PotentialDeriv dv_;
};

struct EigenSolution {
    double energy = 0.0;
    StateKet ket;  // normalized so psi^mu* S_mu_nu psi^nu = 1
};

/// Full spectrum of H_{mu nu} psi^nu = E S_{mu nu} psi^nu, ascending, with
/// metric-orthonormal eigenvectors. H must be in the matrix representation.
std::vector<EigenSolution> solve_generalized_eigen(const SecondRankOp& h,
                                                   const BasisFrame& frame);

enum class HfFormula {
    natural_covariant,  // psi_mu (dh_i H^mu_nu) psi^nu
    matrix_raw,         // psi^mu* [d_i H_mu_nu - E (D_{mu i nu} + D_{mu nu i})] psi^nu
    matrix_covariant    // psi^mu* (dh_i H_mu_nu) psi^nu
};

/// d_i E for an isolated eigenstate. Throws DegenerateState when the
/// eigenvalue gap at R is below kDegeneracyGapTol.
RealVector hf_derivative(const EigenSolution& sol, const BasisFamily& family,
                         const RealVector& r, const AmbientHamiltonian& hamiltonian,
                         HfFormula formula,
                         const DerivScheme& scheme = DerivScheme::analytic());

struct PulayDecomposition {
    RealVector hellmann;      // psi_mu <e^mu| d_i H |e_nu> psi^nu
    RealVector in_space;      // connection part of the Pulay terms
    RealVector out_of_space;  // Q_Omega part of the Pulay terms
    RealVector total() const { return hellmann + in_space + out_of_space; }
};

/// Split of d_i E into the explicit-Hamiltonian term and the Pulay terms,
/// the latter separated by the complement projector Q_Omega.
PulayDecomposition pulay_decomposition(const EigenSolution& sol, const BasisFamily& family,
                                       const RealVector& r,
                                       const AmbientHamiltonian& hamiltonian,
                                       const DerivScheme& scheme = DerivScheme::analytic());

}  // namespace oblique

#endif
