#ifndef OBLIQUE_PROPAGATORS_HPP
#define OBLIQUE_PROPAGATORS_HPP

#include <functional>
#include <memory>
#include <vector>

#include "oblique/basis.hpp"
#include "oblique/connection.hpp"
#include "oblique/tensor_core.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Finite-difference time integration of the tensorial Schroedinger and
// Liouville-von Neumann equations in an evolving frame.
//
// All moving-basis steps factor through the same Crank-Nicholson core
//   CN(t) = [S + i dt/2 H]^{-1} [S - i dt/2 H]   (matrix representation)
// and differ in how the result is carried into the frame at t + dt:
//   cn_fixed         frozen frame, CN only
//   cn_moving_naive  H -> H - i D_t in both brackets, everything at t
//   cn_moving_gauge  S^{-1}(t+dt) A(t+dt : t) CN(t)
//   cn_moving_sc     [S + i dt/2 H]^{-1}(t+dt) A(t+dt : t) {1 - i dt/2 S^{-1} H}(t)
//   lowdin           S^{-1/2}(t+dt) S^{1/2}(t) CN(t)
//   cn_unitary_*     gauge / sc step followed by state re-orthonormalization
// ===========================================================================

enum class PropagatorTag {
    cn_fixed,
    cn_moving_naive,
    cn_moving_gauge,
    cn_moving_sc,
    lowdin,
    cn_unitary_gauge,
    cn_unitary_sc
};

PropagatorTag propagator_tag_from_name(const std::string& name);
std::string propagator_tag_name(PropagatorTag tag);

struct PropagatorKind {
    PropagatorTag tag = PropagatorTag::cn_fixed;
    double dt = 0.01;
    double sc_tol = 1e-12;
    int sc_max_iter = 25;
    // Re-orthonormalization cadence for the unitary variants: apply the
    // S^{-1/2} correction every `ortho_interval` steps, or as soon as the
    // orthonormality deviation exceeds `ortho_tol`.
    int ortho_interval = 1;
    double ortho_tol = 1e-8;

    void validate() const;  // dt nonzero and finite, tolerances positive
};

/// Parameter path R(t) with analytic velocity; identity for one-parameter
/// families whose parameter is time itself.
struct ParameterPath {
    std::function<RealVector(double)> point;
    std::function<RealVector(double)> velocity;

    static ParameterPath identity();
};

using HamiltonianFn = std::function<Matrix(double t, const BasisFrame& frame)>;

/// Matrix-rep Hamiltonian suppliers.
HamiltonianFn zero_hamiltonian();
HamiltonianFn constant_matrix_hamiltonian(Matrix h_matrix_rep);
/// H_{mu nu}(t) = <e_mu(t)|H0|e_nu(t)> for a fixed dense ambient operator.
HamiltonianFn projected_ambient_hamiltonian(Matrix h0_ambient);

/// A basis family driven along a time path plus an explicitly time-dependent
/// Hamiltonian supplier (a pure function of time and frame).
class TimeModel {
public:
    TimeModel(std::shared_ptr<const BasisFamily> family, HamiltonianFn hamiltonian,
              ParameterPath path = ParameterPath::identity(),
              DerivScheme scheme = DerivScheme::analytic());

    const BasisFamily& family() const { return *family_; }
    const DerivScheme& scheme() const { return scheme_; }

    RealVector point_at(double t) const;
    BasisFrame frame_at(double t) const;
    Matrix hamiltonian_matrix(double t, const BasisFrame& frame) const;
    /// Temporal Christoffel symbol D_{mu nu t} = v^i D_{mu nu i}.
    Matrix d_lower_time(double t, const BasisFrame& frame) const;
    ChristoffelSet christoffel_at(double t) const;

private:
    std::shared_ptr<const BasisFamily> family_;
    HamiltonianFn hamiltonian_;
    ParameterPath path_;
    DerivScheme scheme_;
};

struct StateBundle {
    Matrix kets;  // N x n_states, columns are psi^mu_n
    double time = 0.0;
    BasisFrame frame;

    int n_states() const { return static_cast<int>(kets.cols()); }
    /// State overlap matrix script-S_{nm} = psi_{mu n} psi^mu_m.
    Matrix state_overlap() const;
    double orthonormality_deviation() const;  // || script-S - 1 ||_inf
};

StateBundle make_bundle(const TimeModel& model, double t0, Matrix kets);

/// One step of the chosen integrator; step index (for the unitary cadence)
/// defaults to forcing the correction.
StateBundle step(const PropagatorKind& kind, const StateBundle& bundle, const TimeModel& model,
                 int step_index = 0);

/// The Loewdin-implied connection G^mu_{nu t} = -d_t S^{-1/2} . S^{1/2},
/// with the S^{-1/2} derivative taken by central differences at dt_fd.
Matrix g_tensor(const TimeModel& model, double t, double dt_fd = 1e-4);
Matrix g_tensor(const BasisFamily& family, double t, double dt_fd = 1e-4);

struct DGReport {
    Matrix d_natural;             // D^mu_{nu t}
    Matrix g_natural;             // G^mu_{nu t}
    double max_diff = 0.0;        // max |D - G|
    double rotation_norm = 0.0;   // Frobenius norm of the anti-Hermitian part of S (D - G)
    double deformation_norm = 0.0;  // Frobenius norm of the Hermitian part
};

/// Loewdin-propagator fidelity criterion: how far G falls from D at time t.
DGReport compare_D_vs_G(const BasisFamily& family, double t, double dt_fd = 1e-4);

enum class DensityRep { natural, upper_upper };

struct DensityTensor {
    Matrix rho;
    DensityRep rep = DensityRep::natural;
};

/// One integrator step of the Liouville-von Neumann equation: the coefficient
/// propagator W of `kind` acts by similarity (natural rep, rho -> W rho W^-1)
/// or congruence (upper-upper rep, rho -> W rho W^dag).
DensityTensor liouville_step(const DensityTensor& rho, const PropagatorKind& kind,
                             const TimeModel& model, double t);

struct ObservableRow {
    int step = 0;
    double time = 0.0;
    std::vector<double> norms;     // psi_mu psi^mu per state
    std::vector<double> energies;  // psi_mu H^mu_nu psi^nu per state
    double ortho_dev = 0.0;        // || script-S - 1 ||_inf
    std::vector<Complex> berry;    // i D^mu_{mu i} per family parameter
};

struct ObservableLog {
    std::vector<ObservableRow> rows;
    int n_states = 0;
    int n_params = 0;
    double dt = 0.0;
    std::string kind;
};

ObservableLog run_trajectory(const PropagatorKind& kind, const StateBundle& start,
                             const TimeModel& model, int n_steps);

}  // namespace oblique

#endif
