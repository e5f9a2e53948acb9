#include "oblique/forces.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace oblique {

DenseAmbientHamiltonian::DenseAmbientHamiltonian(Matrix h0, std::vector<Matrix> linear_terms)
    : h0_(std::move(h0)), v_(std::move(linear_terms)) {
    for (const auto& v : v_)
        if (v.rows() != h0_.rows() || v.cols() != h0_.cols())
            throw DimensionMismatch("ambient Hamiltonian terms disagree in shape");
}

Matrix DenseAmbientHamiltonian::apply(const Matrix& block, const RealVector& r) const {
    Matrix h = h0_;
    for (size_t i = 0; i < v_.size(); ++i) h += r[static_cast<Eigen::Index>(i)] * v_[i];
    return h * block;
}

Matrix DenseAmbientHamiltonian::apply_param_deriv(int i, const Matrix& block,
                                                  const RealVector&) const {
    return v_[static_cast<size_t>(i)] * block;
}

Grid1DHamiltonian::Grid1DHamiltonian(RealVector grid, double dx, int n_params, Potential v,
                                     PotentialDeriv dv)
    : x_(std::move(grid)), dx_(dx), p_(n_params), v_(std::move(v)), dv_(std::move(dv)) {
    if (dx_ <= 0.0) throw DimensionMismatch("grid step must be positive");
}

Matrix Grid1DHamiltonian::apply(const Matrix& block, const RealVector& r) const {
    const auto m = x_.size();
    if (block.rows() != m) throw DimensionMismatch("grid block shape mismatch");
    Matrix out(m, block.cols());
    const double kin = 0.5 / (dx_ * dx_);
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
        for (Eigen::Index k = 0; k < m; ++k) {
            Complex lap = -2.0 * block(k, c);
            if (k > 0) lap += block(k - 1, c);
            if (k + 1 < m) lap += block(k + 1, c);
            out(k, c) = -kin * lap + v_(x_[k], r) * block(k, c);
        }
    }
    return out;
}

Matrix Grid1DHamiltonian::apply_param_deriv(int i, const Matrix& block,
                                            const RealVector& r) const {
    const auto m = x_.size();
    if (block.rows() != m) throw DimensionMismatch("grid block shape mismatch");
    Matrix out(m, block.cols());
    for (Eigen::Index c = 0; c < block.cols(); ++c)
        for (Eigen::Index k = 0; k < m; ++k) out(k, c) = dv_(i, x_[k], r) * block(k, c);
    return out;
}

std::vector<EigenSolution> solve_generalized_eigen(const SecondRankOp& h,
                                                   const BasisFrame& frame) {
    if (h.rep != Rep::matrix)
        throw RepMismatch("generalized eigensolver expects the matrix representation");
    if (h.entries.rows() != frame.dim() || h.entries.cols() != frame.dim())
        throw DimensionMismatch("Hamiltonian shape does not match frame");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(hermitize(h.entries), frame.metric());
    if (es.info() != Eigen::Success) throw SingularFrame("generalized eigensolve failed");
    std::vector<EigenSolution> out(static_cast<size_t>(frame.dim()));
    for (int k = 0; k < frame.dim(); ++k) {
        out[static_cast<size_t>(k)].energy = es.eigenvalues()(k);
        out[static_cast<size_t>(k)].ket = StateKet{es.eigenvectors().col(k)};
    }
    return out;
}

namespace {

struct ForceWorkspace {
    BasisFrame frame;
    FrameDerivatives derivs;
    std::vector<Matrix> dual_derivs;
    ChristoffelSet chris;
    Matrix h_mat;              // H_{mu nu}
    Matrix h_nat;              // H^mu_nu
    Matrix he;                 // H |e_nu> in ambient coordinates
    Matrix hf;                 // H |e^nu>
    std::vector<Matrix> dh_e;  // (d_i H) |e_nu>

    ForceWorkspace(BasisFrame fr, FrameDerivatives dv)
        : frame(std::move(fr)), derivs(std::move(dv)), chris(christoffel(frame, derivs)) {}
};

ForceWorkspace make_workspace(const BasisFamily& family, const RealVector& r,
                              const AmbientHamiltonian& hamiltonian,
                              const DerivScheme& scheme) {
    if (hamiltonian.ambient_dim() != family.ambient_dim())
        throw AmbientUnavailable("ambient Hamiltonian does not act on this family's ambient");
    if (hamiltonian.n_params() != family.n_params())
        throw DimensionMismatch("ambient Hamiltonian parameter count mismatch");

    ForceWorkspace w(evaluate_frame(family, r), frame_derivatives(family, r, scheme));
    w.dual_derivs = dual_frame_derivs(w.frame, w.derivs);
    const Matrix& e = w.frame.vectors();
    const Matrix f = w.frame.duals();
    w.he = hamiltonian.apply(e, r);
    w.hf = hamiltonian.apply(f, r);
    w.h_mat = hermitize(e.adjoint() * w.he);
    w.h_nat = w.frame.inv_metric() * w.h_mat;
    w.dh_e.resize(static_cast<size_t>(family.n_params()));
    for (int i = 0; i < family.n_params(); ++i)
        w.dh_e[static_cast<size_t>(i)] = hamiltonian.apply_param_deriv(i, e, r);
    return w;
}

void check_isolated(const ForceWorkspace& w, double energy) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(w.h_mat, w.frame.metric());
    int nearest = 0;
    double best = std::abs(es.eigenvalues()(0) - energy);
    for (int k = 1; k < es.eigenvalues().size(); ++k) {
        const double d = std::abs(es.eigenvalues()(k) - energy);
        if (d < best) {
            best = d;
            nearest = k;
        }
    }
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        if (k != nearest)
            gap = std::min(gap, std::abs(es.eigenvalues()(k) - es.eigenvalues()(nearest)));
    if (gap < kDegeneracyGapTol)
        throw DegenerateState("Hellmann-Feynman derivative of a degenerate level");
}

}  // namespace

RealVector hf_derivative(const EigenSolution& sol, const BasisFamily& family,
                         const RealVector& r, const AmbientHamiltonian& hamiltonian,
                         HfFormula formula, const DerivScheme& scheme) {
    const ForceWorkspace w = make_workspace(family, r, hamiltonian, scheme);
    check_isolated(w, sol.energy);

    const Vector& psi = sol.ket.comps;
    const Vector bra = lower_bra(sol.ket, w.frame).comps;  // psi_mu
    const int p = family.n_params();
    RealVector grad(p);

    for (int i = 0; i < p; ++i) {
        const Matrix& de = w.derivs.d_vectors[static_cast<size_t>(i)];
        const Matrix& df = w.dual_derivs[static_cast<size_t>(i)];
        const Matrix& dhe = w.dh_e[static_cast<size_t>(i)];
        const Matrix& e = w.frame.vectors();
        const Matrix f = w.frame.duals();

        switch (formula) {
            case HfFormula::natural_covariant: {
                // d_i H^mu_nu assembled from the three ambient derivative terms
                const Matrix dh_nat = f.adjoint() * dhe + df.adjoint() * w.he +
                                      w.hf.adjoint() * de;
                const Matrix d = w.chris.ud_right(i);
                const Matrix cov = dh_nat + d * w.h_nat - w.h_nat * d;
                grad[i] = (bra.transpose() * cov * psi)(0, 0).real();
                break;
            }
            case HfFormula::matrix_raw: {
                const Matrix dh_mat =
                    de.adjoint() * w.he + e.adjoint() * dhe + w.he.adjoint() * de;
                const Matrix ds = w.chris.dd_mid(i) + w.chris.dd_right(i);
                const Matrix bracket = dh_mat - sol.energy * ds;
                grad[i] = (psi.adjoint() * bracket * psi)(0, 0).real();
                break;
            }
            case HfFormula::matrix_covariant: {
                const Matrix dh_mat =
                    de.adjoint() * w.he + e.adjoint() * dhe + w.he.adjoint() * de;
                const Matrix cov =
                    dh_mat + w.chris.du_right(i) * w.h_mat + w.h_mat * w.chris.ud_mid(i);
                grad[i] = (psi.adjoint() * cov * psi)(0, 0).real();
                break;
            }
        }
    }
    return grad;
}

PulayDecomposition pulay_decomposition(const EigenSolution& sol, const BasisFamily& family,
                                       const RealVector& r,
                                       const AmbientHamiltonian& hamiltonian,
                                       const DerivScheme& scheme) {
    const ForceWorkspace w = make_workspace(family, r, hamiltonian, scheme);
    check_isolated(w, sol.energy);

    const Vector& psi = sol.ket.comps;
    const Vector bra = lower_bra(sol.ket, w.frame).comps;
    const int p = family.n_params();
    const Matrix& e = w.frame.vectors();
    const Matrix f = w.frame.duals();

    auto q_project = [&](const Matrix& block) {
        return Matrix(block - e * (w.frame.inv_metric() * (e.adjoint() * block)));
    };
    const Matrix q_he = q_project(w.he);

    PulayDecomposition out;
    out.hellmann.resize(p);
    out.in_space.resize(p);
    out.out_of_space.resize(p);
    for (int i = 0; i < p; ++i) {
        const Matrix& de = w.derivs.d_vectors[static_cast<size_t>(i)];
        const Matrix& df = w.dual_derivs[static_cast<size_t>(i)];
        const Matrix& dhe = w.dh_e[static_cast<size_t>(i)];

        const Matrix hell = f.adjoint() * dhe;
        const Matrix in_sp = w.chris.ud_mid(i) * w.h_nat + w.h_nat * w.chris.ud_right(i);
        const Matrix out_sp = df.adjoint() * q_he + w.hf.adjoint() * q_project(de);

        out.hellmann[i] = (bra.transpose() * hell * psi)(0, 0).real();
        out.in_space[i] = (bra.transpose() * in_sp * psi)(0, 0).real();
        out.out_of_space[i] = (bra.transpose() * out_sp * psi)(0, 0).real();
    }
    return out;
}

}  // namespace oblique
