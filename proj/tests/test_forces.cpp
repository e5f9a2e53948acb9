#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oblique/forces.hpp"
#include "oblique/scenario.hpp"
#include "support.hpp"

using namespace oblique;
using namespace oblique::testing;

namespace {

RealVector pt1(double t) {
    RealVector r(1);
    r[0] = t;
    return r;
}

/// Two Gaussians whose separation is the single parameter: orbital 1 at
/// -R/2 - 1, orbital 2 at +R/2 + 1. With n_orbitals > 2, narrower companions
/// ride along at the same centers (a split basis), enriching the frame.
GaussianChain separation_chain(int n_orbitals = 2) {
    GaussianChain::Config cfg;
    cfg.sigmas.assign(static_cast<size_t>(n_orbitals), 1.0);
    cfg.centers0 = {-1.0, 1.0};
    cfg.motion = Eigen::MatrixXd(n_orbitals, 1);
    cfg.motion(0, 0) = -0.5;
    cfg.motion(1, 0) = 0.5;
    for (int k = 2; k < n_orbitals; ++k) {
        const bool left = (k % 2 == 0);
        cfg.centers0.push_back(left ? -1.0 : 1.0);
        cfg.motion(k, 0) = left ? -0.5 : 0.5;
        cfg.sigmas[static_cast<size_t>(k)] = 0.55;
    }
    cfg.grid_points = 512;
    cfg.box_halfwidth = 16.0;
    return GaussianChain(cfg);
}

Grid1DHamiltonian well_hamiltonian(const GaussianChain& chain, double gradient = 0.0) {
    auto well = [](double x) { return -1.5 * std::exp(-x * x / 8.0); };
    return Grid1DHamiltonian(
        chain.grid(), chain.grid_step(), 1,
        [well, gradient](double x, const RealVector& r) {
            return well(x) * (1.0 + gradient * r[0]);
        },
        [well, gradient](int, double x, const RealVector&) { return well(x) * gradient; });
}

}  // namespace

TEST_CASE("solve_generalized_eigen: orthonormal diagonal case") {
    const BasisFrame f = build_frame(Matrix::Identity(2, 2), RealVector::Zero(1));
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    const auto sols = solve_generalized_eigen(matrix_op(h), f);
    REQUIRE(sols.size() == 2);
    REQUIRE(std::abs(sols[0].energy - 1.0) < 1e-14);
    REQUIRE(std::abs(sols[1].energy - 2.0) < 1e-14);
}

TEST_CASE("solve_generalized_eigen: overlap pencil closed form") {
    const double s = 0.31;
    Matrix e(2, 2);
    e << 1.0, s, 0.0, std::sqrt(1.0 - s * s);
    const BasisFrame f = build_frame(e, RealVector::Zero(1));
    Matrix h(2, 2);
    h << 0.0, 1.0, 1.0, 0.0;
    const auto sols = solve_generalized_eigen(matrix_op(h), f);
    // pencil reduction oracle: energies -1/(1-s) and 1/(1+s)
    REQUIRE(std::abs(sols[0].energy + 1.0 / (1.0 - s)) < 1e-12);
    REQUIRE(std::abs(sols[1].energy - 1.0 / (1.0 + s)) < 1e-12);

    // metric orthonormality of the eigenvectors and the residual bound
    for (const auto& a : sols) {
        REQUIRE(std::abs((a.ket.comps.adjoint() * f.metric() * a.ket.comps)(0, 0).real() -
                         1.0) < 1e-10);
        const Vector resid = h * a.ket.comps - a.energy * (f.metric() * a.ket.comps);
        REQUIRE(inf_norm(resid) < 1e-10);
    }
    const Complex cross =
        (sols[0].ket.comps.adjoint() * f.metric() * sols[1].ket.comps)(0, 0);
    REQUIRE(std::abs(cross) < 1e-10);

    REQUIRE_THROWS_AS(solve_generalized_eigen(natural_op(h), f), RepMismatch);
}

TEST_CASE("hf_derivative: static frame and parameter-free Hamiltonian give zero force") {
    GaussianChain::Config cfg;
    cfg.sigmas = {1.0, 1.0};
    cfg.centers0 = {-1.0, 1.0};
    cfg.motion = Eigen::MatrixXd::Zero(2, 1);  // frame does not move
    cfg.grid_points = 512;
    cfg.box_halfwidth = 16.0;
    GaussianChain chain(cfg);
    const auto ham = well_hamiltonian(chain, 0.0);

    const RealVector r = pt1(0.1);
    const BasisFrame frame = evaluate_frame(chain, r);
    const Matrix h_mat =
        hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    for (auto formula :
         {HfFormula::natural_covariant, HfFormula::matrix_raw, HfFormula::matrix_covariant}) {
        const RealVector g = hf_derivative(sols[0], chain, r, ham, formula);
        REQUIRE(std::abs(g[0]) < 1e-10);
    }
}

TEST_CASE("hf_derivative: the three formulas agree and match the eigenvalue slope") {
    const auto chain = separation_chain();
    const auto ham = well_hamiltonian(chain);
    const RealVector r = pt1(0.4);

    const BasisFrame frame = evaluate_frame(chain, r);
    const Matrix h_mat =
        hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    const RealVector g_nat =
        hf_derivative(sols[0], chain, r, ham, HfFormula::natural_covariant);
    const RealVector g_raw = hf_derivative(sols[0], chain, r, ham, HfFormula::matrix_raw);
    const RealVector g_cov =
        hf_derivative(sols[0], chain, r, ham, HfFormula::matrix_covariant);

    REQUIRE(std::abs(g_nat[0] - g_raw[0]) < 1e-10);
    REQUIRE(std::abs(g_nat[0] - g_cov[0]) < 1e-10);

    // eigenvalue finite-difference oracle at h = 1e-4
    auto energy_at = [&](double t) {
        const BasisFrame fr = evaluate_frame(chain, pt1(t));
        const Matrix hm = hermitize(fr.vectors().adjoint() * ham.apply(fr.vectors(), pt1(t)));
        return solve_generalized_eigen(matrix_op(hm), fr)[0].energy;
    };
    const double h = 1e-4;
    const double fd = (energy_at(0.4 + h) - energy_at(0.4 - h)) / (2.0 * h);
    REQUIRE(std::abs(fd - g_nat[0]) < 1e-6);

    // the finite-difference mismatch falls off quadratically
    std::vector<double> hs{4e-2, 2e-2, 1e-2, 5e-3};
    std::vector<double> errs;
    for (double hh : hs) {
        const double fdh = (energy_at(0.4 + hh) - energy_at(0.4 - hh)) / (2.0 * hh);
        errs.push_back(std::abs(fdh - g_nat[0]));
    }
    const FitResult fit = fit_loglog(hs, errs);
    REQUIRE(fit.order > 1.8);
    REQUIRE(fit.order < 2.2);
}

TEST_CASE("hf_derivative: breathing frame with a fixed dense ambient operator") {
    Breathing2D br(ScalarLaw::linear(1.1, 0.3), ScalarLaw::linear(0.9, -0.2));
    auto gen = rng(307);
    const Matrix h0 = random_hermitian(gen, 2);
    DenseAmbientHamiltonian ham(h0, {Matrix::Zero(2, 2)});

    const RealVector r = pt1(0.25);
    const BasisFrame frame = evaluate_frame(br, r);
    const Matrix h_mat = hermitize(frame.vectors().adjoint() * h0 * frame.vectors());
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    const RealVector g_nat = hf_derivative(sols[1], br, r, ham, HfFormula::natural_covariant);
    const RealVector g_raw = hf_derivative(sols[1], br, r, ham, HfFormula::matrix_raw);
    const RealVector g_cov = hf_derivative(sols[1], br, r, ham, HfFormula::matrix_covariant);
    REQUIRE(std::abs(g_nat[0] - g_raw[0]) < 1e-10);
    REQUIRE(std::abs(g_raw[0] - g_cov[0]) < 1e-10);
}

TEST_CASE("hf_derivative refuses degenerate levels") {
    // H proportional to S makes every generalized eigenvalue coincide
    const BasisFrame f = build_frame(Matrix::Identity(2, 2), RealVector::Zero(1));
    DenseAmbientHamiltonian ham(Matrix::Identity(2, 2), {Matrix::Zero(2, 2)});
    StaticFamily fam(Matrix::Identity(2, 2), 1);
    const auto sols = solve_generalized_eigen(matrix_op(Matrix::Identity(2, 2)), f);
    REQUIRE_THROWS_AS(
        hf_derivative(sols[0], fam, RealVector::Zero(1), ham, HfFormula::matrix_raw),
        DegenerateState);
}

TEST_CASE("pulay decomposition: splits sum to the total derivative") {
    const auto chain = separation_chain();
    const auto ham = well_hamiltonian(chain, 0.35);  // moving H and moving frame
    const RealVector r = pt1(0.3);

    const BasisFrame frame = evaluate_frame(chain, r);
    const Matrix h_mat =
        hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    const PulayDecomposition parts = pulay_decomposition(sols[0], chain, r, ham);
    const RealVector total = hf_derivative(sols[0], chain, r, ham, HfFormula::natural_covariant);
    REQUIRE(std::abs(parts.total()[0] - total[0]) < 1e-10);
    // out-of-space share is a genuine contribution for the small frame
    REQUIRE(std::abs(parts.out_of_space[0]) > 1e-6);
    // for an exact eigenstate the in-space Pulay contraction collapses
    REQUIRE(std::abs(parts.in_space[0]) < 1e-10);
}

TEST_CASE("pulay decomposition: static frame with a moving Hamiltonian is pure Hellmann") {
    GaussianChain::Config cfg;
    cfg.sigmas = {1.0, 1.0};
    cfg.centers0 = {-1.0, 1.0};
    cfg.motion = Eigen::MatrixXd::Zero(2, 1);
    cfg.grid_points = 512;
    cfg.box_halfwidth = 16.0;
    GaussianChain chain(cfg);
    const auto ham = well_hamiltonian(chain, 0.4);
    const RealVector r = pt1(0.2);

    const BasisFrame frame = evaluate_frame(chain, r);
    const Matrix h_mat =
        hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    const PulayDecomposition parts = pulay_decomposition(sols[0], chain, r, ham);
    REQUIRE(std::abs(parts.in_space[0]) < 1e-12);
    REQUIRE(std::abs(parts.out_of_space[0]) < 1e-12);
    const RealVector total = hf_derivative(sols[0], chain, r, ham, HfFormula::matrix_raw);
    REQUIRE(std::abs(parts.hellmann[0] - total[0]) < 1e-10);
}

TEST_CASE("pulay decomposition: full-span frame has no out-of-space share") {
    auto gen = rng(311);
    const Matrix e = random_matrix(gen, 3, 3);  // N = M: the frame spans everything
    StaticFamily fam(e, 1);
    const Matrix h0 = random_hermitian(gen, 3);
    DenseAmbientHamiltonian ham(h0, {0.3 * random_hermitian(gen, 3)});

    const RealVector r = pt1(0.15);
    const BasisFrame frame = evaluate_frame(fam, r);
    const Matrix h_mat =
        hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);

    const PulayDecomposition parts = pulay_decomposition(sols[1], fam, r, ham);
    REQUIRE(std::abs(parts.out_of_space[0]) < 1e-12);
    const RealVector total =
        hf_derivative(sols[1], fam, r, ham, HfFormula::matrix_covariant);
    REQUIRE(std::abs(parts.total()[0] - total[0]) < 1e-10);
}

TEST_CASE("pulay out-of-space share shrinks as the frame is enriched") {
    const auto small = separation_chain(2);
    const auto rich = separation_chain(4);
    const auto ham_small = well_hamiltonian(small);
    const auto ham_rich = well_hamiltonian(rich);
    const RealVector r = pt1(0.3);

    auto out_share = [&](const GaussianChain& chain, const Grid1DHamiltonian& ham) {
        const BasisFrame frame = evaluate_frame(chain, r);
        const Matrix h_mat =
            hermitize(frame.vectors().adjoint() * ham.apply(frame.vectors(), r));
        const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);
        return std::abs(pulay_decomposition(sols[0], chain, r, ham).out_of_space[0]);
    };
    const double coarse = out_share(small, ham_small);
    const double fine = out_share(rich, ham_rich);
    REQUIRE(fine < coarse);
}

TEST_CASE("ambient dimension mismatches are reported") {
    const auto chain = separation_chain();
    DenseAmbientHamiltonian wrong(Matrix::Identity(4, 4), {Matrix::Zero(4, 4)});
    const RealVector r = pt1(0.2);
    const BasisFrame frame = evaluate_frame(chain, r);
    const Matrix h_mat = Matrix::Identity(2, 2);
    const auto sols = solve_generalized_eigen(matrix_op(h_mat), frame);
    REQUIRE_THROWS_AS(
        hf_derivative(sols[0], chain, r, wrong, HfFormula::matrix_raw),
        AmbientUnavailable);
}
