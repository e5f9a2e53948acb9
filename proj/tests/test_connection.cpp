#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oblique/connection.hpp"
#include "oblique/curvature.hpp"
#include "support.hpp"

using namespace oblique;
using namespace oblique::testing;

namespace {

RealVector pt(double t) {
    RealVector r(1);
    r[0] = t;
    return r;
}

ChristoffelSet chris_of(const BasisFamily& fam, const RealVector& r,
                        DerivScheme scheme = DerivScheme::analytic()) {
    const BasisFrame f = evaluate_frame(fam, r);
    return christoffel(f, frame_derivatives(fam, r, scheme));
}

GaussianChain curved_chain() {
    GaussianChain::Config cfg;
    cfg.sigmas = {1.0, 0.8};
    cfg.centers0 = {-1.2, 1.0};
    cfg.motion = Eigen::MatrixXd(2, 2);
    cfg.motion << 0.6, -0.3, -0.4, 0.5;
    cfg.grid_points = 512;
    cfg.box_halfwidth = 16.0;
    return GaussianChain(cfg);
}

}  // namespace

TEST_CASE("christoffel: rotating pair gives the antisymmetric rotation block") {
    ScalarLaw theta = ScalarLaw::linear(0.3, 0.8);
    Rotating2D fam(theta);
    const double t = 0.5;
    const auto chris = chris_of(fam, pt(t));
    const double w = theta.deriv(t);
    Matrix expected(2, 2);
    expected << 0.0, -w, w, 0.0;
    REQUIRE(max_abs_diff(chris.ud_right(0), expected) < 1e-13);
}

TEST_CASE("christoffel: breathing pair gives the logarithmic-rate diagonal") {
    ScalarLaw a1 = ScalarLaw::linear(1.2, 0.4);
    ScalarLaw a2{0.9, 0.0, 0.0, 0.2, 1.3, 0.4};
    Breathing2D fam(a1, a2);
    const double t = 0.7;
    const auto chris = chris_of(fam, pt(t));
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = a1.deriv(t) / a1.value(t);
    expected(1, 1) = a2.deriv(t) / a2.value(t);
    REQUIRE(max_abs_diff(chris.ud_right(0), expected) < 1e-13);
}

TEST_CASE("christoffel: symmetric overlap pair has the s'/2 off-diagonal block") {
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw::linear(0.5, 0.1);
    OverlapPair fam(cfg);
    const double t = 0.3;
    const auto chris = chris_of(fam, pt(t));
    const double half_rate = 0.5 * cfg.s_law.deriv(t);
    Matrix expected(2, 2);
    expected << 0.0, half_rate, half_rate, 0.0;
    REQUIRE(max_abs_diff(chris.dd_right(0), expected) < 1e-10);

    // pinned motion with the same overlap law: D_{2 1 t} = s', rest zero
    cfg.pinned = true;
    OverlapPair pinned(cfg);
    const auto chris_p = chris_of(pinned, pt(t));
    Matrix expected_p = Matrix::Zero(2, 2);
    expected_p(1, 0) = cfg.s_law.deriv(t);
    REQUIRE(max_abs_diff(chris_p.dd_right(0), expected_p) < 1e-10);
}

TEST_CASE("covariant derivative of a ket reduces to the raw derivative on a fixed frame") {
    Rotating2D fam(ScalarLaw::constant(0.4));
    const auto chris = chris_of(fam, pt(0.0));
    auto gen = rng(31);
    const StateKet psi{random_ket(gen, 2)};
    const Matrix dpsi = random_matrix(gen, 2, 1);
    REQUIRE(max_abs_diff(covariant_derivative_ket(dpsi, psi, chris), dpsi) < 1e-14);
}

TEST_CASE("ambient constancy: fixed vector in a rotating frame has zero covariant rate") {
    ScalarLaw theta = ScalarLaw::linear(0.0, 1.1);
    Rotating2D fam(theta);
    auto gen = rng(37);
    const AmbientVector v0 = random_ket(gen, 2);
    const ProjectedField field{fam, v0};

    const double t = 0.35;
    const auto chris = chris_of(fam, pt(t));
    const StateKet psi{field.value(pt(t))};
    const Matrix dpsi = field.derivs(pt(t));

    REQUIRE(inf_norm(dpsi) > 1e-2);  // the raw derivative is manifestly nonzero
    REQUIRE(inf_norm(covariant_derivative_ket(dpsi, psi, chris)) < 1e-13);
}

TEST_CASE("tensoriality: covariant derivatives transform with the gauge mix") {
    auto base = std::make_shared<GaussianChain>(curved_chain());
    auto gen = rng(41);
    const AmbientVector v0 = random_ket(gen, base->ambient_dim());
    RealVector r(2);
    r << 0.15, -0.2;

    for (int trial = 0; trial < 5; ++trial) {
        const MixField mix = MixField::random(gen, 2, 2);
        GaugeMixedFamily mixed(base, mix);

        const ProjectedField fe{*base, v0};
        const ProjectedField fa{mixed, v0};

        const auto chris_e = chris_of(*base, r);
        const auto chris_a = chris_of(mixed, r);

        const StateKet psi_e{fe.value(r)};
        const StateKet psi_a{fa.value(r)};
        const Matrix a = mix.value(r);
        REQUIRE(max_abs_diff(Vector(a * psi_a.comps), psi_e.comps) < 1e-10);

        // kets: dh psi_e = A dh psi_a
        const Matrix cov_e = covariant_derivative_ket(fe.derivs(r), psi_e, chris_e);
        const Matrix cov_a = covariant_derivative_ket(fa.derivs(r), psi_a, chris_a);
        REQUIRE(max_abs_diff(Matrix(a * cov_a), cov_e) < 1e-10);

        // the raw derivative violates the law by exactly (d_i A) psi_a
        for (int i = 0; i < 2; ++i) {
            const Vector violation = fe.derivs(r).col(i) - a * fa.derivs(r).col(i);
            REQUIRE(max_abs_diff(violation, Vector(mix.deriv(i, r) * psi_a.comps)) < 1e-10);
        }

        // bras transform with the inverse mix: psi_a,m = psi_e,mu A^mu_m
        const BasisFrame frame_e = evaluate_frame(*base, r);
        const BasisFrame frame_a = evaluate_frame(mixed, r);
        const StateBra bra_e = lower_bra(psi_e, frame_e);
        const StateBra bra_a = lower_bra(psi_a, frame_a);
        REQUIRE(max_abs_diff(Vector(a.transpose() * bra_e.comps), bra_a.comps) < 1e-10);

        // bra derivative fields: d_i psi_mu of the projected field
        auto bra_derivs = [&](const BasisFamily& fam, const ProjectedField& fld) {
            const BasisFrame fr = evaluate_frame(fam, r);
            const auto d = frame_derivatives(fam, r, DerivScheme::analytic());
            Matrix out(fam.dim(), fam.n_params());
            // psi_mu = conj(S psi); d(psi_mu) = conj(dS psi + S dpsi)
            const Vector psi = fld.value(r);
            const Matrix dpsi = fld.derivs(r);
            for (int i = 0; i < fam.n_params(); ++i) {
                const Matrix& de = d.d_vectors[static_cast<size_t>(i)];
                const Matrix ds = de.adjoint() * fr.vectors() + fr.vectors().adjoint() * de;
                out.col(i) = (ds * psi + fr.metric() * dpsi.col(i)).conjugate();
            }
            return out;
        };
        const Matrix cov_bra_e =
            covariant_derivative_bra(bra_derivs(*base, fe), bra_e, chris_e);
        const Matrix cov_bra_a =
            covariant_derivative_bra(bra_derivs(mixed, fa), bra_a, chris_a);
        REQUIRE(max_abs_diff(Matrix(a.transpose() * cov_bra_e), cov_bra_a) < 1e-10);

        // operators: H_e = A H_a A^{-1}, dh H_e = A (dh H_a) A^{-1}
        const Matrix h0 = random_hermitian(gen, base->ambient_dim());
        auto op_field = [&](const BasisFamily& fam) {
            const BasisFrame fr = evaluate_frame(fam, r);
            const auto d = frame_derivatives(fam, r, DerivScheme::analytic());
            const auto df = dual_frame_derivs(fr, d);
            const Matrix f = fr.duals();
            SecondRankOp op = natural_op(f.adjoint() * h0 * fr.vectors());
            std::vector<Matrix> dh;
            for (int i = 0; i < fam.n_params(); ++i) {
                const Matrix& de = d.d_vectors[static_cast<size_t>(i)];
                dh.push_back(Matrix(df[static_cast<size_t>(i)].adjoint() * h0 * fr.vectors() +
                                    f.adjoint() * h0 * de));
            }
            return std::make_pair(op, dh);
        };
        const auto [op_e, dh_e] = op_field(*base);
        const auto [op_a, dh_a] = op_field(mixed);
        const Matrix a_inv = a.partialPivLu().inverse();
        REQUIRE(max_abs_diff(Matrix(a * op_a.entries * a_inv), op_e.entries) < 1e-10);
        const auto cov_op_e = covariant_derivative_operator(dh_e, op_e, chris_e, Rep::natural);
        const auto cov_op_a = covariant_derivative_operator(dh_a, op_a, chris_a, Rep::natural);
        for (int i = 0; i < 2; ++i)
            REQUIRE(max_abs_diff(Matrix(a * cov_op_a[static_cast<size_t>(i)] * a_inv),
                                 cov_op_e[static_cast<size_t>(i)]) < 1e-10);

        // Christoffel transformation law carries the inhomogeneous term
        for (int i = 0; i < 2; ++i) {
            const Matrix lhs = chris_e.ud_right(i);
            const Matrix rhs = a * chris_a.ud_right(i) * a_inv - mix.deriv(i, r) * a_inv;
            REQUIRE(max_abs_diff(lhs, rhs) < 1e-9);
        }
    }
}

TEST_CASE("bra-ket pairing differentiates as a scalar") {
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw{0.45, 0.08, 0.0, 0.1, 0.9, 0.3};
    cfg.grid_points = 512;
    OverlapPair fam(cfg);
    auto gen = rng(43);
    const AmbientVector v0 = random_ket(gen, fam.ambient_dim());
    const ProjectedField field{fam, v0};
    const double t = 0.4, h = 1e-5;

    const auto chris = chris_of(fam, pt(t));
    const BasisFrame frame = evaluate_frame(fam, pt(t));
    const StateKet psi{field.value(pt(t))};
    const StateBra bra = lower_bra(psi, frame);

    // raw t-derivative of the scalar psi_mu psi^mu by finite differences
    auto scalar = [&](double tt) {
        const BasisFrame fr = evaluate_frame(fam, pt(tt));
        const Vector p = field.value(pt(tt));
        return (lower_bra(StateKet{p}, fr).comps.transpose() * p)(0, 0);
    };
    const Complex d_scalar = (scalar(t + h) - scalar(t - h)) / (2.0 * h);

    // covariant product rule on the pair
    const Matrix dpsi = field.derivs(pt(t));
    const auto d = frame_derivatives(fam, pt(t), DerivScheme::analytic());
    Matrix dbra(2, 1);
    {
        const Matrix& de = d.d_vectors[0];
        const Matrix ds = de.adjoint() * frame.vectors() + frame.vectors().adjoint() * de;
        dbra.col(0) = (ds * psi.comps + frame.metric() * dpsi.col(0)).conjugate();
    }
    const Matrix cov_ket = covariant_derivative_ket(dpsi, psi, chris);
    const Matrix cov_bra = covariant_derivative_bra(dbra, bra, chris);
    const Complex via_cov = (cov_bra.col(0).transpose() * psi.comps)(0, 0) +
                            (bra.comps.transpose() * cov_ket.col(0))(0, 0);
    REQUIRE(std::abs(via_cov - d_scalar) < 1e-8);
}

TEST_CASE("Leibniz rule for operator acting on ket") {
    auto base = std::make_shared<GaussianChain>(curved_chain());
    auto gen = rng(47);
    RealVector r(2);
    r << 0.1, 0.3;
    const auto chris = chris_of(*base, r);

    const VectorField psi_field = VectorField::random(gen, 2, 2);
    const OperatorField h_field = OperatorField::random(gen, 2, 2);

    const StateKet psi{psi_field.value(r)};
    const SecondRankOp h = natural_op(h_field.value(r));
    Matrix dpsi(2, 2);
    std::vector<Matrix> dh;
    for (int i = 0; i < 2; ++i) {
        dpsi.col(i) = psi_field.deriv(i, r);
        dh.push_back(h_field.deriv(i, r));
    }

    // dh_i (H psi) with the product's raw derivative supplied analytically
    const StateKet h_psi{h.entries * psi.comps};
    Matrix d_hpsi(2, 2);
    for (int i = 0; i < 2; ++i)
        d_hpsi.col(i) = dh[static_cast<size_t>(i)] * psi.comps + h.entries * dpsi.col(i);
    const Matrix lhs = covariant_derivative_ket(d_hpsi, h_psi, chris);

    const auto cov_h = covariant_derivative_operator(dh, h, chris, Rep::natural);
    const Matrix cov_psi = covariant_derivative_ket(dpsi, psi, chris);
    Matrix rhs(2, 2);
    for (int i = 0; i < 2; ++i)
        rhs.col(i) = cov_h[static_cast<size_t>(i)] * psi.comps + h.entries * cov_psi.col(i);

    REQUIRE(max_abs_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("covariant derivative of the identity operator vanishes identically") {
    Rotating2D fam(ScalarLaw::linear(0.0, 0.9));
    const auto chris = chris_of(fam, pt(0.2));
    const SecondRankOp id = natural_op(Matrix::Identity(2, 2));
    const std::vector<Matrix> dzero(1, Matrix::Zero(2, 2));
    const auto cov = covariant_derivative_operator(dzero, id, chris, Rep::natural);
    REQUIRE(inf_norm(cov[0]) == 0.0);
}

TEST_CASE("matrix-representation covariant derivative and the rep guard") {
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw::linear(0.4, 0.15);
    cfg.grid_points = 512;
    OverlapPair fam(cfg);
    const double t = 0.2;
    const auto chris = chris_of(fam, pt(t));
    const BasisFrame frame = evaluate_frame(fam, pt(t));

    // fixed ambient operator: its matrix representation moves with the frame
    auto gen = rng(53);
    const Matrix h0 = random_hermitian(gen, fam.ambient_dim());
    const auto d = frame_derivatives(fam, pt(t), DerivScheme::analytic());
    const Matrix h_mat = frame.vectors().adjoint() * h0 * frame.vectors();
    std::vector<Matrix> dh_mat;
    dh_mat.push_back(Matrix(d.d_vectors[0].adjoint() * h0 * frame.vectors() +
                            frame.vectors().adjoint() * h0 * d.d_vectors[0]));

    // cross-check against the natural-rep covariant derivative through S
    const auto df = dual_frame_derivs(frame, d);
    const Matrix h_nat = frame.inv_metric() * h_mat;
    std::vector<Matrix> dh_nat;
    dh_nat.push_back(Matrix(df[0].adjoint() * h0 * frame.vectors() +
                            frame.duals().adjoint() * h0 * d.d_vectors[0]));

    const auto cov_mat =
        covariant_derivative_operator(dh_mat, matrix_op(h_mat), chris, Rep::matrix);
    const auto cov_nat =
        covariant_derivative_operator(dh_nat, natural_op(h_nat), chris, Rep::natural);
    // dh_i H_{mu nu} = S_{mu sigma} dh_i H^sigma_nu  (metric constancy)
    REQUIRE(max_abs_diff(cov_mat[0], Matrix(frame.metric() * cov_nat[0])) < 1e-10);

    REQUIRE_THROWS_AS(
        covariant_derivative_operator(dh_mat, matrix_op(h_mat), chris, Rep::natural),
        RepMismatch);
}

TEST_CASE("identity suite: analytic residuals at the exactness floor") {
    auto gen = rng(59);
    const std::vector<std::string> kinds{"rotating2d", "breathing2d", "overlap_pair_symmetric",
                                         "overlap_pair_pinned", "gaussian_chain",
                                         "two_level_sphere"};
    for (const auto& kind : kinds) {
        const auto fam = make_default_family(kind);
        for (int trial = 0; trial < 3; ++trial) {
            const RealVector r = sample_domain_point(*fam, gen);
            const BasisFrame frame = evaluate_frame(*fam, r);
            const auto derivs = frame_derivatives(*fam, r, DerivScheme::analytic());
            const auto report =
                verify_connection_identities(christoffel(frame, derivs), frame, derivs);
            INFO(kind << " at trial " << trial);
            REQUIRE(report.worst() < 1e-10);

            const auto fd = frame_derivatives(*fam, r, DerivScheme::central_fd(1e-4));
            const auto report_fd =
                verify_connection_identities(christoffel(frame, fd), frame, fd);
            REQUIRE(report_fd.worst() < 1e-6);
        }
    }
}

TEST_CASE("rotating2d keeps the lower metric exactly constant") {
    ScalarLaw theta = ScalarLaw::linear(0.1, 1.3);
    Rotating2D fam(theta);
    const auto chris = chris_of(fam, pt(0.7));
    // d_t S = 0 bit-for-bit, and the shifting assembly cancels exactly
    REQUIRE(inf_norm(chris.d_metric_lower(0)) == 0.0);
    const Matrix resid = chris.d_metric_lower(0) - chris.dd_mid(0) - chris.dd_right(0);
    REQUIRE(inf_norm(Matrix(resid + chris.dd_mid(0) + chris.dd_right(0))) == 0.0);
    // covariant constancy of both metrics at the roundoff floor
    const BasisFrame frame = evaluate_frame(fam, pt(0.7));
    const auto derivs = frame_derivatives(fam, pt(0.7), DerivScheme::analytic());
    const auto report = verify_connection_identities(chris, frame, derivs);
    REQUIRE(report.metric_constancy < 1e-14);
}

TEST_CASE("derived Christoffel accessors match direct ambient inner products") {
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw{0.5, 0.1, 0.0, 0.15, 1.2, 0.2};
    cfg.grid_points = 512;
    OverlapPair fam(cfg);
    const RealVector r = pt(0.45);
    const BasisFrame frame = evaluate_frame(fam, r);
    const auto derivs = frame_derivatives(fam, r, DerivScheme::analytic());
    const auto chris = christoffel(frame, derivs);
    const auto df = dual_frame_derivs(frame, derivs);

    const Matrix& e = frame.vectors();
    const Matrix f = frame.duals();
    REQUIRE(max_abs_diff(chris.dd_mid(0), Matrix(derivs.d_vectors[0].adjoint() * e)) < 1e-12);
    REQUIRE(max_abs_diff(chris.ud_right(0), Matrix(f.adjoint() * derivs.d_vectors[0])) < 1e-12);
    REQUIRE(max_abs_diff(chris.ud_mid(0), Matrix(df[0].adjoint() * e)) < 1e-12);
    REQUIRE(max_abs_diff(chris.du_right(0), Matrix(e.adjoint() * df[0])) < 1e-12);
    REQUIRE(max_abs_diff(chris.du_mid(0), Matrix(derivs.d_vectors[0].adjoint() * f)) < 1e-12);
    REQUIRE(max_abs_diff(chris.uu_right(0), Matrix(f.adjoint() * df[0])) < 1e-12);
    REQUIRE(max_abs_diff(chris.uu_mid(0), Matrix(df[0].adjoint() * f)) < 1e-12);
}

TEST_CASE("parallel transport: flat frame leaves the state alone") {
    Rotating2D fam(ScalarLaw::constant(0.3));
    const auto chris = chris_of(fam, pt(0.0));
    auto gen = rng(61);
    const StateKet psi{random_ket(gen, 2)};
    RealVector dr(1);
    dr[0] = 0.05;
    REQUIRE(max_abs_diff(parallel_transport_step(psi, chris, dr).comps, psi.comps) == 0.0);
}

TEST_CASE("parallel transport keeps mutual products to second order per step") {
    ScalarLaw theta = ScalarLaw::linear(0.0, 1.0);
    Rotating2D fam(theta);
    auto drift = [&](double dt) {
        Matrix kets(2, 2);
        kets << 1.0, 0.0, 0.0, 1.0;
        const int steps = 8;
        for (int k = 0; k < steps; ++k) {
            const auto chris = chris_of(fam, pt(k * dt));
            RealVector dr(1);
            dr[0] = dt;
            for (int n = 0; n < 2; ++n)
                kets.col(n) =
                    parallel_transport_step(StateKet{kets.col(n)}, chris, dr).comps;
        }
        const BasisFrame end = evaluate_frame(fam, pt(steps * dt));
        const Matrix overlap = kets.adjoint() * end.metric() * kets;
        return inf_norm(Matrix(overlap - Matrix::Identity(2, 2))) / steps;  // per step
    };
    const double d1 = drift(0.02);
    const double d2 = drift(0.01);
    REQUIRE(d1 / d2 > 3.0);
    REQUIRE(d1 / d2 < 5.0);
}

TEST_CASE("holonomy around a small loop matches the integrated curvature") {
    GaussianChain::Config cfg;
    cfg.sigmas = {1.0, 1.0};
    cfg.centers0 = {-0.8, 0.8};
    cfg.motion = Eigen::MatrixXd(2, 2);
    cfg.motion << 1.0, -0.5, -0.7, 0.9;
    cfg.grid_points = 512;
    cfg.box_halfwidth = 16.0;
    const GaussianChain chain(cfg);

    RealVector r0(2);
    r0 << 0.0, 0.0;
    const CurvatureTensor curv = riemann(chain, r0, DerivScheme::analytic());
    REQUIRE(inf_norm(Matrix(curv.block(0, 1))) > 0.05);  // genuine curvature signal

    // a frame vector's own components, transported around a square loop
    Vector psi0(2);
    psi0 << 1.0, 0.0;

    auto loop_defect = [&](double eps, int sub) {
        StateKet psi{psi0};
        RealVector r = r0;
        auto leg = [&](int dir, double sign) {
            for (int k = 0; k < sub; ++k) {
                const auto chris = chris_of(chain, r);
                RealVector dr = RealVector::Zero(2);
                dr[dir] = sign * eps / sub;
                psi = parallel_transport_step(psi, chris, dr);
                r[dir] += sign * eps / sub;
            }
        };
        leg(0, +1.0);
        leg(1, +1.0);
        leg(0, -1.0);
        leg(1, -1.0);
        const Vector expected = psi0 - eps * eps * (curv.block(0, 1) * psi0);
        return max_abs_diff(psi.comps, expected) / (eps * eps);
    };
    // beyond-leading residual shrinks with the loop area (substeps scale with
    // 1/eps so the first-order transport error shrinks alongside)
    const double m1 = loop_defect(0.2, 256);
    const double m2 = loop_defect(0.1, 512);
    const double signal = inf_norm(Vector(curv.block(0, 1) * psi0));
    REQUIRE(m1 < 0.5 * signal);
    REQUIRE(m2 < 0.7 * m1);
}

TEST_CASE("rotation/deformation split") {
    Rotating2D rot(ScalarLaw::linear(0.2, 0.9));
    const auto split_rot = rotation_deformation_split(chris_of(rot, pt(0.3)));
    REQUIRE(inf_norm(split_rot.deformation[0]) < 1e-14);
    REQUIRE(inf_norm(split_rot.rotation[0]) > 0.1);

    Breathing2D br(ScalarLaw::linear(1.1, 0.3), ScalarLaw::linear(0.8, -0.2));
    const auto split_br = rotation_deformation_split(chris_of(br, pt(0.2)));
    REQUIRE(inf_norm(split_br.rotation[0]) < 1e-14);

    // parts always sum back and have the right symmetry
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw::linear(0.5, 0.1);
    cfg.grid_points = 512;
    cfg.pinned = true;
    const auto chris = chris_of(OverlapPair(cfg), pt(0.4));
    const auto parts = rotation_deformation_split(chris);
    REQUIRE(max_abs_diff(Matrix(parts.rotation[0] + parts.deformation[0]),
                         chris.dd_right(0)) < 1e-15);
    REQUIRE(max_abs_diff(parts.rotation[0], Matrix(-parts.rotation[0].adjoint())) < 1e-15);
    REQUIRE(max_abs_diff(parts.deformation[0], parts.deformation[0].adjoint()) < 1e-15);
}

TEST_CASE("three propagation forms agree to second order") {
    // forms: raw-component propagation, ambient projective propagation, and
    // the gauge-overlap form with the covariant derivative
    OverlapPair::Config cfg;
    cfg.s_law = ScalarLaw{0.5, 0.1, 0.0, 0.12, 0.7, 0.1};
    cfg.grid_points = 512;
    OverlapPair fam(cfg);
    auto gen = rng(71);
    const AmbientVector v0 = random_ket(gen, fam.ambient_dim());
    const ProjectedField field{fam, v0};
    const double t = 0.3;

    auto spread = [&](double dt) {
        const RealVector r = pt(t);
        const RealVector r1 = pt(t + dt);
        const BasisFrame here = evaluate_frame(fam, r);
        const BasisFrame next = evaluate_frame(fam, r1);
        const Vector psi = field.value(r);
        const Matrix dpsi = field.derivs(r);

        // raw components, carried over unchanged
        const Vector prop1 = psi + dpsi.col(0) * dt;

        // ambient projective propagation: P(next) { P v0 + P d_t(P v0) dt },
        // with d_t(P v0) assembled from the frame derivatives
        const auto d = frame_derivatives(fam, r, DerivScheme::analytic());
        const Matrix& e = here.vectors();
        const Matrix& de = d.d_vectors[0];
        const Matrix ds = de.adjoint() * e + e.adjoint() * de;
        const Matrix dsinv = -here.inv_metric() * ds * here.inv_metric();
        const AmbientVector rate = de * (here.inv_metric() * (e.adjoint() * v0)) +
                                   e * (dsinv * (e.adjoint() * v0)) +
                                   e * (here.inv_metric() * (de.adjoint() * v0));
        const AmbientVector carried = here.projector() * v0 + dt * (here.projector() * rate);
        const Vector prop2 = next.inv_metric() * (next.vectors().adjoint() * carried);

        // gauge-overlap form with the covariant derivative
        const auto chris = christoffel(here, d);
        const Matrix cov = covariant_derivative_ket(dpsi, StateKet{psi}, chris);
        const Matrix a = frame_gauge_overlap(next, here, GaugePlacement::natural);
        const Vector prop3 = a * (psi + cov.col(0) * dt);

        double worst = max_abs_diff(prop1, prop3);
        worst = std::max(worst, max_abs_diff(prop2, prop3));
        worst = std::max(worst, max_abs_diff(prop1, prop2));
        return worst;
    };
    const double s1 = spread(0.02);
    const double s2 = spread(0.01);
    REQUIRE(s1 / s2 > 3.0);
    REQUIRE(s1 / s2 < 5.2);
}
