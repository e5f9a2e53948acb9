#include "oblique/curvature.hpp"

#include <cmath>

namespace oblique {

double CurvatureTensor::antisymmetry_defect() const {
    double worst = 0.0;
    for (int i = 0; i < n_params; ++i)
        for (int j = 0; j < n_params; ++j)
            worst = std::max(worst, inf_norm(Matrix(block(i, j) + block(j, i))));
    return worst;
}

namespace {

ChristoffelSet chris_at(const BasisFamily& family, const RealVector& r,
                        const DerivScheme& inner) {
    const BasisFrame frame = evaluate_frame(family, r);
    return christoffel(frame, frame_derivatives(family, r, inner));
}

DerivScheme inner_scheme(const BasisFamily& family, const DerivScheme& scheme) {
    if (family.has_analytic_derivatives()) return DerivScheme::analytic();
    return DerivScheme::central_fd(scheme.h);
}

}  // namespace

CurvatureTensor riemann(const BasisFamily& family, const RealVector& r,
                        const DerivScheme& scheme) {
    const int p = family.n_params();
    if (p < 2)
        throw InsufficientParameters("curvature needs at least two parameters");
    if (!family.in_domain(r))
        throw OutOfDomain("point outside the domain of family '" + family.kind_name() + "'");

    const DerivScheme inner = inner_scheme(family, scheme);
    const ChristoffelSet chris = chris_at(family, r, inner);
    std::vector<Matrix> d_nat(static_cast<size_t>(p));
    for (int j = 0; j < p; ++j) d_nat[static_cast<size_t>(j)] = chris.ud_right(j);

    // dD[i][j] = d_i D^mu_{nu j}
    std::vector<std::vector<Matrix>> dd(static_cast<size_t>(p),
                                        std::vector<Matrix>(static_cast<size_t>(p)));
    if (scheme.kind == DerivScheme::Kind::analytic) {
        const BasisFrame frame = chris.frame();
        const Matrix& e = frame.vectors();
        const Matrix& sinv = frame.inv_metric();
        const auto de = family.frame_vector_derivs(r);
        const auto d2e = family.frame_vector_second_derivs(r);
        for (int i = 0; i < p; ++i) {
            const Matrix ds = de[static_cast<size_t>(i)].adjoint() * e +
                              e.adjoint() * de[static_cast<size_t>(i)];
            const Matrix dsinv = -sinv * ds * sinv;
            for (int j = 0; j < p; ++j) {
                // d_i D_{mu nu j} = <d_i e_mu | d_j e_nu> + <e_mu | d_i d_j e_nu>
                const Matrix d_lower = de[static_cast<size_t>(i)].adjoint() *
                                           de[static_cast<size_t>(j)] +
                                       e.adjoint() * d2e[static_cast<size_t>(i * p + j)];
                dd[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    dsinv * chris.dd_right(j) + sinv * d_lower;
            }
        }
    } else {
        const double h = scheme.h;
        for (int i = 0; i < p; ++i) {
            RealVector fwd = r, bwd = r;
            fwd[i] += h;
            bwd[i] -= h;
            if (!family.in_domain(fwd) || !family.in_domain(bwd))
                throw OutOfDomain("curvature stencil leaves the family domain");
            const ChristoffelSet cf = chris_at(family, fwd, inner);
            const ChristoffelSet cb = chris_at(family, bwd, inner);
            for (int j = 0; j < p; ++j)
                dd[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    (cf.ud_right(j) - cb.ud_right(j)) / (2.0 * h);
        }
    }

    CurvatureTensor curv;
    curv.n_params = p;
    curv.dim = family.dim();
    curv.point = r;
    curv.blocks.resize(static_cast<size_t>(p * p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            curv.blocks[static_cast<size_t>(i * p + j)] =
                dd[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                dd[static_cast<size_t>(j)][static_cast<size_t>(i)] +
                d_nat[static_cast<size_t>(i)] * d_nat[static_cast<size_t>(j)] -
                d_nat[static_cast<size_t>(j)] * d_nat[static_cast<size_t>(i)];
    return curv;
}

double commutator_check(const BasisFamily& family, const RealVector& r, const StateKet& psi,
                        double h) {
    const int p = family.n_params();
    if (p < 2)
        throw InsufficientParameters("curvature needs at least two parameters");
    if (psi.comps.size() != family.dim())
        throw DimensionMismatch("state length does not match frame dimension");

    const DerivScheme inner = inner_scheme(family, DerivScheme::central_fd(h));

    // Covariant-derivative field of the constant-component state,
    // G_j(R') = D^._{. j}(R') psi.
    auto field = [&](const RealVector& point) {
        const ChristoffelSet c = chris_at(family, point, inner);
        Matrix g(family.dim(), p);
        for (int j = 0; j < p; ++j) g.col(j) = c.ud_right(j) * psi.comps;
        return g;
    };

    const ChristoffelSet here = chris_at(family, r, inner);
    const Matrix g_here = field(r);

    // nested[i](.,j) = dh_i (dh_j psi) via a central stencil in direction i
    std::vector<Matrix> nested(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
        RealVector fwd = r, bwd = r;
        fwd[i] += h;
        bwd[i] -= h;
        if (!family.in_domain(fwd) || !family.in_domain(bwd))
            throw OutOfDomain("commutator stencil leaves the family domain");
        nested[static_cast<size_t>(i)] =
            (field(fwd) - field(bwd)) / (2.0 * h) + here.ud_right(i) * g_here;
    }

    const DerivScheme ref = family.has_analytic_second_derivs()
                                ? DerivScheme::analytic()
                                : DerivScheme::central_fd(h / 16.0);
    const CurvatureTensor curv = riemann(family, r, ref);

    double worst = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            const Vector commutator = nested[static_cast<size_t>(i)].col(j) -
                                      nested[static_cast<size_t>(j)].col(i);
            worst = std::max(worst, inf_norm(Vector(curv.block(i, j) * psi.comps - commutator)));
        }
    return worst;
}

std::vector<Complex> berry_connection_trace(const ChristoffelSet& chris) {
    std::vector<Complex> a(static_cast<size_t>(chris.n_params()));
    for (int j = 0; j < chris.n_params(); ++j)
        a[static_cast<size_t>(j)] = Complex(0.0, 1.0) * chris.ud_right(j).trace();
    return a;
}

Matrix ricci_berry(const BasisFamily& family, const RealVector& r, const DerivScheme& scheme,
                   RicciForm form) {
    const int p = family.n_params();
    if (p < 2)
        throw InsufficientParameters("Ricci form needs at least two parameters");
    const BasisFrame frame = evaluate_frame(family, r);
    const FrameDerivatives derivs = frame_derivatives(family, r, scheme);

    Matrix ricci = Matrix::Zero(p, p);
    if (form == RicciForm::orthonormal) {
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                const Complex x = (derivs.d_vectors[static_cast<size_t>(i)].adjoint() *
                                   derivs.d_vectors[static_cast<size_t>(j)])
                                      .trace();
                const Complex val = Complex(0.0, 2.0) * std::imag(x);
                ricci(i, j) = val;
                ricci(j, i) = -val;
            }
        return ricci;
    }
    const auto df = dual_frame_derivs(frame, derivs);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            const Complex val = (df[static_cast<size_t>(i)].adjoint() *
                                 derivs.d_vectors[static_cast<size_t>(j)])
                                    .trace() -
                                (df[static_cast<size_t>(j)].adjoint() *
                                 derivs.d_vectors[static_cast<size_t>(i)])
                                    .trace();
            ricci(i, j) = val;
            ricci(j, i) = -val;
        }
    return ricci;
}

Matrix ricci_berry_expanded(const BasisFamily& family, const RealVector& r,
                            const DerivScheme& scheme) {
    const int p = family.n_params();
    if (p < 2)
        throw InsufficientParameters("Ricci form needs at least two parameters");
    const BasisFrame frame = evaluate_frame(family, r);
    const FrameDerivatives derivs = frame_derivatives(family, r, scheme);
    const Matrix& e = frame.vectors();
    const Matrix& sinv = frame.inv_metric();

    std::vector<Matrix> d_lower(static_cast<size_t>(p)), dsinv(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
        const Matrix half = e.adjoint() * derivs.d_vectors[static_cast<size_t>(i)];
        d_lower[static_cast<size_t>(i)] = half;
        const Matrix ds = half.adjoint() + half;
        dsinv[static_cast<size_t>(i)] = -sinv * ds * sinv;
    }

    Matrix ricci = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            const Matrix cross = derivs.d_vectors[static_cast<size_t>(i)].adjoint() *
                                 derivs.d_vectors[static_cast<size_t>(j)];
            const Complex x = (sinv * cross).trace();
            Complex val = Complex(0.0, 2.0) * std::imag(x);
            val += (dsinv[static_cast<size_t>(i)] * d_lower[static_cast<size_t>(j)]).trace();
            val -= (dsinv[static_cast<size_t>(j)] * d_lower[static_cast<size_t>(i)]).trace();
            ricci(i, j) = val;
            ricci(j, i) = -val;
        }
    return ricci;
}

Matrix ricci_from_riemann(const CurvatureTensor& curv) {
    Matrix ricci(curv.n_params, curv.n_params);
    for (int i = 0; i < curv.n_params; ++i)
        for (int j = 0; j < curv.n_params; ++j) ricci(i, j) = curv.block(i, j).trace();
    return ricci;
}

double trace_cancellation_defect(const ChristoffelSet& chris) {
    double worst = 0.0;
    for (int i = 0; i < chris.n_params(); ++i) {
        const Matrix di = chris.ud_right(i);
        for (int j = i + 1; j < chris.n_params(); ++j) {
            const Matrix dj = chris.ud_right(j);
            worst = std::max(worst, std::abs((di * dj - dj * di).trace()));
        }
    }
    return worst;
}

double chern_number(const BasisFamily& family, int n_theta, int n_phi,
                    const DerivScheme& scheme, par::Execution ex) {
    if (family.n_params() != 2)
        throw InsufficientParameters("Chern quadrature expects a (theta, phi) family");
    const double dth = M_PI / n_theta;
    const double dph = 2.0 * M_PI / n_phi;
    const auto n = static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi);
    const Complex total = par::map_sum<Complex>(
        n,
        [&](std::size_t idx) {
            const int kt = static_cast<int>(idx) / n_phi;
            const int kp = static_cast<int>(idx) % n_phi;
            RealVector r(2);
            r[0] = (kt + 0.5) * dth;
            r[1] = (kp + 0.5) * dph;
            return ricci_berry(family, r, scheme, RicciForm::nonorthogonal)(0, 1);
        },
        ex);
    const Complex chern = total * dth * dph / Complex(0.0, 2.0 * M_PI);
    return chern.real();
}

}  // namespace oblique
