#include "oblique/propagators.hpp"

#include <cmath>
#include <sstream>

#include "oblique/curvature.hpp"

namespace oblique {

PropagatorTag propagator_tag_from_name(const std::string& name) {
    if (name == "cn_fixed") return PropagatorTag::cn_fixed;
    if (name == "cn_moving_naive") return PropagatorTag::cn_moving_naive;
    if (name == "cn_moving_gauge") return PropagatorTag::cn_moving_gauge;
    if (name == "cn_moving_sc") return PropagatorTag::cn_moving_sc;
    if (name == "lowdin") return PropagatorTag::lowdin;
    if (name == "cn_unitary_gauge") return PropagatorTag::cn_unitary_gauge;
    if (name == "cn_unitary_sc") return PropagatorTag::cn_unitary_sc;
    throw ConfigParseError("unknown propagator kind '" + name + "'");
}

std::string propagator_tag_name(PropagatorTag tag) {
    switch (tag) {
        case PropagatorTag::cn_fixed: return "cn_fixed";
        case PropagatorTag::cn_moving_naive: return "cn_moving_naive";
        case PropagatorTag::cn_moving_gauge: return "cn_moving_gauge";
        case PropagatorTag::cn_moving_sc: return "cn_moving_sc";
        case PropagatorTag::lowdin: return "lowdin";
        case PropagatorTag::cn_unitary_gauge: return "cn_unitary_gauge";
        case PropagatorTag::cn_unitary_sc: return "cn_unitary_sc";
    }
    return "?";
}

void PropagatorKind::validate() const {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigParseError("propagator dt must be nonzero");
    if (!(sc_tol > 0.0)) throw ConfigParseError("sc_tol must be positive");
    if (sc_max_iter < 1) throw ConfigParseError("sc_max_iter must be at least 1");
    if (ortho_interval < 1) throw ConfigParseError("ortho_interval must be at least 1");
}

ParameterPath ParameterPath::identity() {
    ParameterPath p;
    p.point = [](double t) {
        RealVector r(1);
        r[0] = t;
        return r;
    };
    p.velocity = [](double) {
        RealVector v(1);
        v[0] = 1.0;
        return v;
    };
    return p;
}

HamiltonianFn zero_hamiltonian() {
    return [](double, const BasisFrame& frame) {
        return Matrix(Matrix::Zero(frame.dim(), frame.dim()));
    };
}

HamiltonianFn constant_matrix_hamiltonian(Matrix h_matrix_rep) {
    return [h = std::move(h_matrix_rep)](double, const BasisFrame&) { return h; };
}

HamiltonianFn projected_ambient_hamiltonian(Matrix h0_ambient) {
    return [h0 = std::move(h0_ambient)](double, const BasisFrame& frame) {
        if (h0.rows() != frame.ambient_dim())
            throw DimensionMismatch("ambient Hamiltonian dimension mismatch");
        return Matrix(hermitize(frame.vectors().adjoint() * h0 * frame.vectors()));
    };
}

TimeModel::TimeModel(std::shared_ptr<const BasisFamily> family, HamiltonianFn hamiltonian,
                     ParameterPath path, DerivScheme scheme)
    : family_(std::move(family)),
      hamiltonian_(std::move(hamiltonian)),
      path_(std::move(path)),
      scheme_(scheme) {
    if (!family_) throw Error("TimeModel needs a basis family");
    if (!hamiltonian_) hamiltonian_ = zero_hamiltonian();
}

RealVector TimeModel::point_at(double t) const {
    RealVector r = path_.point(t);
    if (r.size() != family_->n_params())
        throw DimensionMismatch("path dimension does not match family parameters");
    return r;
}

BasisFrame TimeModel::frame_at(double t) const { return evaluate_frame(*family_, point_at(t)); }

Matrix TimeModel::hamiltonian_matrix(double t, const BasisFrame& frame) const {
    Matrix h = hamiltonian_(t, frame);
    if (h.rows() != frame.dim() || h.cols() != frame.dim())
        throw DimensionMismatch("Hamiltonian shape does not match frame");
    return h;
}

Matrix TimeModel::d_lower_time(double t, const BasisFrame& frame) const {
    const RealVector r = point_at(t);
    const RealVector v = path_.velocity(t);
    const FrameDerivatives derivs = frame_derivatives(*family_, r, scheme_);
    Matrix d = Matrix::Zero(frame.dim(), frame.dim());
    for (int i = 0; i < family_->n_params(); ++i)
        d += v[i] * (frame.vectors().adjoint() * derivs.d_vectors[static_cast<size_t>(i)]);
    return d;
}

ChristoffelSet TimeModel::christoffel_at(double t) const {
    const RealVector r = point_at(t);
    const BasisFrame frame = evaluate_frame(*family_, r);
    return christoffel(frame, frame_derivatives(*family_, r, scheme_));
}

Matrix StateBundle::state_overlap() const {
    return kets.adjoint() * frame.metric() * kets;
}

double StateBundle::orthonormality_deviation() const {
    const Matrix s = state_overlap();
    return inf_norm(Matrix(s - Matrix::Identity(s.rows(), s.cols())));
}

StateBundle make_bundle(const TimeModel& model, double t0, Matrix kets) {
    StateBundle b;
    b.frame = model.frame_at(t0);
    if (kets.rows() != b.frame.dim()) throw DimensionMismatch("state bundle shape mismatch");
    b.kets = std::move(kets);
    b.time = t0;
    return b;
}

namespace {

/// [S + i dt/2 H]^{-1} [S - i dt/2 H]
Matrix cn_core(const Matrix& s, const Matrix& h, double dt) {
    const Complex half(0.0, 0.5 * dt);
    const Matrix plus = s + half * h;
    const Matrix minus = s - half * h;
    return plus.partialPivLu().solve(minus);
}

Matrix state_orthonormalize(const Matrix& kets, const BasisFrame& frame) {
    const Matrix overlap = hermitize(kets.adjoint() * frame.metric() * kets);
    const auto roots = herm_sqrt_pair(overlap);
    return kets * roots.second;
}

}  // namespace

StateBundle step(const PropagatorKind& kind, const StateBundle& bundle, const TimeModel& model,
                 int step_index) {
    kind.validate();
    const double t = bundle.time;
    const double dt = kind.dt;
    const BasisFrame& frame0 = bundle.frame;
    const Matrix& s0 = frame0.metric();
    const Matrix h0 = model.hamiltonian_matrix(t, frame0);

    StateBundle out;
    out.time = t + dt;

    switch (kind.tag) {
        case PropagatorTag::cn_fixed: {
            out.frame = frame0;  // frame deliberately frozen
            out.kets = cn_core(s0, h0, dt) * bundle.kets;
            return out;
        }
        case PropagatorTag::cn_moving_naive: {
            const Matrix d_t = model.d_lower_time(t, frame0);
            const Matrix h_eff = h0 - Complex(0.0, 1.0) * d_t;
            out.frame = model.frame_at(t + dt);
            out.kets = cn_core(s0, h_eff, dt) * bundle.kets;
            return out;
        }
        case PropagatorTag::cn_moving_gauge:
        case PropagatorTag::cn_unitary_gauge: {
            out.frame = model.frame_at(t + dt);
            const Matrix cross = out.frame.vectors().adjoint() * frame0.vectors();
            out.kets = out.frame.inv_metric() * (cross * (cn_core(s0, h0, dt) * bundle.kets));
            break;
        }
        case PropagatorTag::cn_moving_sc:
        case PropagatorTag::cn_unitary_sc: {
            out.frame = model.frame_at(t + dt);
            const Matrix cross = out.frame.vectors().adjoint() * frame0.vectors();
            const Matrix rhs_half =
                cross * (bundle.kets - Complex(0.0, 0.5 * dt) * (frame0.inv_metric() *
                                                                 (h0 * bundle.kets)));
            // Fixed-point iteration on the t+dt quantities. With an explicitly
            // time-dependent Hamiltonian the map does not depend on the
            // iterate, so convergence is checked rather than assumed.
            Matrix prev = bundle.kets;
            double resid = 0.0;
            bool converged = false;
            for (int it = 1; it <= kind.sc_max_iter; ++it) {
                const Matrix h1 = model.hamiltonian_matrix(t + dt, out.frame);
                const Matrix plus =
                    out.frame.metric() + Complex(0.0, 0.5 * dt) * h1;
                const Matrix next = plus.partialPivLu().solve(rhs_half);
                resid = inf_norm(Matrix(next - prev));
                prev = next;
                if (it > 1 && resid < kind.sc_tol) {
                    converged = true;
                    break;
                }
            }
            if (!converged)
                throw ScNotConverged("self-consistent step did not converge", kind.sc_max_iter,
                                     resid);
            out.kets = prev;
            break;
        }
        case PropagatorTag::lowdin: {
            out.frame = model.frame_at(t + dt);
            const Matrix root0 = herm_sqrt_pair(s0).first;
            const Matrix inv_root1 = herm_sqrt_pair(out.frame.metric()).second;
            out.kets = inv_root1 * (root0 * (cn_core(s0, h0, dt) * bundle.kets));
            return out;
        }
    }

    const bool unitary_variant =
        kind.tag == PropagatorTag::cn_unitary_gauge || kind.tag == PropagatorTag::cn_unitary_sc;
    if (unitary_variant) {
        const bool due = (step_index % kind.ortho_interval) == 0;
        if (due || out.orthonormality_deviation() > kind.ortho_tol)
            out.kets = state_orthonormalize(out.kets, out.frame);
    }
    return out;
}

Matrix g_tensor(const TimeModel& model, double t, double dt_fd) {
    const Matrix s_mid = model.frame_at(t).metric();
    const Matrix s_fwd = model.frame_at(t + dt_fd).metric();
    const Matrix s_bwd = model.frame_at(t - dt_fd).metric();
    const Matrix d_inv_root =
        (herm_sqrt_pair(s_fwd).second - herm_sqrt_pair(s_bwd).second) / (2.0 * dt_fd);
    return -d_inv_root * herm_sqrt_pair(s_mid).first;
}

Matrix g_tensor(const BasisFamily& family, double t, double dt_fd) {
    if (family.n_params() != 1)
        throw DimensionMismatch("g_tensor expects a one-parameter (time) family");
    auto fam = std::shared_ptr<const BasisFamily>(&family, [](const BasisFamily*) {});
    TimeModel model(fam, zero_hamiltonian());
    return g_tensor(model, t, dt_fd);
}

DGReport compare_D_vs_G(const BasisFamily& family, double t, double dt_fd) {
    if (family.n_params() != 1)
        throw DimensionMismatch("compare_D_vs_G expects a one-parameter (time) family");
    RealVector r(1);
    r[0] = t;
    const BasisFrame frame = evaluate_frame(family, r);
    const DerivScheme scheme = family.has_analytic_derivatives()
                                   ? DerivScheme::analytic()
                                   : DerivScheme::central_fd(dt_fd);
    const ChristoffelSet chris = christoffel(frame, frame_derivatives(family, r, scheme));

    DGReport report;
    report.d_natural = chris.ud_right(0);
    report.g_natural = g_tensor(family, t, dt_fd);
    const Matrix diff = report.d_natural - report.g_natural;
    report.max_diff = inf_norm(diff);
    const Matrix diff_lower = frame.metric() * diff;
    report.rotation_norm = 0.5 * (diff_lower - diff_lower.adjoint()).norm();
    report.deformation_norm = 0.5 * (diff_lower + diff_lower.adjoint()).norm();
    return report;
}

DensityTensor liouville_step(const DensityTensor& rho, const PropagatorKind& kind,
                             const TimeModel& model, double t) {
    if (kind.tag == PropagatorTag::cn_unitary_gauge || kind.tag == PropagatorTag::cn_unitary_sc)
        throw RepMismatch("state re-orthonormalization has no density-matrix analogue");
    if (rho.rho.rows() != rho.rho.cols()) throw DimensionMismatch("density matrix must be square");

    // Reuse the wavefunction step on the identity columns to extract the
    // coefficient propagator W of this kind.
    StateBundle probe;
    probe.time = t;
    probe.frame = model.frame_at(t);
    if (rho.rho.rows() != probe.frame.dim())
        throw DimensionMismatch("density matrix does not match frame dimension");
    probe.kets = Matrix::Identity(probe.frame.dim(), probe.frame.dim());
    const StateBundle stepped = step(kind, probe, model, 1);
    const Matrix& w = stepped.kets;

    DensityTensor out;
    out.rep = rho.rep;
    if (rho.rep == DensityRep::natural) {
        const Matrix w_inv = w.partialPivLu().inverse();
        out.rho = w * rho.rho * w_inv;
    } else {
        out.rho = w * rho.rho * w.adjoint();
    }
    return out;
}

ObservableLog run_trajectory(const PropagatorKind& kind, const StateBundle& start,
                             const TimeModel& model, int n_steps) {
    if (n_steps < 1) throw Error("trajectory needs at least one step");
    kind.validate();

    ObservableLog log;
    log.n_states = start.n_states();
    log.n_params = model.family().n_params();
    log.dt = kind.dt;
    log.kind = propagator_tag_name(kind.tag);
    log.rows.reserve(static_cast<size_t>(n_steps));

    StateBundle bundle = start;
    for (int k = 1; k <= n_steps; ++k) {
        bundle = step(kind, bundle, model, k);

        ObservableRow row;
        row.step = k;
        row.time = bundle.time;
        const Matrix overlap = bundle.state_overlap();
        const Matrix h = model.hamiltonian_matrix(bundle.time, bundle.frame);
        row.norms.resize(static_cast<size_t>(log.n_states));
        row.energies.resize(static_cast<size_t>(log.n_states));
        for (int n = 0; n < log.n_states; ++n) {
            row.norms[static_cast<size_t>(n)] = overlap(n, n).real();
            const Vector psi = bundle.kets.col(n);
            row.energies[static_cast<size_t>(n)] = (psi.adjoint() * h * psi)(0, 0).real();
        }
        row.ortho_dev = inf_norm(
            Matrix(overlap - Matrix::Identity(log.n_states, log.n_states)));
        row.berry = berry_connection_trace(model.christoffel_at(bundle.time));
        log.rows.push_back(std::move(row));
    }
    return log;
}

}  // namespace oblique
