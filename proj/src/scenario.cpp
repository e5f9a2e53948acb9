#include "oblique/scenario.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "oblique/connection.hpp"
#include "oblique/curvature.hpp"
#include "oblique/forces.hpp"

namespace oblique {

using nlohmann::json;

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("fit needs at least two samples");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw Error("log-log fit needs positive samples");
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double cov = sxy - sx * sy / n;
    const double varx = sxx - sx * sx / n;
    const double vary = syy - sy * sy / n;
    FitResult fit;
    fit.order = cov / varx;
    fit.r_squared = vary > 0.0 ? (cov * cov) / (varx * vary) : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
    throw ConfigParseError("config error at '" + where + "': " + what);
}

double get_number(const json& j, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        bad_field(where + "." + key, "missing required number");
    }
    if (!j.at(key).is_number()) bad_field(where + "." + key, "expected a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& where,
            std::optional<int> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        bad_field(where + "." + key, "missing required integer");
    }
    if (!j.at(key).is_number_integer()) bad_field(where + "." + key, "expected an integer");
    return j.at(key).get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        bad_field(where + "." + key, "missing required string");
    }
    if (!j.at(key).is_string()) bad_field(where + "." + key, "expected a string");
    return j.at(key).get<std::string>();
}

ScalarLaw law_from_json(const json& j, const std::string& where) {
    ScalarLaw law;
    if (j.is_number()) {
        law.c0 = j.get<double>();
        return law;
    }
    if (!j.is_object()) bad_field(where, "expected a number or a law object");
    law.c0 = get_number(j, "const", where, 0.0);
    law.c1 = get_number(j, "slope", where, 0.0);
    law.c2 = get_number(j, "quad", where, 0.0);
    law.amp = get_number(j, "amp", where, 0.0);
    law.omega = get_number(j, "omega", where, 0.0);
    law.phase = get_number(j, "phase", where, 0.0);
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "const" && it.key() != "slope" && it.key() != "quad" &&
            it.key() != "amp" && it.key() != "omega" && it.key() != "phase")
            bad_field(where + "." + it.key(), "unknown law field");
    return law;
}

std::shared_ptr<BasisFamily> family_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) bad_field(where, "expected a family object");
    const std::string kind = get_string(j, "kind", where);
    if (kind == "rotating2d") {
        const ScalarLaw theta = j.contains("theta")
                                    ? law_from_json(j.at("theta"), where + ".theta")
                                    : ScalarLaw::linear(0.0, 1.0);
        const int m = get_int(j, "ambient_dim", where, 2);
        return std::make_shared<Rotating2D>(theta, m);
    }
    if (kind == "breathing2d") {
        const ScalarLaw a1 = j.contains("alpha1")
                                 ? law_from_json(j.at("alpha1"), where + ".alpha1")
                                 : ScalarLaw::linear(1.0, 0.1);
        const ScalarLaw a2 = j.contains("alpha2")
                                 ? law_from_json(j.at("alpha2"), where + ".alpha2")
                                 : ScalarLaw::linear(1.0, -0.05);
        return std::make_shared<Breathing2D>(a1, a2);
    }
    if (kind == "overlap_pair_symmetric" || kind == "overlap_pair_pinned") {
        OverlapPair::Config cfg;
        if (j.contains("s")) cfg.s_law = law_from_json(j.at("s"), where + ".s");
        cfg.sigma = get_number(j, "sigma", where, 1.0);
        cfg.grid_points = get_int(j, "grid_points", where, 2048);
        cfg.s_min = get_number(j, "s_min", where, 0.05);
        cfg.pinned = (kind == "overlap_pair_pinned");
        return std::make_shared<OverlapPair>(cfg);
    }
    if (kind == "gaussian_chain") {
        GaussianChain::Config cfg;
        if (!j.contains("sigmas") || !j.at("sigmas").is_array())
            bad_field(where + ".sigmas", "expected an array of widths");
        cfg.sigmas = j.at("sigmas").get<std::vector<double>>();
        if (!j.contains("centers") || !j.at("centers").is_array())
            bad_field(where + ".centers", "expected an array of base centers");
        cfg.centers0 = j.at("centers").get<std::vector<double>>();
        if (!j.contains("motion") || !j.at("motion").is_array())
            bad_field(where + ".motion", "expected a matrix (array of arrays)");
        const auto rows = j.at("motion").get<std::vector<std::vector<double>>>();
        if (rows.empty() || rows.size() != cfg.sigmas.size())
            bad_field(where + ".motion", "row count must match the number of orbitals");
        cfg.motion = Eigen::MatrixXd(rows.size(), rows.front().size());
        for (size_t a = 0; a < rows.size(); ++a) {
            if (rows[a].size() != rows.front().size())
                bad_field(where + ".motion", "ragged matrix");
            for (size_t b = 0; b < rows[a].size(); ++b)
                cfg.motion(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    rows[a][b];
        }
        cfg.grid_points = get_int(j, "grid_points", where, 512);
        cfg.box_halfwidth = get_number(j, "box_halfwidth", where, 14.0);
        return std::make_shared<GaussianChain>(cfg);
    }
    if (kind == "two_level_sphere")
        return std::make_shared<TwoLevelSphere>(get_number(j, "field", where, 1.0));
    bad_field(where + ".kind", "unknown family kind '" + kind + "'");
}

Matrix complex_matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("re"))
        bad_field(where, "expected an object with 're' (and optional 'im') matrices");
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> im;
    if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
    const auto rows = re.size();
    if (rows == 0) bad_field(where + ".re", "empty matrix");
    const auto cols = re.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t a = 0; a < rows; ++a) {
        if (re[a].size() != cols || (!im.empty() && im[a].size() != cols))
            bad_field(where, "ragged matrix");
        for (size_t b = 0; b < cols; ++b)
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                Complex(re[a][b], im.empty() ? 0.0 : im[a][b]);
    }
    return m;
}

HamiltonianFn hamiltonian_from_json(const json& j, const std::string& where) {
    if (j.is_null()) return zero_hamiltonian();
    const std::string type = get_string(j, "type", where);
    if (type == "zero") return zero_hamiltonian();
    if (type == "matrix") return constant_matrix_hamiltonian(complex_matrix_from_json(j, where));
    if (type == "ambient")
        return projected_ambient_hamiltonian(complex_matrix_from_json(j, where));
    bad_field(where + ".type", "unknown Hamiltonian type '" + type + "'");
}

RealVector point_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) bad_field(where, "expected a nonempty array");
    RealVector r(static_cast<Eigen::Index>(j.size()));
    for (size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) bad_field(where, "expected numbers");
        r[static_cast<Eigen::Index>(k)] = j[k].get<double>();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string resolve_output_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    if (const char* dir = std::getenv("OBLIQUE_OUTPUT_DIR"))
        return (std::filesystem::path(dir) / p).string();
    return path;
}

std::ofstream open_output(const std::string& raw_path) {
    const std::string path = resolve_output_path(raw_path);
    if (std::filesystem::exists(path))
        std::cerr << "warning: overwriting existing output file " << path << "\n";
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open output file " + path);
    return out;
}

}  // namespace

ScalarLaw law_from_json_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("invalid JSON: ") + e.what());
    }
    return law_from_json(j, "law");
}

std::shared_ptr<BasisFamily> family_from_json_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("invalid JSON: ") + e.what());
    }
    return family_from_json(j, "family");
}

void emit_csv(const ObservableLog& log, const std::string& path) {
    if (log.rows.empty()) throw Error("refusing to emit an empty log");
    std::ofstream out = open_output(path);
    out << "step,time";
    for (int n = 1; n <= log.n_states; ++n) out << ",norm_" << n;
    for (int n = 1; n <= log.n_states; ++n) out << ",energy_" << n;
    out << ",ortho_dev";
    for (int i = 1; i <= log.n_params; ++i) out << ",berry_re_" << i;
    for (int i = 1; i <= log.n_params; ++i) out << ",berry_im_" << i;
    out << "\n";
    for (const auto& row : log.rows) {
        out << row.step << ',' << fmt_double(row.time);
        for (double v : row.norms) out << ',' << fmt_double(v);
        for (double v : row.energies) out << ',' << fmt_double(v);
        out << ',' << fmt_double(row.ortho_dev);
        for (const auto& b : row.berry) out << ',' << fmt_double(b.real());
        for (const auto& b : row.berry) out << ',' << fmt_double(b.imag());
        out << "\n";
    }
    if (!out) throw IoError("failed while writing " + path);
}

void emit_json(const ObservableLog& log, const std::string& path,
               const std::optional<FitResult>& fit, std::uint64_t seed) {
    if (log.rows.empty()) throw Error("refusing to emit an empty log");
    json j;
    j["kind"] = log.kind;
    j["dt"] = log.dt;
    j["n_states"] = log.n_states;
    j["n_params"] = log.n_params;
    j["seed"] = seed;
    j["n_steps"] = log.rows.size();
    j["final_ortho_dev"] = log.rows.back().ortho_dev;
    if (fit) {
        j["fitted_order"] = fit->order;
        j["r_squared"] = fit->r_squared;
    }
    json rows = json::array();
    for (const auto& row : log.rows) {
        json r;
        r["step"] = row.step;
        r["time"] = row.time;
        r["norms"] = row.norms;
        r["energies"] = row.energies;
        r["ortho_dev"] = row.ortho_dev;
        json berry = json::array();
        for (const auto& b : row.berry) berry.push_back({b.real(), b.imag()});
        r["berry"] = berry;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// Verification sweep
// ---------------------------------------------------------------------------

VerifySummary verify_family_identities(const BasisFamily& family, int points,
                                       std::uint64_t seed, double tol_analytic, double tol_fd,
                                       double fd_step, par::Execution ex) {
    if (points < 1) throw Error("verification needs at least one point");
    std::mt19937_64 rng(seed);
    std::vector<RealVector> rs;
    rs.reserve(static_cast<size_t>(points));
    for (int k = 0; k < points; ++k) rs.push_back(sample_domain_point(family, rng));

    const bool analytic = family.has_analytic_derivatives();
    struct PointResult {
        double analytic = 0.0;
        double fd = 0.0;
    };
    const auto results = par::map<PointResult>(
        rs.size(),
        [&](std::size_t k) {
            PointResult pr;
            const BasisFrame frame = evaluate_frame(family, rs[k]);
            if (analytic) {
                const auto derivs =
                    frame_derivatives(family, rs[k], DerivScheme::analytic());
                pr.analytic =
                    verify_connection_identities(christoffel(frame, derivs), frame, derivs)
                        .worst();
            }
            const auto fd = frame_derivatives(family, rs[k], DerivScheme::central_fd(fd_step));
            pr.fd = verify_connection_identities(christoffel(frame, fd), frame, fd).worst();
            return pr;
        },
        ex);

    VerifySummary summary;
    summary.family = family.kind_name();
    summary.points = points;
    summary.seed = seed;
    summary.tolerance_analytic = tol_analytic;
    summary.tolerance_fd = tol_fd;
    for (const auto& pr : results) {
        summary.worst_analytic = std::max(summary.worst_analytic, pr.analytic);
        summary.worst_fd = std::max(summary.worst_fd, pr.fd);
    }
    summary.passed = (!analytic || summary.worst_analytic < tol_analytic) &&
                     summary.worst_fd < tol_fd;
    return summary;
}

// ---------------------------------------------------------------------------
// Task runners
// ---------------------------------------------------------------------------

namespace {

struct TaskContext {
    json scenario;
    std::string where;
    std::uint64_t seed = 42;
    par::Execution ex = par::Execution::serial;
};

void maybe_write_json(const TaskContext& ctx, const json& payload) {
    if (!ctx.scenario.contains("output")) return;
    const auto& out = ctx.scenario.at("output");
    const std::string path = get_string(out, "path", ctx.where + ".output");
    const std::string format = get_string(out, "format", ctx.where + ".output", "json");
    if (format != "json")
        bad_field(ctx.where + ".output.format", "this task only emits json");
    std::ofstream os = open_output(path);
    os << payload.dump(2) << "\n";
}

Matrix initial_states(const BasisFrame& frame, int k) {
    if (k < 1 || k > frame.dim()) throw ConfigParseError("invalid state count");
    Matrix kets = Matrix::Identity(frame.dim(), k);
    const Matrix overlap = hermitize(kets.adjoint() * frame.metric() * kets);
    return kets * herm_sqrt_pair(overlap).second;
}

ScenarioOutcome run_verify_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    const int points = get_int(ctx.scenario, "points", ctx.where, 20);
    const double tol_a = get_number(ctx.scenario, "tolerance_analytic", ctx.where, 1e-10);
    const double tol_fd = get_number(ctx.scenario, "tolerance_fd", ctx.where, 1e-6);
    const double h = get_number(ctx.scenario, "fd_step", ctx.where, 1e-4);

    const VerifySummary s =
        verify_family_identities(*family, points, ctx.seed, tol_a, tol_fd, h, ctx.ex);

    json payload;
    payload["family"] = s.family;
    payload["points"] = s.points;
    payload["seed"] = s.seed;
    payload["worst_analytic"] = s.worst_analytic;
    payload["worst_fd"] = s.worst_fd;
    payload["tolerance_analytic"] = s.tolerance_analytic;
    payload["tolerance_fd"] = s.tolerance_fd;
    payload["passed"] = s.passed;
    maybe_write_json(ctx, payload);

    std::ostringstream detail;
    detail << "worst analytic " << s.worst_analytic << " (tol " << tol_a << "), worst fd "
           << s.worst_fd << " (tol " << tol_fd << ")";
    return {get_string(ctx.scenario, "name", ctx.where), s.passed, detail.str()};
}

ScenarioOutcome run_propagate_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    PropagatorKind kind;
    kind.tag = propagator_tag_from_name(get_string(ctx.scenario, "kind", ctx.where));
    kind.dt = get_number(ctx.scenario, "dt", ctx.where);
    if (!(kind.dt > 0.0)) bad_field(ctx.where + ".dt", "dt must be positive");
    kind.sc_tol = get_number(ctx.scenario, "sc_tol", ctx.where, 1e-12);
    kind.sc_max_iter = get_int(ctx.scenario, "sc_max_iter", ctx.where, 25);
    const int n_steps = get_int(ctx.scenario, "n_steps", ctx.where);
    if (n_steps < 1) bad_field(ctx.where + ".n_steps", "n_steps must be >= 1");
    const int n_states = get_int(ctx.scenario, "states", ctx.where, 1);
    const double t0 = get_number(ctx.scenario, "t0", ctx.where, 0.0);

    HamiltonianFn h = hamiltonian_from_json(
        ctx.scenario.contains("hamiltonian") ? ctx.scenario.at("hamiltonian") : json(),
        ctx.where + ".hamiltonian");
    TimeModel model(family, std::move(h));
    StateBundle bundle = make_bundle(model, t0, initial_states(model.frame_at(t0), n_states));
    const ObservableLog log = run_trajectory(kind, bundle, model, n_steps);

    if (ctx.scenario.contains("output")) {
        const auto& out = ctx.scenario.at("output");
        const std::string path = get_string(out, "path", ctx.where + ".output");
        const std::string format = get_string(out, "format", ctx.where + ".output", "csv");
        if (format == "csv")
            emit_csv(log, path);
        else
            emit_json(log, path, std::nullopt, ctx.seed);
    }

    const double final_dev = log.rows.back().ortho_dev;
    bool passed = true;
    std::ostringstream detail;
    detail << n_steps << " steps of " << propagator_tag_name(kind.tag) << ", final |S-1| = "
           << final_dev;
    if (ctx.scenario.contains("ortho_gate")) {
        const double gate = get_number(ctx.scenario, "ortho_gate", ctx.where);
        passed = final_dev < gate;
        detail << " (gate " << gate << ")";
    }
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

ScenarioOutcome run_dt_sweep_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    PropagatorKind kind;
    kind.tag = propagator_tag_from_name(get_string(ctx.scenario, "kind", ctx.where));
    const double dt0 = get_number(ctx.scenario, "dt", ctx.where);
    if (!(dt0 > 0.0)) bad_field(ctx.where + ".dt", "dt must be positive");
    const int halvings = get_int(ctx.scenario, "halvings", ctx.where, 5);
    const int base_steps = get_int(ctx.scenario, "n_steps", ctx.where, 8);
    const int n_states = get_int(ctx.scenario, "states", ctx.where, 2);
    const double t0 = get_number(ctx.scenario, "t0", ctx.where, 0.0);

    HamiltonianFn h = hamiltonian_from_json(
        ctx.scenario.contains("hamiltonian") ? ctx.scenario.at("hamiltonian") : json(),
        ctx.where + ".hamiltonian");
    TimeModel model(family, std::move(h));

    struct Level {
        double dt;
        double metric;
    };
    const auto levels = par::map<Level>(
        static_cast<size_t>(halvings),
        [&](std::size_t lvl) {
            PropagatorKind k = kind;
            k.dt = dt0 / static_cast<double>(1 << lvl);
            const int steps = base_steps * (1 << lvl);
            StateBundle b =
                make_bundle(model, t0, initial_states(model.frame_at(t0), n_states));
            const ObservableLog log = run_trajectory(k, b, model, steps);
            return Level{k.dt, log.rows.back().ortho_dev / steps};
        },
        ctx.ex);

    std::vector<double> dts, errs;
    for (const auto& l : levels) {
        dts.push_back(l.dt);
        errs.push_back(std::max(l.metric, 1e-300));
    }
    const FitResult fit = fit_loglog(dts, errs);

    json payload;
    payload["kind"] = propagator_tag_name(kind.tag);
    payload["seed"] = ctx.seed;
    payload["fitted_order"] = fit.order;
    payload["r_squared"] = fit.r_squared;
    json lv = json::array();
    for (const auto& l : levels) lv.push_back({{"dt", l.dt}, {"per_step_ortho_dev", l.metric}});
    payload["levels"] = std::move(lv);
    maybe_write_json(ctx, payload);

    bool passed = true;
    std::ostringstream detail;
    detail << "fitted order " << fit.order << " (r^2 " << fit.r_squared << ")";
    if (ctx.scenario.contains("min_order"))
        passed = fit.order >= get_number(ctx.scenario, "min_order", ctx.where) &&
                 fit.r_squared > get_number(ctx.scenario, "min_r_squared", ctx.where, 0.99);
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

ScenarioOutcome run_curvature_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    const RealVector r = point_from_json(ctx.scenario.at("point"), ctx.where + ".point");
    const double h = get_number(ctx.scenario, "fd_step", ctx.where, 1e-3);

    const CurvatureTensor curv = riemann(*family, r, DerivScheme::central_fd(h));
    const BasisFrame frame = evaluate_frame(*family, r);
    const auto derivs = frame_derivatives(
        *family, r,
        family->has_analytic_derivatives() ? DerivScheme::analytic()
                                           : DerivScheme::central_fd(h));
    const ChristoffelSet chris = christoffel(frame, derivs);

    StateKet psi{Vector::Ones(family->dim())};
    const double comm = commutator_check(*family, r, psi, h);

    json payload;
    payload["antisymmetry_defect"] = curv.antisymmetry_defect();
    payload["trace_cancellation"] = trace_cancellation_defect(chris);
    payload["commutator_residual"] = comm;
    maybe_write_json(ctx, payload);

    bool passed = true;
    if (ctx.scenario.contains("commutator_gate"))
        passed = comm < get_number(ctx.scenario, "commutator_gate", ctx.where);
    std::ostringstream detail;
    detail << "antisym " << curv.antisymmetry_defect() << ", trace-cancel "
           << trace_cancellation_defect(chris) << ", commutator " << comm;
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

ScenarioOutcome run_chern_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    const int n_theta = get_int(ctx.scenario, "n_theta", ctx.where, 64);
    const int n_phi = get_int(ctx.scenario, "n_phi", ctx.where, 128);
    const double tol = get_number(ctx.scenario, "tolerance", ctx.where, 1e-3);

    const double c = chern_number(*family, n_theta, n_phi, DerivScheme::analytic(), ctx.ex);
    const double nearest = std::round(c);
    const bool passed = std::abs(c - nearest) < tol && std::abs(nearest) >= 0.5;

    json payload;
    payload["chern"] = c;
    payload["nearest_integer"] = nearest;
    payload["tolerance"] = tol;
    payload["grid"] = {n_theta, n_phi};
    maybe_write_json(ctx, payload);

    std::ostringstream detail;
    detail << "chern = " << c;
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

std::unique_ptr<AmbientHamiltonian> grid_hamiltonian_from_json(const json& j,
                                                               const BasisFamily& family,
                                                               const std::string& where) {
    const std::string type = get_string(j, "type", where);
    if (type != "grid_well") bad_field(where + ".type", "forces task expects 'grid_well'");
    const double depth = get_number(j, "depth", where, 1.0);
    const double width = get_number(j, "width", where, 2.0);
    std::vector<double> gradients(static_cast<size_t>(family.n_params()), 0.0);
    if (j.contains("gradients")) gradients = j.at("gradients").get<std::vector<double>>();
    if (gradients.size() != static_cast<size_t>(family.n_params()))
        bad_field(where + ".gradients", "needs one entry per family parameter");

    const auto* chain = dynamic_cast<const GaussianChain*>(&family);
    const auto* pair = dynamic_cast<const OverlapPair*>(&family);
    if (!chain && !pair) bad_field(where, "forces task requires a grid family");
    const RealVector& x = chain ? chain->grid() : pair->grid();
    const double dx = chain ? chain->grid_step() : pair->grid_step();
    auto well = [depth, width](double xx) {
        return -depth * std::exp(-xx * xx / (2.0 * width * width));
    };
    auto v = [well, gradients](double xx, const RealVector& r) {
        double scale = 1.0;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            scale += gradients[static_cast<size_t>(i)] * r[i];
        return well(xx) * scale;
    };
    auto dv = [well, gradients](int i, double xx, const RealVector&) {
        return well(xx) * gradients[static_cast<size_t>(i)];
    };
    return std::make_unique<Grid1DHamiltonian>(x, dx, family.n_params(), v, dv);
}

ScenarioOutcome run_forces_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    const RealVector r = point_from_json(ctx.scenario.at("point"), ctx.where + ".point");
    const int state = get_int(ctx.scenario, "state", ctx.where, 0);
    const double tol_pair = get_number(ctx.scenario, "tolerance", ctx.where, 1e-8);
    const double fd_h = get_number(ctx.scenario, "fd_step", ctx.where, 1e-4);
    const double tol_fd = get_number(ctx.scenario, "fd_tolerance", ctx.where, 1e-5);

    auto ham = grid_hamiltonian_from_json(ctx.scenario.at("hamiltonian"), *family,
                                          ctx.where + ".hamiltonian");

    auto solve_at = [&](const RealVector& point) {
        const BasisFrame frame = evaluate_frame(*family, point);
        const Matrix h_mat =
            hermitize(frame.vectors().adjoint() * ham->apply(frame.vectors(), point));
        return solve_generalized_eigen(matrix_op(h_mat), frame);
    };
    const auto sols = solve_at(r);
    if (state < 0 || state >= static_cast<int>(sols.size()))
        bad_field(ctx.where + ".state", "state index out of range");
    const EigenSolution& sol = sols[static_cast<size_t>(state)];

    const RealVector g_nat =
        hf_derivative(sol, *family, r, *ham, HfFormula::natural_covariant);
    const RealVector g_raw = hf_derivative(sol, *family, r, *ham, HfFormula::matrix_raw);
    const RealVector g_cov = hf_derivative(sol, *family, r, *ham, HfFormula::matrix_covariant);
    const PulayDecomposition pulay = pulay_decomposition(sol, *family, r, *ham);

    double pair_defect = 0.0;
    pair_defect = std::max(pair_defect, (g_nat - g_raw).cwiseAbs().maxCoeff());
    pair_defect = std::max(pair_defect, (g_nat - g_cov).cwiseAbs().maxCoeff());
    pair_defect = std::max(pair_defect, (g_raw - g_cov).cwiseAbs().maxCoeff());
    pair_defect = std::max(pair_defect, (pulay.total() - g_nat).cwiseAbs().maxCoeff());

    double fd_defect = 0.0;
    for (int i = 0; i < family->n_params(); ++i) {
        RealVector fwd = r, bwd = r;
        fwd[i] += fd_h;
        bwd[i] -= fd_h;
        const double e_fd =
            (solve_at(fwd)[static_cast<size_t>(state)].energy -
             solve_at(bwd)[static_cast<size_t>(state)].energy) /
            (2.0 * fd_h);
        fd_defect = std::max(fd_defect, std::abs(e_fd - g_nat[i]));
    }

    json payload;
    payload["energy"] = sol.energy;
    payload["natural_covariant"] = std::vector<double>(g_nat.data(), g_nat.data() + g_nat.size());
    payload["matrix_raw"] = std::vector<double>(g_raw.data(), g_raw.data() + g_raw.size());
    payload["matrix_covariant"] =
        std::vector<double>(g_cov.data(), g_cov.data() + g_cov.size());
    payload["pair_defect"] = pair_defect;
    payload["fd_defect"] = fd_defect;
    maybe_write_json(ctx, payload);

    const bool passed = pair_defect < tol_pair && fd_defect < tol_fd;
    std::ostringstream detail;
    detail << "formula spread " << pair_defect << ", fd mismatch " << fd_defect;
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

ScenarioOutcome run_compare_dg_task(const TaskContext& ctx) {
    const auto family = family_from_json(ctx.scenario.at("family"), ctx.where + ".family");
    std::vector<double> times{0.0};
    if (ctx.scenario.contains("times"))
        times = ctx.scenario.at("times").get<std::vector<double>>();
    const double dt_fd = get_number(ctx.scenario, "fd_step", ctx.where, 1e-4);

    double worst = 0.0;
    json rows = json::array();
    for (double t : times) {
        const DGReport rep = compare_D_vs_G(*family, t, dt_fd);
        worst = std::max(worst, rep.max_diff);
        rows.push_back({{"t", t},
                        {"max_diff", rep.max_diff},
                        {"rotation_norm", rep.rotation_norm},
                        {"deformation_norm", rep.deformation_norm}});
    }
    json payload;
    payload["rows"] = std::move(rows);
    payload["worst_max_diff"] = worst;
    maybe_write_json(ctx, payload);

    bool passed = true;
    std::ostringstream detail;
    detail << "max |D - G| = " << worst;
    if (ctx.scenario.contains("tolerance")) {
        const double tol = get_number(ctx.scenario, "tolerance", ctx.where);
        passed = worst < tol;
        detail << " (tol " << tol << ")";
    }
    return {get_string(ctx.scenario, "name", ctx.where), passed, detail.str()};
}

ScenarioOutcome run_one_scenario(const TaskContext& ctx) {
    const std::string task = get_string(ctx.scenario, "task", ctx.where);
    if (!ctx.scenario.contains("family"))
        bad_field(ctx.where + ".family", "missing required family");
    if (task == "verify_identities") return run_verify_task(ctx);
    if (task == "propagate") return run_propagate_task(ctx);
    if (task == "dt_sweep") return run_dt_sweep_task(ctx);
    if (task == "curvature") return run_curvature_task(ctx);
    if (task == "chern") return run_chern_task(ctx);
    if (task == "forces") return run_forces_task(ctx);
    if (task == "compare_dg") return run_compare_dg_task(ctx);
    bad_field(ctx.where + ".task", "unknown task '" + task + "'");
}

}  // namespace

bool RunReport::all_passed() const {
    for (const auto& o : outcomes)
        if (!o.passed) return false;
    return !outcomes.empty();
}

RunReport run_config(const std::string& config_path, par::Execution ex, std::ostream* diag) {
    std::ifstream in(config_path);
    if (!in) throw ConfigParseError("cannot open config file " + config_path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("invalid JSON in ") + config_path + ": " + e.what());
    }
    if (!root.contains("scenarios") || !root.at("scenarios").is_array() ||
        root.at("scenarios").empty())
        bad_field("scenarios", "config needs a nonempty scenarios array");
    const auto seed = root.contains("seed") ? root.at("seed").get<std::uint64_t>() : 42u;

    RunReport report;
    int index = 0;
    for (const auto& sc : root.at("scenarios")) {
        TaskContext ctx;
        ctx.scenario = sc;
        ctx.where = "scenarios[" + std::to_string(index) + "]";
        ctx.seed = sc.contains("seed") ? sc.at("seed").get<std::uint64_t>() : seed;
        ctx.ex = ex;
        std::string name = sc.contains("name") && sc.at("name").is_string()
                               ? sc.at("name").get<std::string>()
                               : ctx.where;
        ScenarioOutcome outcome;
        try {
            if (!sc.contains("name")) bad_field(ctx.where + ".name", "missing scenario name");
            outcome = run_one_scenario(ctx);
        } catch (const ConfigParseError&) {
            throw;  // config-level problems abort the run with exit 2
        } catch (const std::exception& e) {
            outcome = {name, false, std::string("error: ") + e.what()};
        }
        if (diag)
            *diag << (outcome.passed ? "[pass] " : "[FAIL] ") << outcome.name << ": "
                  << outcome.detail << "\n";
        report.outcomes.push_back(std::move(outcome));
        ++index;
    }
    return report;
}

}  // namespace oblique
