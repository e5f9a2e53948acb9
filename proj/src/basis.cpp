#include "oblique/basis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace oblique {

double ScalarLaw::value(double t) const {
    return c0 + c1 * t + c2 * t * t + amp * std::sin(omega * t + phase);
}
double ScalarLaw::deriv(double t) const {
    return c1 + 2.0 * c2 * t + amp * omega * std::cos(omega * t + phase);
}
double ScalarLaw::second(double t) const {
    return 2.0 * c2 - amp * omega * omega * std::sin(omega * t + phase);
}

std::vector<Matrix> BasisFamily::frame_vector_derivs(const RealVector&) const {
    throw Error("family '" + kind_name() + "' has no analytic derivatives");
}
std::vector<Matrix> BasisFamily::frame_vector_second_derivs(const RealVector&) const {
    throw Error("family '" + kind_name() + "' has no analytic second derivatives");
}

BasisFrame evaluate_frame(const BasisFamily& family, const RealVector& r) {
    if (r.size() != family.n_params())
        throw DimensionMismatch("parameter point has wrong dimension");
    // frame_vectors reports the precise failure (OutOfDomain vs SingularFrame)
    return build_frame(family.frame_vectors(r), r);
}

FrameDerivatives frame_derivatives(const BasisFamily& family, const RealVector& r,
                                   const DerivScheme& scheme) {
    if (r.size() != family.n_params())
        throw DimensionMismatch("parameter point has wrong dimension");
    if (!family.in_domain(r))
        throw OutOfDomain("point outside the domain of family '" + family.kind_name() + "'");

    if (scheme.kind == DerivScheme::Kind::analytic)
        return {family.frame_vector_derivs(r), scheme};

    const int p = family.n_params();
    std::vector<Matrix> d(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
        RealVector fwd = r, bwd = r;
        fwd[i] += scheme.h;
        bwd[i] -= scheme.h;
        if (!family.in_domain(fwd) || !family.in_domain(bwd))
            throw OutOfDomain("central-difference stencil leaves the family domain");
        d[static_cast<size_t>(i)] =
            (family.frame_vectors(fwd) - family.frame_vectors(bwd)) / (2.0 * scheme.h);
    }
    return {std::move(d), scheme};
}

std::vector<Matrix> frame_second_derivatives(const BasisFamily& family, const RealVector& r,
                                             const DerivScheme& scheme) {
    const int p = family.n_params();
    if (scheme.kind == DerivScheme::Kind::analytic) {
        if (!family.has_analytic_second_derivs())
            throw Error("family '" + family.kind_name() +
                        "' has no analytic second derivatives");
        return family.frame_vector_second_derivs(r);
    }
    // Central differences of first derivatives (analytic when available).
    const DerivScheme inner = family.has_analytic_derivatives()
                                  ? DerivScheme::analytic()
                                  : DerivScheme::central_fd(scheme.h);
    std::vector<Matrix> out(static_cast<size_t>(p * p));
    for (int i = 0; i < p; ++i) {
        RealVector fwd = r, bwd = r;
        fwd[i] += scheme.h;
        bwd[i] -= scheme.h;
        if (!family.in_domain(fwd) || !family.in_domain(bwd))
            throw OutOfDomain("central-difference stencil leaves the family domain");
        const auto dplus = frame_derivatives(family, fwd, inner);
        const auto dminus = frame_derivatives(family, bwd, inner);
        for (int j = 0; j < p; ++j)
            out[static_cast<size_t>(i * p + j)] =
                (dplus.d_vectors[static_cast<size_t>(j)] -
                 dminus.d_vectors[static_cast<size_t>(j)]) /
                (2.0 * scheme.h);
    }
    return out;
}

Matrix frame_gauge_overlap(const BasisFrame& to, const BasisFrame& from,
                           GaugePlacement placement) {
    if (to.ambient_dim() != from.ambient_dim() || to.dim() != from.dim())
        throw DimensionMismatch("gauge overlap requires frames of equal shape");
    Matrix cross = to.vectors().adjoint() * from.vectors();
    if (placement == GaugePlacement::covariant) return cross;
    return to.inv_metric() * cross;
}

AmbientVector project(const BasisFrame& frame, const AmbientVector& v) {
    if (v.size() != frame.ambient_dim())
        throw DimensionMismatch("ambient vector length mismatch");
    return frame.vectors() * (frame.inv_metric() * (frame.vectors().adjoint() * v));
}

AmbientVector complement_project(const BasisFrame& frame, const AmbientVector& v) {
    return v - project(frame, v);
}

// ---------------------------------------------------------------------------
// Rotating pair
// ---------------------------------------------------------------------------

Rotating2D::Rotating2D(ScalarLaw theta, int ambient_dim) : theta_(theta), m_(ambient_dim) {
    if (m_ < 2) throw DimensionMismatch("rotating2d needs ambient dimension >= 2");
}

Matrix Rotating2D::frame_vectors(const RealVector& r) const {
    const double th = theta_.value(r[0]);
    Matrix e = Matrix::Zero(m_, 2);
    e(0, 0) = std::cos(th);
    e(1, 0) = std::sin(th);
    e(0, 1) = -std::sin(th);
    e(1, 1) = std::cos(th);
    return e;
}

std::vector<Matrix> Rotating2D::frame_vector_derivs(const RealVector& r) const {
    const double th = theta_.value(r[0]);
    const double w = theta_.deriv(r[0]);
    Matrix d = Matrix::Zero(m_, 2);
    d(0, 0) = -w * std::sin(th);
    d(1, 0) = w * std::cos(th);
    d(0, 1) = -w * std::cos(th);
    d(1, 1) = -w * std::sin(th);
    return {d};
}

std::vector<Matrix> Rotating2D::frame_vector_second_derivs(const RealVector& r) const {
    const double th = theta_.value(r[0]);
    const double w = theta_.deriv(r[0]);
    const double a = theta_.second(r[0]);
    const double c = std::cos(th), s = std::sin(th);
    Matrix d2 = Matrix::Zero(m_, 2);
    d2(0, 0) = -a * s - w * w * c;
    d2(1, 0) = a * c - w * w * s;
    d2(0, 1) = -a * c + w * w * s;
    d2(1, 1) = -a * s - w * w * c;
    return {d2};
}

// ---------------------------------------------------------------------------
// Breathing pair
// ---------------------------------------------------------------------------

Breathing2D::Breathing2D(ScalarLaw alpha1, ScalarLaw alpha2) : a1_(alpha1), a2_(alpha2) {}

bool Breathing2D::in_domain(const RealVector& r) const {
    return a1_.value(r[0]) > 1e-8 && a2_.value(r[0]) > 1e-8;
}

Matrix Breathing2D::frame_vectors(const RealVector& r) const {
    Matrix e = Matrix::Zero(2, 2);
    e(0, 0) = a1_.value(r[0]);
    e(1, 1) = a2_.value(r[0]);
    return e;
}

std::vector<Matrix> Breathing2D::frame_vector_derivs(const RealVector& r) const {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = a1_.deriv(r[0]);
    d(1, 1) = a2_.deriv(r[0]);
    return {d};
}

std::vector<Matrix> Breathing2D::frame_vector_second_derivs(const RealVector& r) const {
    Matrix d2 = Matrix::Zero(2, 2);
    d2(0, 0) = a1_.second(r[0]);
    d2(1, 1) = a2_.second(r[0]);
    return {d2};
}

// ---------------------------------------------------------------------------
// Grid Gaussians
// ---------------------------------------------------------------------------

namespace {

RealVector midpoint_grid(int m, double halfwidth) {
    RealVector x(m);
    const double dx = 2.0 * halfwidth / m;
    for (int k = 0; k < m; ++k) x[k] = -halfwidth + (k + 0.5) * dx;
    return x;
}

struct NormalizedGaussian {
    Eigen::VectorXd value;      // normalized samples
    Eigen::VectorXd d_center;   // derivative of the normalized samples w.r.t. center
    Eigen::VectorXd d2_center;  // second derivative of the normalized samples
};

NormalizedGaussian normalized_gaussian(const RealVector& x, double c, double sigma, int order) {
    const int m = static_cast<int>(x.size());
    Eigen::VectorXd g(m), gp(m), gpp(m);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int k = 0; k < m; ++k) {
        const double u = x[k] - c;
        const double gk = std::exp(-u * u * 0.5 * inv);
        g[k] = gk;
        if (order >= 1) gp[k] = gk * u * inv;
        if (order >= 2) gpp[k] = gk * (u * u * inv * inv - inv);
    }
    NormalizedGaussian out;
    const double n = g.norm();
    out.value = g / n;
    if (order >= 1) {
        const double np = g.dot(gp) / n;
        out.d_center = gp / n - g * (np / (n * n));
        if (order >= 2) {
            const double npp = (gp.squaredNorm() + g.dot(gpp) - np * np) / n;
            out.d2_center = gpp / n - 2.0 * gp * (np / (n * n)) - g * (npp / (n * n)) +
                            2.0 * g * (np * np / (n * n * n));
        }
    }
    return out;
}

}  // namespace

OverlapPair::OverlapPair(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.grid_points < 64) throw DimensionMismatch("overlap_pair grid too coarse");
    if (!(cfg_.s_min > 0.0 && cfg_.s_min < 1.0))
        throw OutOfDomain("overlap_pair s_min must lie in (0,1)");
    const double d_max = cfg_.sigma * std::sqrt(-8.0 * std::log(cfg_.s_min));
    box_halfwidth_ = (cfg_.pinned ? d_max : 0.5 * d_max) + 12.0 * cfg_.sigma;
    x_ = midpoint_grid(cfg_.grid_points, box_halfwidth_);
}

void OverlapPair::centers_at_separation(double d, double& c1, double& c2) const {
    if (cfg_.pinned) {
        c1 = -d;
        c2 = 0.0;
    } else {
        c1 = -0.5 * d;
        c2 = 0.5 * d;
    }
}

double OverlapPair::overlap_at_separation(double d) const {
    double c1, c2;
    centers_at_separation(d, c1, c2);
    const auto g1 = normalized_gaussian(x_, c1, cfg_.sigma, 0);
    const auto g2 = normalized_gaussian(x_, c2, cfg_.sigma, 0);
    return g1.value.dot(g2.value);
}

double OverlapPair::separation_at(double t) const {
    const double s_target = cfg_.s_law.value(t);
    if (s_target >= 1.0) throw SingularFrame("overlap_pair requested |s| >= 1");
    if (s_target < cfg_.s_min)
        throw OutOfDomain("overlap_pair law left the configured overlap range");

    // Newton from the continuum separation; the grid overlap is within
    // quadrature error of exp(-d^2 / 8 sigma^2), so this converges in a few
    // steps to well below the FD noise floor.
    double d = cfg_.sigma * std::sqrt(-8.0 * std::log(s_target));
    for (int iter = 0; iter < 60; ++iter) {
        double c1, c2;
        centers_at_separation(d, c1, c2);
        const auto g1 = normalized_gaussian(x_, c1, cfg_.sigma, 1);
        const auto g2 = normalized_gaussian(x_, c2, cfg_.sigma, 1);
        const double s = g1.value.dot(g2.value);
        const double resid = s - s_target;
        if (std::abs(resid) < 1e-14) return d;
        const double dc1 = cfg_.pinned ? -1.0 : -0.5;
        const double dc2 = cfg_.pinned ? 0.0 : 0.5;
        const double dsdd = dc1 * g1.d_center.dot(g2.value) + dc2 * g1.value.dot(g2.d_center);
        if (dsdd == 0.0) break;
        d -= resid / dsdd;
        if (!(d > 0.0)) d = 1e-6 * cfg_.sigma;
    }
    const double achieved = overlap_at_separation(d);
    if (std::abs(achieved - s_target) > 1e-8)
        throw Error("overlap_pair separation solve failed to converge");
    return d;
}

bool OverlapPair::in_domain(const RealVector& r) const {
    const double s = cfg_.s_law.value(r[0]);
    return s >= cfg_.s_min && s < 1.0;
}

Matrix OverlapPair::frame_vectors(const RealVector& r) const {
    if (!in_domain(r)) {
        const double s = cfg_.s_law.value(r[0]);
        if (s >= 1.0) throw SingularFrame("overlap_pair requested |s| >= 1");
        throw OutOfDomain("overlap_pair law left the configured overlap range");
    }
    const double d = separation_at(r[0]);
    double c1, c2;
    centers_at_separation(d, c1, c2);
    Matrix e(x_.size(), 2);
    e.col(0) = normalized_gaussian(x_, c1, cfg_.sigma, 0).value.cast<Complex>();
    e.col(1) = normalized_gaussian(x_, c2, cfg_.sigma, 0).value.cast<Complex>();
    return e;
}

std::vector<Matrix> OverlapPair::frame_vector_derivs(const RealVector& r) const {
    const double t = r[0];
    const double d = separation_at(t);
    double c1, c2;
    centers_at_separation(d, c1, c2);
    const auto g1 = normalized_gaussian(x_, c1, cfg_.sigma, 1);
    const auto g2 = normalized_gaussian(x_, c2, cfg_.sigma, 1);
    const double dc1 = cfg_.pinned ? -1.0 : -0.5;
    const double dc2 = cfg_.pinned ? 0.0 : 0.5;
    // Implicit derivative of the separation: s_grid(d(t)) = s_law(t).
    const double dsdd = dc1 * g1.d_center.dot(g2.value) + dc2 * g1.value.dot(g2.d_center);
    const double ddot = cfg_.s_law.deriv(t) / dsdd;
    Matrix dv(x_.size(), 2);
    dv.col(0) = (g1.d_center * (dc1 * ddot)).cast<Complex>();
    dv.col(1) = (g2.d_center * (dc2 * ddot)).cast<Complex>();
    return {dv};
}

GaussianChain::GaussianChain(Config cfg) : cfg_(std::move(cfg)) {
    const auto n = cfg_.sigmas.size();
    if (n == 0 || cfg_.centers0.size() != n ||
        cfg_.motion.rows() != static_cast<Eigen::Index>(n) || cfg_.motion.cols() < 1)
        throw DimensionMismatch("gaussian_chain configuration is inconsistent");
    if (cfg_.grid_points < 64) throw DimensionMismatch("gaussian_chain grid too coarse");
    dx_ = 2.0 * cfg_.box_halfwidth / cfg_.grid_points;
    x_ = midpoint_grid(cfg_.grid_points, cfg_.box_halfwidth);
}

std::vector<double> GaussianChain::centers_at(const RealVector& r) const {
    std::vector<double> c(static_cast<size_t>(dim()));
    for (int k = 0; k < dim(); ++k) {
        double ck = cfg_.centers0[static_cast<size_t>(k)];
        for (int i = 0; i < n_params(); ++i) ck += cfg_.motion(k, i) * r[i];
        c[static_cast<size_t>(k)] = ck;
    }
    return c;
}

bool GaussianChain::in_domain(const RealVector& r) const {
    const auto c = centers_at(r);
    for (int k = 0; k < dim(); ++k) {
        // keep amplitude at the box boundary below ~1e-12
        if (std::abs(c[static_cast<size_t>(k)]) + 10.6 * cfg_.sigmas[static_cast<size_t>(k)] >
            cfg_.box_halfwidth)
            return false;
    }
    return true;
}

Matrix GaussianChain::frame_vectors(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("gaussian_chain centers leave the grid box");
    const auto c = centers_at(r);
    Matrix e(x_.size(), dim());
    for (int k = 0; k < dim(); ++k)
        e.col(k) = normalized_gaussian(x_, c[static_cast<size_t>(k)],
                                       cfg_.sigmas[static_cast<size_t>(k)], 0)
                       .value.cast<Complex>();
    return e;
}

std::vector<Matrix> GaussianChain::frame_vector_derivs(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("gaussian_chain centers leave the grid box");
    const auto c = centers_at(r);
    std::vector<Matrix> d(static_cast<size_t>(n_params()),
                          Matrix::Zero(x_.size(), dim()));
    for (int k = 0; k < dim(); ++k) {
        const auto g = normalized_gaussian(x_, c[static_cast<size_t>(k)],
                                           cfg_.sigmas[static_cast<size_t>(k)], 1);
        for (int i = 0; i < n_params(); ++i)
            d[static_cast<size_t>(i)].col(k) = (g.d_center * cfg_.motion(k, i)).cast<Complex>();
    }
    return d;
}

std::vector<Matrix> GaussianChain::frame_vector_second_derivs(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("gaussian_chain centers leave the grid box");
    const auto c = centers_at(r);
    const int p = n_params();
    std::vector<Matrix> d2(static_cast<size_t>(p * p), Matrix::Zero(x_.size(), dim()));
    for (int k = 0; k < dim(); ++k) {
        const auto g = normalized_gaussian(x_, c[static_cast<size_t>(k)],
                                           cfg_.sigmas[static_cast<size_t>(k)], 2);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                d2[static_cast<size_t>(i * p + j)].col(k) =
                    (g.d2_center * (cfg_.motion(k, i) * cfg_.motion(k, j))).cast<Complex>();
    }
    return d2;
}

// ---------------------------------------------------------------------------
// Two-level sphere
// ---------------------------------------------------------------------------

bool TwoLevelSphere::in_domain(const RealVector& r) const {
    return r[0] > 0.0 && r[0] < M_PI;
}

Matrix TwoLevelSphere::frame_vectors(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("two_level_sphere: theta outside (0, pi)");
    const double th = r[0], ph = r[1];
    Matrix e(2, 1);
    e(0, 0) = std::cos(0.5 * th);
    e(1, 0) = std::polar(std::sin(0.5 * th), ph);
    return e;
}

std::vector<Matrix> TwoLevelSphere::frame_vector_derivs(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("two_level_sphere: theta outside (0, pi)");
    const double th = r[0], ph = r[1];
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    const Complex eip = std::polar(1.0, ph);
    Matrix dth(2, 1), dph(2, 1);
    dth(0, 0) = -0.5 * s;
    dth(1, 0) = 0.5 * c * eip;
    dph(0, 0) = 0.0;
    dph(1, 0) = Complex(0.0, 1.0) * s * eip;
    return {dth, dph};
}

std::vector<Matrix> TwoLevelSphere::frame_vector_second_derivs(const RealVector& r) const {
    if (!in_domain(r)) throw OutOfDomain("two_level_sphere: theta outside (0, pi)");
    const double th = r[0], ph = r[1];
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    const Complex eip = std::polar(1.0, ph);
    const Complex i1(0.0, 1.0);
    Matrix dthth(2, 1), dthph(2, 1), dphph(2, 1);
    dthth(0, 0) = -0.25 * c;
    dthth(1, 0) = -0.25 * s * eip;
    dthph(0, 0) = 0.0;
    dthph(1, 0) = 0.5 * c * i1 * eip;
    dphph(0, 0) = 0.0;
    dphph(1, 0) = -s * eip;
    return {dthth, dthph, dthph, dphph};
}

// ---------------------------------------------------------------------------
// Static frames and gauge mixes
// ---------------------------------------------------------------------------

StaticFamily::StaticFamily(Matrix vectors, int n_params)
    : e0_(std::move(vectors)), p_(n_params) {
    if (p_ < 1) throw DimensionMismatch("static family needs at least one parameter");
}

Matrix StaticFamily::frame_vectors(const RealVector&) const { return e0_; }

std::vector<Matrix> StaticFamily::frame_vector_derivs(const RealVector&) const {
    return std::vector<Matrix>(static_cast<size_t>(p_), Matrix::Zero(e0_.rows(), e0_.cols()));
}

std::vector<Matrix> StaticFamily::frame_vector_second_derivs(const RealVector&) const {
    return std::vector<Matrix>(static_cast<size_t>(p_ * p_),
                               Matrix::Zero(e0_.rows(), e0_.cols()));
}

Matrix MixField::value(const RealVector& r) const {
    Matrix a = b0;
    for (const auto& t : terms) a += t.b * std::sin(t.k.dot(r) + t.phase);
    return a;
}

Matrix MixField::deriv(int i, const RealVector& r) const {
    Matrix a = Matrix::Zero(b0.rows(), b0.cols());
    for (const auto& t : terms) a += t.b * (t.k[i] * std::cos(t.k.dot(r) + t.phase));
    return a;
}

Matrix MixField::second(int i, int j, const RealVector& r) const {
    Matrix a = Matrix::Zero(b0.rows(), b0.cols());
    for (const auto& t : terms) a -= t.b * (t.k[i] * t.k[j] * std::sin(t.k.dot(r) + t.phase));
    return a;
}

MixField MixField::random(std::mt19937_64& rng, int n, int p, double scale, int n_terms) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_unit_norm = [&](double target) {
        Matrix z(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) z(a, b) = Complex(gauss(rng), gauss(rng));
        const double op = z.jacobiSvd().singularValues()(0);
        return Matrix(z * (target / op));
    };
    MixField mix;
    mix.b0 = Matrix::Identity(n, n) + random_unit_norm(scale);
    for (int f = 0; f < n_terms; ++f) {
        MixField::Term term;
        term.b = random_unit_norm(scale);
        term.k = RealVector(p);
        for (int i = 0; i < p; ++i) term.k[i] = uni(rng);
        term.phase = M_PI * uni(rng);
        mix.terms.push_back(std::move(term));
    }
    return mix;
}

GaugeMixedFamily::GaugeMixedFamily(std::shared_ptr<const BasisFamily> base, MixField mix)
    : base_(std::move(base)), mix_(std::move(mix)) {
    if (mix_.b0.rows() != base_->dim() || mix_.b0.cols() != base_->dim())
        throw DimensionMismatch("mix field shape must match the frame dimension");
}

Matrix GaugeMixedFamily::frame_vectors(const RealVector& r) const {
    return base_->frame_vectors(r) * mix_.value(r);
}

std::vector<Matrix> GaugeMixedFamily::frame_vector_derivs(const RealVector& r) const {
    const Matrix e = base_->frame_vectors(r);
    const auto de = base_->frame_vector_derivs(r);
    const Matrix a = mix_.value(r);
    std::vector<Matrix> out(de.size());
    for (size_t i = 0; i < de.size(); ++i)
        out[i] = de[i] * a + e * mix_.deriv(static_cast<int>(i), r);
    return out;
}

std::vector<Matrix> GaugeMixedFamily::frame_vector_second_derivs(const RealVector& r) const {
    const int p = n_params();
    const Matrix e = base_->frame_vectors(r);
    const auto de = base_->frame_vector_derivs(r);
    const auto d2e = base_->frame_vector_second_derivs(r);
    const Matrix a = mix_.value(r);
    std::vector<Matrix> out(static_cast<size_t>(p * p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            out[static_cast<size_t>(i * p + j)] =
                d2e[static_cast<size_t>(i * p + j)] * a +
                de[static_cast<size_t>(i)] * mix_.deriv(j, r) +
                de[static_cast<size_t>(j)] * mix_.deriv(i, r) + e * mix_.second(i, j, r);
    return out;
}

// ---------------------------------------------------------------------------
// Defaults for verification sweeps
// ---------------------------------------------------------------------------

std::shared_ptr<BasisFamily> make_default_family(const std::string& kind) {
    if (kind == "rotating2d") return std::make_shared<Rotating2D>(ScalarLaw::linear(0.1, 0.7));
    if (kind == "breathing2d")
        return std::make_shared<Breathing2D>(ScalarLaw{1.0, 0.0, 0.0, 0.3, 0.9, 0.2},
                                             ScalarLaw{1.4, 0.0, 0.0, 0.2, 0.6, 1.1});
    if (kind == "overlap_pair_symmetric" || kind == "overlap_pair_pinned") {
        OverlapPair::Config cfg;
        cfg.s_law = ScalarLaw{0.5, 0.0, 0.0, 0.25, 0.8, 0.0};
        cfg.pinned = (kind == "overlap_pair_pinned");
        cfg.s_min = 0.1;
        return std::make_shared<OverlapPair>(cfg);
    }
    if (kind == "gaussian_chain") {
        GaussianChain::Config cfg;
        cfg.sigmas = {1.0, 0.8};
        cfg.centers0 = {-1.2, 1.0};
        cfg.motion = Eigen::MatrixXd(2, 2);
        cfg.motion << 0.6, -0.3, -0.4, 0.5;
        cfg.grid_points = 512;
        cfg.box_halfwidth = 16.0;
        return std::make_shared<GaussianChain>(cfg);
    }
    if (kind == "two_level_sphere") return std::make_shared<TwoLevelSphere>(1.0);
    throw ConfigParseError("unknown family kind '" + kind + "'");
}

RealVector sample_domain_point(const BasisFamily& family, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::string kind = family.kind_name();
    RealVector r(family.n_params());
    for (int attempt = 0; attempt < 256; ++attempt) {
        if (kind == "two_level_sphere") {
            r[0] = 0.15 + (M_PI - 0.3) * uni(rng);
            r[1] = 2.0 * M_PI * uni(rng);
        } else if (kind == "gaussian_chain") {
            for (int i = 0; i < r.size(); ++i) r[i] = 2.0 * uni(rng) - 1.0;
        } else {
            for (int i = 0; i < r.size(); ++i) r[i] = 2.0 * uni(rng) - 1.0;
        }
        const double margin = 2e-4;  // keep FD stencils inside the domain
        bool ok = family.in_domain(r);
        for (int i = 0; ok && i < r.size(); ++i) {
            RealVector fwd = r, bwd = r;
            fwd[i] += margin;
            bwd[i] -= margin;
            ok = family.in_domain(fwd) && family.in_domain(bwd);
        }
        if (ok) return r;
    }
    throw OutOfDomain("could not sample a point inside the family domain");
}

}  // namespace oblique
