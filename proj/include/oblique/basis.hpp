#ifndef OBLIQUE_BASIS_HPP
#define OBLIQUE_BASIS_HPP

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oblique/tensor_core.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Parameter-dependent basis families e_mu(R) and their derivatives.
//
// Model families realize the closed-form two-level frames (rotating pair,
// breathing pair, overlapping s-orbital pair), grid-realized Gaussian chains,
// and the lower band of a two-level system over the sphere. Adapters provide
// static frames and smooth GL(N,C) gauge mixes for transformation tests.
// ===========================================================================

/// Smooth scalar law of one variable:
///   value(t) = c0 + c1 t + c2 t^2 + amp * sin(omega t + phase)
struct ScalarLaw {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double amp = 0.0, omega = 0.0, phase = 0.0;

    double value(double t) const;
    double deriv(double t) const;
    double second(double t) const;

    static ScalarLaw constant(double v) { return {v, 0, 0, 0, 0, 0}; }
    static ScalarLaw linear(double v0, double rate) { return {v0, rate, 0, 0, 0, 0}; }
};

struct DerivScheme {
    enum class Kind { analytic, central_fd };
    Kind kind = Kind::analytic;
    double h = 1e-4;

    static DerivScheme analytic() { return {Kind::analytic, 0.0}; }
    static DerivScheme central_fd(double h = 1e-4) { return {Kind::central_fd, h}; }
};

struct FrameDerivatives {
    std::vector<Matrix> d_vectors;  // P matrices, M x N; column nu of [i] is d_i |e_nu>
    DerivScheme scheme;
};

class BasisFamily {
public:
    virtual ~BasisFamily() = default;

    virtual int ambient_dim() const = 0;
    virtual int dim() const = 0;       // N
    virtual int n_params() const = 0;  // P
    virtual std::string kind_name() const = 0;

    virtual bool in_domain(const RealVector& r) const = 0;

    /// Frame kets in ambient coordinates (M x N). Throws OutOfDomain.
    virtual Matrix frame_vectors(const RealVector& r) const = 0;

    virtual bool has_analytic_derivatives() const { return false; }
    virtual std::vector<Matrix> frame_vector_derivs(const RealVector& r) const;

    /// Mixed second derivatives d_i d_j |e_nu>, row-major over (i,j).
    virtual bool has_analytic_second_derivs() const { return false; }
    virtual std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const;
};

BasisFrame evaluate_frame(const BasisFamily& family, const RealVector& r);
FrameDerivatives frame_derivatives(const BasisFamily& family, const RealVector& r,
                                   const DerivScheme& scheme);

/// Second derivatives of the frame vectors, analytic when the family provides
/// them, otherwise central differences of first derivatives at step scheme.h.
std::vector<Matrix> frame_second_derivatives(const BasisFamily& family, const RealVector& r,
                                             const DerivScheme& scheme);

enum class GaugePlacement {
    natural,   // A^mu_nu (to:from) = <e^mu(to)|e_nu(from)>
    covariant  // A_mu_nu (to:from) = <e_mu(to)|e_nu(from)>
};

Matrix frame_gauge_overlap(const BasisFrame& to, const BasisFrame& from,
                           GaugePlacement placement);

/// Projection onto / out of the frame's spanned space, applied to an ambient
/// vector. project + complement_project reproduces v exactly.
AmbientVector project(const BasisFrame& frame, const AmbientVector& v);
AmbientVector complement_project(const BasisFrame& frame, const AmbientVector& v);

// ---------------------------------------------------------------------------
// Concrete families
// ---------------------------------------------------------------------------

/// Two orthonormal ambient directions rotating rigidly by theta(t). P = 1.
class Rotating2D : public BasisFamily {
public:
    explicit Rotating2D(ScalarLaw theta, int ambient_dim = 2);

    int ambient_dim() const override { return m_; }
    int dim() const override { return 2; }
    int n_params() const override { return 1; }
    std::string kind_name() const override { return "rotating2d"; }
    bool in_domain(const RealVector&) const override { return true; }
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override { return true; }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

    const ScalarLaw& theta_law() const { return theta_; }

private:
    ScalarLaw theta_;
    int m_;
};

/// Two fixed orthogonal directions whose norms follow alpha1(t), alpha2(t).
class Breathing2D : public BasisFamily {
public:
    Breathing2D(ScalarLaw alpha1, ScalarLaw alpha2);

    int ambient_dim() const override { return 2; }
    int dim() const override { return 2; }
    int n_params() const override { return 1; }
    std::string kind_name() const override { return "breathing2d"; }
    bool in_domain(const RealVector& r) const override;
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override { return true; }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

    const ScalarLaw& alpha1_law() const { return a1_; }
    const ScalarLaw& alpha2_law() const { return a2_; }

private:
    ScalarLaw a1_, a2_;
};

/// Two normalized 1-d Gaussians on a uniform grid whose mutual overlap
/// follows s(t). The separation is solved from the requested overlap, so the
/// connection tensors emerge from the grid geometry. Symmetric motion moves
/// both centers by +-d/2; pinned motion moves orbital 1 toward a fixed
/// orbital 2.
class OverlapPair : public BasisFamily {
public:
    struct Config {
        ScalarLaw s_law = ScalarLaw::constant(0.5);
        double sigma = 1.0;
        int grid_points = 2048;
        double s_min = 0.05;  // sets the box size
        bool pinned = false;
    };
    explicit OverlapPair(Config cfg);

    int ambient_dim() const override { return cfg_.grid_points; }
    int dim() const override { return 2; }
    int n_params() const override { return 1; }
    std::string kind_name() const override {
        return cfg_.pinned ? "overlap_pair_pinned" : "overlap_pair_symmetric";
    }
    bool in_domain(const RealVector& r) const override;
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;

    /// Grid overlap of the two normalized orbitals at separation d.
    double overlap_at_separation(double d) const;
    /// Separation solved so the grid overlap matches the law at time t.
    double separation_at(double t) const;
    const Config& config() const { return cfg_; }
    const RealVector& grid() const { return x_; }
    double grid_step() const { return x_[1] - x_[0]; }

private:
    void centers_at_separation(double d, double& c1, double& c2) const;
    Config cfg_;
    RealVector x_;  // grid nodes
    double box_halfwidth_ = 0.0;
};

/// N Gaussians on a grid with centers moving linearly in R. P arbitrary.
class GaussianChain : public BasisFamily {
public:
    struct Config {
        std::vector<double> sigmas;
        std::vector<double> centers0;
        Eigen::MatrixXd motion;  // N x P, c_k(R) = centers0_k + motion(k,i) R^i
        int grid_points = 512;
        double box_halfwidth = 12.0;
    };
    explicit GaussianChain(Config cfg);

    int ambient_dim() const override { return cfg_.grid_points; }
    int dim() const override { return static_cast<int>(cfg_.sigmas.size()); }
    int n_params() const override { return static_cast<int>(cfg_.motion.cols()); }
    std::string kind_name() const override { return "gaussian_chain"; }
    bool in_domain(const RealVector& r) const override;
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override { return true; }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

    const RealVector& grid() const { return x_; }
    double grid_step() const { return dx_; }
    std::vector<double> centers_at(const RealVector& r) const;

private:
    Config cfg_;
    RealVector x_;
    double dx_ = 0.0;
};

/// Lower eigenvector of H(theta, phi) = -B sigma.n_hat over the sphere,
/// N = 1, M = 2, P = 2 (theta, phi). Gauge fixed by keeping the first
/// component real and non-negative; the gauge is singular at theta = pi
/// (south pole), which is excluded from the domain.
class TwoLevelSphere : public BasisFamily {
public:
    explicit TwoLevelSphere(double field = 1.0) : field_(field) {}

    int ambient_dim() const override { return 2; }
    int dim() const override { return 1; }
    int n_params() const override { return 2; }
    std::string kind_name() const override { return "two_level_sphere"; }
    bool in_domain(const RealVector& r) const override;
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override { return true; }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

    double field() const { return field_; }

private:
    double field_;
};

/// Fixed frame vectors with a declared number of parameters (all derivatives
/// vanish). Useful as a base for gauge mixes and as a static reference.
class StaticFamily : public BasisFamily {
public:
    StaticFamily(Matrix vectors, int n_params);

    int ambient_dim() const override { return static_cast<int>(e0_.rows()); }
    int dim() const override { return static_cast<int>(e0_.cols()); }
    int n_params() const override { return p_; }
    std::string kind_name() const override { return "static"; }
    bool in_domain(const RealVector&) const override { return true; }
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return true; }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override { return true; }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

private:
    Matrix e0_;
    int p_;
};

/// Smooth GL(N,C)-valued field A(R) = B0 + sum_f B_f sin(k_f . R + phi_f).
struct MixField {
    struct Term {
        Matrix b;
        RealVector k;
        double phase = 0.0;
    };
    Matrix b0;
    std::vector<Term> terms;

    Matrix value(const RealVector& r) const;
    Matrix deriv(int i, const RealVector& r) const;
    Matrix second(int i, int j, const RealVector& r) const;

    /// Seeded random invertible field: ||A(R) - B0_scale I||_2 stays below 1,
    /// so the mix is invertible everywhere.
    static MixField random(std::mt19937_64& rng, int n, int p, double scale = 0.15,
                           int n_terms = 2);
};

/// Frame columns mixed by a parameter-dependent basis change:
/// |a_n(R)> = |e_mu(R)> A^mu_n(R).
class GaugeMixedFamily : public BasisFamily {
public:
    GaugeMixedFamily(std::shared_ptr<const BasisFamily> base, MixField mix);

    int ambient_dim() const override { return base_->ambient_dim(); }
    int dim() const override { return base_->dim(); }
    int n_params() const override { return base_->n_params(); }
    std::string kind_name() const override { return "gauge_mixed:" + base_->kind_name(); }
    bool in_domain(const RealVector& r) const override { return base_->in_domain(r); }
    Matrix frame_vectors(const RealVector& r) const override;
    bool has_analytic_derivatives() const override { return base_->has_analytic_derivatives(); }
    std::vector<Matrix> frame_vector_derivs(const RealVector& r) const override;
    bool has_analytic_second_derivs() const override {
        return base_->has_analytic_second_derivs();
    }
    std::vector<Matrix> frame_vector_second_derivs(const RealVector& r) const override;

    const MixField& mix() const { return mix_; }
    const BasisFamily& base() const { return *base_; }

private:
    std::shared_ptr<const BasisFamily> base_;
    MixField mix_;
};

/// Default family of each named kind, with a representative point sampler for
/// verification sweeps.
std::shared_ptr<BasisFamily> make_default_family(const std::string& kind);
RealVector sample_domain_point(const BasisFamily& family, std::mt19937_64& rng);

}  // namespace oblique

#endif
