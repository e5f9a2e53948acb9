#ifndef OBLIQUE_TESTS_SUPPORT_HPP
#define OBLIQUE_TESTS_SUPPORT_HPP

#include <Eigen/Eigenvalues>
#include <random>

#include "oblique/basis.hpp"
#include "oblique/tensor_core.hpp"
#include "oblique/types.hpp"

namespace oblique::testing {

inline std::mt19937_64 rng(std::uint64_t seed = 42) { return std::mt19937_64(seed); }

inline Vector random_ket(std::mt19937_64& gen, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = Complex(g(gen), g(gen));
    return v;
}

inline Matrix random_matrix(std::mt19937_64& gen, int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b) m(a, b) = Complex(g(gen), g(gen));
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& gen, int n) {
    const Matrix m = random_matrix(gen, n, n);
    return hermitize(m);
}

inline Matrix random_hermitian_pd(std::mt19937_64& gen, int n) {
    const Matrix m = random_matrix(gen, n, n);
    return Matrix(m.adjoint() * m + 0.5 * Matrix::Identity(n, n));
}

/// Oracle: exp(-i H t) for Hermitian H via eigendecomposition, independent of
/// any propagator code path.
inline Matrix expm_minus_i_hermitian(const Matrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases[k] = std::polar(1.0, -es.eigenvalues()(k) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Smooth complex vector field psi(R) = a + b_i R^i + c_ij R^i R^j with
/// analytic first derivatives, for chain-rule and tensoriality checks.
struct VectorField {
    Vector a;
    std::vector<Vector> b;               // P entries
    std::vector<std::vector<Vector>> c;  // P x P entries

    static VectorField random(std::mt19937_64& gen, int n, int p) {
        VectorField f;
        f.a = random_ket(gen, n);
        f.b.resize(static_cast<size_t>(p));
        f.c.assign(static_cast<size_t>(p), std::vector<Vector>(static_cast<size_t>(p)));
        for (int i = 0; i < p; ++i) {
            f.b[static_cast<size_t>(i)] = 0.5 * random_ket(gen, n);
            for (int j = 0; j < p; ++j)
                f.c[static_cast<size_t>(i)][static_cast<size_t>(j)] = 0.25 * random_ket(gen, n);
        }
        return f;
    }

    Vector value(const RealVector& r) const {
        Vector v = a;
        const int p = static_cast<int>(b.size());
        for (int i = 0; i < p; ++i) {
            v += r[i] * b[static_cast<size_t>(i)];
            for (int j = 0; j < p; ++j)
                v += r[i] * r[j] * c[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
        return v;
    }

    Vector deriv(int i, const RealVector& r) const {
        Vector v = b[static_cast<size_t>(i)];
        const int p = static_cast<int>(b.size());
        for (int j = 0; j < p; ++j)
            v += r[j] * (c[static_cast<size_t>(i)][static_cast<size_t>(j)] +
                         c[static_cast<size_t>(j)][static_cast<size_t>(i)]);
        return v;
    }
};

/// Same construction for operator-valued fields H(R).
struct OperatorField {
    Matrix a;
    std::vector<Matrix> b;

    static OperatorField random(std::mt19937_64& gen, int n, int p) {
        OperatorField f;
        f.a = random_matrix(gen, n, n);
        for (int i = 0; i < p; ++i) f.b.push_back(0.5 * random_matrix(gen, n, n));
        return f;
    }

    Matrix value(const RealVector& r) const {
        Matrix m = a;
        for (size_t i = 0; i < b.size(); ++i) m += r[static_cast<Eigen::Index>(i)] * b[i];
        return m;
    }

    Matrix deriv(int i, const RealVector&) const { return b[static_cast<size_t>(i)]; }
};

/// Components of the projected field P_Omega(R) |v0> in the family's frame,
/// psi^mu(R) = [S^{-1} E^dag v0]^mu, with its analytic parameter derivatives.
/// The same ambient field expressed in two gauge-related frames is the
/// canonical tensoriality probe.
struct ProjectedField {
    const BasisFamily& family;
    AmbientVector v0;

    Vector value(const RealVector& r) const {
        const BasisFrame f = evaluate_frame(family, r);
        return f.inv_metric() * (f.vectors().adjoint() * v0);
    }

    /// d_i psi via d_i S^{-1} = -S^{-1} (d_i S) S^{-1} and d_i E.
    Matrix derivs(const RealVector& r) const {
        const BasisFrame f = evaluate_frame(family, r);
        const auto d = frame_derivatives(family, r, DerivScheme::analytic());
        const Matrix& e = f.vectors();
        const Matrix& sinv = f.inv_metric();
        const Vector proj = e.adjoint() * v0;
        Matrix out(f.dim(), family.n_params());
        for (int i = 0; i < family.n_params(); ++i) {
            const Matrix& de = d.d_vectors[static_cast<size_t>(i)];
            const Matrix ds = de.adjoint() * e + e.adjoint() * de;
            out.col(i) = -sinv * ds * (sinv * proj) + sinv * (de.adjoint() * v0);
        }
        return out;
    }
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return inf_norm(Matrix(a - b));
}
inline double max_abs_diff(const Vector& a, const Vector& b) {
    return inf_norm(Vector(a - b));
}

}  // namespace oblique::testing

#endif
