#include "oblique/connection.hpp"

#include <algorithm>
#include <cmath>

namespace oblique {

ChristoffelSet::ChristoffelSet(BasisFrame frame, std::vector<Matrix> d_lower,
                               std::vector<Matrix> d_metric)
    : frame_(std::move(frame)), d_lower_(std::move(d_lower)), d_metric_(std::move(d_metric)) {
    if (d_lower_.empty() || d_lower_.size() != d_metric_.size())
        throw DimensionMismatch("inconsistent Christoffel data");
    for (const auto& m : d_lower_)
        if (m.rows() != frame_.dim() || m.cols() != frame_.dim())
            throw DimensionMismatch("Christoffel block shape mismatch");
}

Matrix ChristoffelSet::dd_mid(int i) const { return dd_right(i).adjoint(); }

Matrix ChristoffelSet::ud_right(int i) const { return frame_.inv_metric() * dd_right(i); }

Matrix ChristoffelSet::ud_mid(int i) const { return -ud_right(i); }

Matrix ChristoffelSet::d_metric_upper(int i) const {
    return -frame_.inv_metric() * d_metric_lower(i) * frame_.inv_metric();
}

Matrix ChristoffelSet::du_right(int i) const {
    // D_mu^nu_i = D_{mu sig i} S^{sig nu} + S_{mu sig} d_i S^{sig nu}
    return dd_right(i) * frame_.inv_metric() + frame_.metric() * d_metric_upper(i);
}

Matrix ChristoffelSet::du_mid(int i) const { return ud_right(i).adjoint(); }

Matrix ChristoffelSet::uu_right(int i) const { return frame_.inv_metric() * du_right(i); }

Matrix ChristoffelSet::uu_mid(int i) const { return uu_right(i).adjoint(); }

double ChristoffelSet::max_norm() const {
    double m = 0.0;
    for (const auto& d : d_lower_) m = std::max(m, inf_norm(d));
    return m;
}

ChristoffelSet christoffel(const BasisFrame& frame, const FrameDerivatives& derivs) {
    if (derivs.d_vectors.empty()) throw DimensionMismatch("no frame derivatives supplied");
    std::vector<Matrix> d_lower, d_metric;
    d_lower.reserve(derivs.d_vectors.size());
    d_metric.reserve(derivs.d_vectors.size());
    for (const auto& de : derivs.d_vectors) {
        if (de.rows() != frame.ambient_dim() || de.cols() != frame.dim())
            throw DimensionMismatch("frame derivatives inconsistent with frame");
        Matrix half = frame.vectors().adjoint() * de;  // D_{mu nu i}
        d_lower.push_back(half);
        d_metric.push_back(half.adjoint() + half);  // d_i S = D_{mu i nu} + D_{mu nu i}
    }
    return ChristoffelSet(frame, std::move(d_lower), std::move(d_metric));
}

std::vector<Matrix> dual_frame_derivs(const BasisFrame& frame, const FrameDerivatives& derivs) {
    const Matrix& sinv = frame.inv_metric();
    std::vector<Matrix> out;
    out.reserve(derivs.d_vectors.size());
    for (const auto& de : derivs.d_vectors) {
        const Matrix half = frame.vectors().adjoint() * de;
        const Matrix ds = half.adjoint() + half;
        const Matrix dsinv = -sinv * ds * sinv;
        out.push_back(de * sinv + frame.vectors() * dsinv);
    }
    return out;
}

Matrix covariant_derivative_ket(const Matrix& dpsi, const StateKet& psi,
                                const ChristoffelSet& chris) {
    const int n = chris.dim(), p = chris.n_params();
    if (psi.comps.size() != n || dpsi.rows() != n || dpsi.cols() != p)
        throw DimensionMismatch("covariant_derivative_ket shape mismatch");
    Matrix out(n, p);
    for (int i = 0; i < p; ++i) out.col(i) = dpsi.col(i) + chris.ud_right(i) * psi.comps;
    return out;
}

Matrix covariant_derivative_bra(const Matrix& dpsi_bar, const StateBra& psi_bar,
                                const ChristoffelSet& chris) {
    const int n = chris.dim(), p = chris.n_params();
    if (psi_bar.comps.size() != n || dpsi_bar.rows() != n || dpsi_bar.cols() != p)
        throw DimensionMismatch("covariant_derivative_bra shape mismatch");
    Matrix out(n, p);
    for (int i = 0; i < p; ++i)
        out.col(i) = dpsi_bar.col(i) - chris.ud_right(i).transpose() * psi_bar.comps;
    return out;
}

std::vector<Matrix> covariant_derivative_operator(const std::vector<Matrix>& dh,
                                                  const SecondRankOp& h,
                                                  const ChristoffelSet& chris, Rep rep) {
    if (h.rep != rep) throw RepMismatch("operator representation tag does not match");
    const int n = chris.dim(), p = chris.n_params();
    if (h.entries.rows() != n || h.entries.cols() != n ||
        dh.size() != static_cast<size_t>(p))
        throw DimensionMismatch("covariant_derivative_operator shape mismatch");
    std::vector<Matrix> out(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
        const Matrix& dhi = dh[static_cast<size_t>(i)];
        if (dhi.rows() != n || dhi.cols() != n)
            throw DimensionMismatch("operator derivative shape mismatch");
        if (rep == Rep::natural) {
            const Matrix d = chris.ud_right(i);
            out[static_cast<size_t>(i)] = dhi + d * h.entries - h.entries * d;
        } else {
            out[static_cast<size_t>(i)] =
                dhi + chris.du_right(i) * h.entries + h.entries * chris.ud_mid(i);
        }
    }
    return out;
}

StateKet parallel_transport_step(const StateKet& psi, const ChristoffelSet& chris,
                                 const RealVector& dr) {
    if (psi.comps.size() != chris.dim() || dr.size() != chris.n_params())
        throw DimensionMismatch("parallel_transport_step shape mismatch");
    Vector out = psi.comps;
    for (int i = 0; i < chris.n_params(); ++i)
        out -= dr[i] * (chris.ud_right(i) * psi.comps);
    return {out};
}

RotationDeformation rotation_deformation_split(const ChristoffelSet& chris) {
    RotationDeformation parts;
    for (int i = 0; i < chris.n_params(); ++i) {
        const Matrix& d = chris.dd_right(i);
        parts.rotation.push_back(0.5 * (d - d.adjoint()));
        parts.deformation.push_back(0.5 * (d + d.adjoint()));
    }
    return parts;
}

double ConnectionReport::worst() const {
    return std::max({shifting, conjugation, raising_lowering, derived_right, derived_left,
                     derived_final, metric_constancy});
}

ConnectionReport verify_connection_identities(const ChristoffelSet& chris,
                                              const BasisFrame& frame,
                                              const FrameDerivatives& derivs) {
    const int p = chris.n_params();
    const Matrix& e = frame.vectors();
    const Matrix f = frame.duals();
    const auto df = dual_frame_derivs(frame, derivs);
    const Matrix& s = frame.metric();
    const Matrix& sinv = frame.inv_metric();

    const double scale = chris.max_norm() + 1.0;
    ConnectionReport rep;
    auto update = [&](double& slot, const Matrix& lhs, const Matrix& rhs) {
        slot = std::max(slot, inf_norm(Matrix(lhs - rhs)) / scale);
    };

    for (int i = 0; i < p; ++i) {
        const Matrix& de = derivs.d_vectors[static_cast<size_t>(i)];
        const Matrix& dfi = df[static_cast<size_t>(i)];

        // All eight variants from direct ambient inner products.
        const Matrix dd_r = e.adjoint() * de;    // D_{mu nu i}
        const Matrix dd_m = de.adjoint() * e;    // D_{mu i nu}
        const Matrix ud_r = f.adjoint() * de;    // D^mu_{nu i}
        const Matrix ud_m = dfi.adjoint() * e;   // D^mu_{i nu}
        const Matrix du_r = e.adjoint() * dfi;   // D_mu^nu_i
        const Matrix du_m = de.adjoint() * f;    // D_{mu i}^nu
        const Matrix uu_r = f.adjoint() * dfi;   // D^{mu nu}_i
        const Matrix uu_m = dfi.adjoint() * f;   // D^mu_i^nu

        const Matrix ds = dd_m + dd_r;           // d_i S_{mu nu}
        const Matrix dsu = -sinv * ds * sinv;    // d_i S^{mu nu}

        // shifting set
        update(rep.shifting, ud_r, -ud_m);
        update(rep.shifting, du_r, -du_m);
        update(rep.shifting, dd_r, -dd_m + ds);
        update(rep.shifting, uu_r, -uu_m + dsu);

        // conjugation set
        update(rep.conjugation, ud_r, du_m.adjoint());
        update(rep.conjugation, ud_m, du_r.adjoint());
        update(rep.conjugation, dd_r, dd_m.adjoint());
        update(rep.conjugation, uu_m, uu_r.adjoint());

        // raising/lowering for indices not adjacent to the derivative
        update(rep.raising_lowering, ud_r, sinv * dd_r);
        update(rep.raising_lowering, ud_m, uu_m * s);
        update(rep.raising_lowering, du_r, s * uu_r);
        update(rep.raising_lowering, du_m, dd_m * sinv);
        update(rep.raising_lowering, dd_r, s * ud_r);
        update(rep.raising_lowering, dd_m, du_m * s);
        update(rep.raising_lowering, uu_r, sinv * du_r);
        update(rep.raising_lowering, uu_m, ud_m * sinv);

        // derived raising/lowering, derivative index on the right
        update(rep.derived_right, uu_r * s, ud_r - sinv * ds);
        update(rep.derived_right, dd_r * sinv, du_r - s * dsu);
        update(rep.derived_right, du_r * s, dd_r - ds);
        update(rep.derived_right, ud_r * sinv, uu_r - dsu);

        // derived raising/lowering, derivative index on the left
        update(rep.derived_left, sinv * dd_m, ud_m - dsu * s);
        update(rep.derived_left, s * uu_m, du_m - ds * sinv);
        update(rep.derived_left, s * ud_m, dd_m - ds);
        update(rep.derived_left, sinv * du_m, uu_m - dsu);

        // derived contractions
        update(rep.derived_final, uu_r * s, -sinv * dd_m);
        update(rep.derived_final, dd_r * sinv, -s * uu_m);
        update(rep.derived_final, du_r * s, -dd_m);
        update(rep.derived_final, ud_r * sinv, -uu_m);
        update(rep.derived_final, s * ud_m, -dd_r);
        update(rep.derived_final, sinv * du_m, -uu_r);

        // covariant constancy of both metrics
        const Matrix cov_s_lower = ds + du_r * s + s * ud_m;
        const Matrix cov_s_upper = dsu + ud_r * sinv + sinv * du_m;
        update(rep.metric_constancy, cov_s_lower, Matrix::Zero(s.rows(), s.cols()));
        update(rep.metric_constancy, cov_s_upper, Matrix::Zero(s.rows(), s.cols()));
    }
    return rep;
}

}  // namespace oblique
