#include "oblique/tensor_core.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace oblique {

BasisFrame::BasisFrame(Matrix vectors, RealVector param)
    : vectors_(std::move(vectors)), param_(std::move(param)) {
    const int m = static_cast<int>(vectors_.rows());
    const int n = static_cast<int>(vectors_.cols());
    if (n < 1) throw DimensionMismatch("frame needs at least one basis vector");
    if (m < n) {
        std::ostringstream os;
        os << "ambient dimension " << m << " smaller than frame dimension " << n;
        throw DimensionMismatch(os.str());
    }
    if (!all_finite(vectors_)) throw DimensionMismatch("frame vectors contain NaN/Inf");

    metric_ = hermitize(vectors_.adjoint() * vectors_);

    Eigen::SelfAdjointEigenSolver<Matrix> es(metric_);
    eig_min_ = es.eigenvalues().minCoeff();
    const double eig_max = es.eigenvalues().maxCoeff();
    if (eig_min_ <= kLinIndepThreshold * eig_max) {
        std::ostringstream os;
        os << "frame metric is numerically singular (eig_min " << eig_min_ << ", eig_max "
           << eig_max << ")";
        throw SingularFrame(os.str());
    }
    // Factorized inverse via the available eigendecomposition; the frame cache
    // is the one place an explicit inverse is stored.
    inv_metric_ = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                  es.eigenvectors().adjoint();
    inv_metric_ = hermitize(inv_metric_);
}

BasisFrame build_frame(const std::vector<AmbientVector>& vectors, const RealVector& param) {
    if (vectors.empty()) throw DimensionMismatch("frame needs at least one basis vector");
    const auto m = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != m) throw DimensionMismatch("ragged basis-vector set");
    Matrix e(m, static_cast<Eigen::Index>(vectors.size()));
    for (Eigen::Index j = 0; j < e.cols(); ++j) e.col(j) = vectors[static_cast<size_t>(j)];
    return BasisFrame(std::move(e), param);
}

BasisFrame build_frame(const Matrix& vectors, const RealVector& param) {
    return BasisFrame(vectors, param);
}

StateBra lower_bra(const StateKet& ket, const BasisFrame& frame) {
    if (ket.comps.size() != frame.dim())
        throw DimensionMismatch("state length does not match frame dimension");
    // psi_mu = sum_nu psi^nu* S_nu_mu = conj(S psi)
    return {(frame.metric() * ket.comps).conjugate()};
}

StateKet raise_ket(const StateBra& bra, const BasisFrame& frame) {
    if (bra.comps.size() != frame.dim())
        throw DimensionMismatch("state length does not match frame dimension");
    // psi^mu = S^mu^nu psi_nu*
    return {frame.inv_metric() * bra.comps.conjugate()};
}

SecondRankOp convert_rep(const SecondRankOp& op, const BasisFrame& frame, Rep target) {
    if (op.entries.rows() != frame.dim() || op.entries.cols() != frame.dim())
        throw DimensionMismatch("operator shape does not match frame dimension");
    if (op.rep == target) return op;
    if (target == Rep::natural) return {frame.inv_metric() * op.entries, Rep::natural};
    return {frame.metric() * op.entries, Rep::matrix};
}

double hermiticity_defect(const SecondRankOp& op, const BasisFrame& frame) {
    if (op.rep == Rep::matrix) return inf_norm(Matrix(op.entries - op.entries.adjoint()));
    // H^mu_nu = (S_nu_lam H^lam_sig S^sig^mu)*, i.e. H = (S H S^{-1})^dag.
    const Matrix rhs = (frame.metric() * op.entries * frame.inv_metric()).adjoint();
    return inf_norm(Matrix(op.entries - rhs));
}

std::pair<Matrix, Matrix> herm_sqrt_pair(const Matrix& s) {
    if (s.rows() != s.cols()) throw DimensionMismatch("square matrix required");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(s));
    const auto& lam = es.eigenvalues();
    if (lam.minCoeff() <= kSqrtEigFloor) {
        std::ostringstream os;
        os << "matrix not positive definite (smallest eigenvalue " << lam.minCoeff() << ")";
        throw NotPositiveDefinite(os.str());
    }
    const Matrix u = es.eigenvectors();
    Matrix root = u * lam.cwiseSqrt().asDiagonal() * u.adjoint();
    Matrix inv_root = u * lam.cwiseSqrt().cwiseInverse().asDiagonal() * u.adjoint();
    return {hermitize(root), hermitize(inv_root)};
}

SecondRankOp invert_second_rank(const SecondRankOp& op) {
    if (op.entries.rows() != op.entries.cols())
        throw DimensionMismatch("square operator required");
    Eigen::FullPivLU<Matrix> lu(op.entries);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) throw SingularOperator("second-rank tensor is singular");
    // Matrix-rep inverse carries both indices up, natural-rep inverse stays
    // mixed; entrywise both are the plain matrix inverse.
    return {lu.inverse(), op.rep};
}

}  // namespace oblique
