#include "flagctl/flag_manifold.hpp"

#include <algorithm>
#include <cmath>

#include "flagctl/errors.hpp"

namespace flagctl::flag {

namespace {
constexpr double kOrthTol = 1e-9;
constexpr double kSingularTol = 1e-12;
} // namespace

FlagSignature::FlagSignature(int n, std::vector<int> dims)
    : n_(n), dims_(std::move(dims)) {
    require(n >= 2, Error::Code::dimension, "FlagSignature: n must be >= 2");
    std::sort(dims_.begin(), dims_.end());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        require(dims_[k] >= 1 && dims_[k] <= n - 1, Error::Code::dimension,
                "FlagSignature: dim " + std::to_string(dims_[k]) + " outside 1.." +
                    std::to_string(n - 1));
        require(k == 0 || dims_[k] > dims_[k - 1], Error::Code::dimension,
                "FlagSignature: dims must be strictly increasing");
    }
}

FlagSignature FlagSignature::from_theta(int n, const weyl::ThetaSet& theta) {
    theta.validate(n);
    std::vector<int> dims;
    for (int d = 1; d <= n - 1; ++d)
        if (!theta.contains(d)) dims.push_back(d);
    return FlagSignature(n, std::move(dims));
}

weyl::ThetaSet FlagSignature::theta() const {
    std::vector<int> t;
    for (int d = 1; d <= n_ - 1; ++d)
        if (!std::binary_search(dims_.begin(), dims_.end(), d)) t.push_back(d);
    return weyl::ThetaSet(std::move(t));
}

std::vector<int> FlagSignature::block_sizes() const {
    std::vector<int> sizes;
    int prev = 0;
    for (int d : dims_) {
        sizes.push_back(d - prev);
        prev = d;
    }
    sizes.push_back(n_ - prev);
    return sizes;
}

int FlagSignature::manifold_dim() const {
    int sq = 0;
    for (int g : block_sizes()) sq += g * g;
    return (n_ * n_ - sq) / 2;
}

FlagPoint::FlagPoint(Eigen::MatrixXd frame, FlagSignature signature)
    : frame_(std::move(frame)), signature_(std::move(signature)) {
    const int n = signature_.n();
    require(frame_.rows() == n && frame_.cols() == n, Error::Code::dimension,
            "FlagPoint: frame must be n x n");
    const double err =
        (frame_.transpose() * frame_ - Eigen::MatrixXd::Identity(n, n)).norm();
    require(err <= kOrthTol * n, Error::Code::dimension,
            "FlagPoint: frame is not orthonormal");
}

Eigen::MatrixXd FlagPoint::projector(int k) const {
    const int d = signature_.dims().at(k);
    const auto block = frame_.leftCols(d);
    return block * block.transpose();
}

Eigen::VectorXd FlagPoint::projector_stack() const {
    const int n = signature_.n();
    const int levels = static_cast<int>(signature_.dims().size());
    Eigen::VectorXd out(levels * n * n);
    for (int k = 0; k < levels; ++k) {
        const Eigen::MatrixXd p = projector(k);
        out.segment(k * n * n, n * n) = Eigen::Map<const Eigen::VectorXd>(p.data(), n * n);
    }
    return out;
}

FlagPoint base_point(const FlagSignature& signature) {
    return FlagPoint(Eigen::MatrixXd::Identity(signature.n(), signature.n()), signature);
}

double distance(const FlagPoint& x, const FlagPoint& y) {
    require(x.signature() == y.signature(), Error::Code::dimension,
            "distance: mismatched flag signatures");
    double d = 0.0;
    for (std::size_t k = 0; k < x.signature().dims().size(); ++k)
        d = std::max(d, (x.projector(static_cast<int>(k)) -
                         y.projector(static_cast<int>(k)))
                            .norm());
    return d;
}

double distance_stacks(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const std::vector<int>& segment_sizes) {
    double worst = 0.0;
    int off = 0;
    for (int len : segment_sizes) {
        worst = std::max(worst, (a.segment(off, len) - b.segment(off, len)).squaredNorm());
        off += len;
    }
    return std::sqrt(worst);
}

Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    const double scale = std::max(1.0, m.norm());
    for (int j = 0; j < n; ++j) {
        require(std::abs(r(j, j)) > kSingularTol * scale, Error::Code::singular,
                "orthonormal_frame: numerically singular input");
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

FlagPoint act(const Eigen::MatrixXd& g, const FlagPoint& x) {
    const int n = x.signature().n();
    require(g.rows() == n && g.cols() == n, Error::Code::dimension,
            "act: group element size mismatch");
    // QR of g*F keeps every prefix span equal to g * (prefix span of F)
    return FlagPoint(orthonormal_frame(g * x.frame()), x.signature());
}

FlagPoint project(const FlagPoint& x, const weyl::ThetaSet& theta2) {
    const int n = x.signature().n();
    theta2.validate(n);
    const weyl::ThetaSet theta1 = x.signature().theta();
    require(theta1.subset_of(theta2), Error::Code::projection,
            "project: target type " + theta2.to_string() +
                " does not refine from " + theta1.to_string());
    return FlagPoint(x.frame(), FlagSignature::from_theta(n, theta2));
}

} // namespace flagctl::flag
