#include "flagctl/lie_structure.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "flagctl/errors.hpp"

namespace flagctl::lie {

CartanElement::CartanElement(std::vector<double> diag) : diag_(std::move(diag)) {
    require(diag_.size() >= 2, Error::Code::dimension,
            "CartanElement: need at least two entries");
    const double sum = std::accumulate(diag_.begin(), diag_.end(), 0.0);
    require(std::abs(sum) <= tol::trace * scale() * n(), Error::Code::domain,
            "CartanElement: trace " + std::to_string(sum) + " is not zero");
}

double CartanElement::scale() const {
    double m = 1.0;
    for (double v : diag_) m = std::max(m, std::abs(v));
    return m;
}

bool CartanElement::in_closed_chamber(double tol_root) const {
    for (int i = 0; i + 1 < n(); ++i)
        if (diag_[i] - diag_[i + 1] < -tol_root * scale()) return false;
    return true;
}

std::vector<Root> simple_roots(int n) {
    require(n >= 2, Error::Code::domain, "simple_roots: n must be >= 2");
    std::vector<Root> out;
    for (int i = 0; i + 1 < n; ++i) out.push_back({i, i + 1});
    return out;
}

std::vector<Root> positive_roots(int n) {
    require(n >= 2, Error::Code::domain, "positive_roots: n must be >= 2");
    std::vector<Root> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.push_back({i, j});
    return out;
}

double eval_root(const Root& alpha, const CartanElement& h) {
    require(alpha.i >= 0 && alpha.j >= 0 && alpha.i < h.n() && alpha.j < h.n(),
            Error::Code::dimension, "eval_root: root indices outside 0..n-1");
    return h.diag()[alpha.i] - h.diag()[alpha.j];
}

weyl::ThetaSet flag_type_of(const CartanElement& h, double tol_root) {
    require(h.in_closed_chamber(tol_root), Error::Code::chamber,
            "flag_type_of: element is not in the closed chamber");
    std::vector<int> vanishing;
    const double band = tol_root * h.scale();
    for (int i = 0; i + 1 < h.n(); ++i)
        if (std::abs(h.diag()[i] - h.diag()[i + 1]) <= band) vanishing.push_back(i + 1);
    return weyl::ThetaSet(std::move(vanishing));
}

namespace {

// column sign rule: first entry clearing the relative band decides the sign
void normalize_column_signs(Eigen::MatrixXd& g) {
    for (int c = 0; c < g.cols(); ++c) {
        const double big = g.col(c).cwiseAbs().maxCoeff();
        for (int r = 0; r < g.rows(); ++r) {
            if (std::abs(g(r, c)) > 1e-9 * big) {
                if (g(r, c) < 0) g.col(c) = -g.col(c);
                break;
            }
        }
    }
}

} // namespace

SplitDecomposition split_decompose(const Eigen::MatrixXd& x, double tolerance) {
    const int n = static_cast<int>(x.rows());
    require(x.cols() == n && n >= 2, Error::Code::dimension,
            "split_decompose: matrix must be square, n >= 2");
    const double scale = std::max(1.0, x.norm());
    require(std::abs(x.trace()) <= tol::trace * scale * n, Error::Code::domain,
            "split_decompose: matrix is not traceless");

    Eigen::VectorXd values(n);
    Eigen::MatrixXd vectors(n, n);

    const bool symmetric = (x - x.transpose()).norm() <= 1e-12 * scale;
    if (symmetric) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
        values = es.eigenvalues();
        vectors = es.eigenvectors();
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(x);
        require(es.info() == Eigen::Success, Error::Code::not_split,
                "split_decompose: eigensolver failed");
        for (int k = 0; k < n; ++k) {
            const std::complex<double> lambda = es.eigenvalues()(k);
            if (std::abs(lambda.imag()) > tolerance * scale)
                fail(Error::Code::not_split,
                     "split_decompose: complex eigenvalue " +
                         std::to_string(lambda.real()) + " + " +
                         std::to_string(lambda.imag()) + "i");
            values(k) = lambda.real();
            // rotate the eigenvector onto the real axis before dropping Im
            Eigen::VectorXcd v = es.eigenvectors().col(k);
            int big = 0;
            v.cwiseAbs().maxCoeff(&big);
            v *= std::conj(v(big)) / std::abs(v(big));
            require(v.imag().norm() <= 1e-6 * v.norm(), Error::Code::not_split,
                    "split_decompose: eigenvector is not real");
            vectors.col(k) = v.real();
        }
    }

    // order by descending eigenvalue into the closed chamber
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values(a) > values(b); });
    Eigen::VectorXd sorted_values(n);
    Eigen::MatrixXd g(n, n);
    for (int k = 0; k < n; ++k) {
        sorted_values(k) = values(order[k]);
        g.col(k) = vectors.col(order[k]).normalized();
    }
    normalize_column_signs(g);
    if (g.determinant() < 0) g.col(n - 1) = -g.col(n - 1);

    // reject near-defective bases, then confirm the factorization
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    require(svd.singularValues()(n - 1) > 1e-9 * svd.singularValues()(0),
            Error::Code::not_split,
            "split_decompose: eigenbasis is numerically defective");
    const Eigen::MatrixXd recomposed =
        g * sorted_values.asDiagonal() * g.inverse();
    require((recomposed - x).norm() <= std::max(tolerance, tol::lin) * scale * 10,
            Error::Code::not_split,
            "split_decompose: matrix is not diagonalizable within tolerance");

    SplitDecomposition out{std::move(g),
                           CartanElement(std::vector<double>(
                               sorted_values.data(), sorted_values.data() + n)),
                           false};
    double min_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k)
        min_gap = std::min(min_gap, sorted_values(k) - sorted_values(k + 1));
    out.regular = min_gap > tol::root * std::max(1.0, x.norm());
    return out;
}

namespace {

// dimension of the real flag manifold with member dimensions `dims` in R^m
int flag_dim(const std::vector<int>& dims, int m) {
    int sq = 0, prev = 0;
    for (int d : dims) {
        sq += (d - prev) * (d - prev);
        prev = d;
    }
    sq += (m - prev) * (m - prev);
    return (m * m - sq) / 2;
}

int subspace_intersection_dim(const Eigen::MatrixXd& v_basis,
                              const Eigen::MatrixXd& e_basis, double tolerance) {
    Eigen::MatrixXd joint(v_basis.rows(), v_basis.cols() + e_basis.cols());
    joint << v_basis, e_basis;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(joint);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) > tolerance) ++rank;
    return static_cast<int>(v_basis.cols() + e_basis.cols()) - rank;
}

} // namespace

bool FixedComponent::contains(const flag::FlagPoint& p, double tolerance) const {
    if (!(p.signature() == point.signature())) return false;
    const flag::FlagPoint pulled = flag::act(g_inverse, p);
    const auto& dims = p.signature().dims();
    for (std::size_t a = 0; a < dims.size(); ++a) {
        const Eigen::MatrixXd v = pulled.frame().leftCols(dims[a]);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            Eigen::MatrixXd e =
                Eigen::MatrixXd::Zero(p.signature().n(), blocks[b].second);
            for (int k = 0; k < blocks[b].second; ++k)
                e(blocks[b].first + k, k) = 1.0;
            if (subspace_intersection_dim(v, e, tolerance) != profile[a][b])
                return false;
        }
    }
    return true;
}

std::vector<FixedComponent> fixed_components(const SplitDecomposition& d,
                                             const weyl::ThetaSet& theta,
                                             const std::vector<weyl::WeylElement>& reps) {
    const int n = d.h.n();
    theta.validate(n);

    const weyl::ThetaSet theta_h = flag_type_of(d.h);
    const auto expected_blocks = weyl::double_cosets(n, theta_h, theta);
    require(reps.size() == expected_blocks.size(), Error::Code::label,
            "fixed_components: expected " + std::to_string(expected_blocks.size()) +
                " double-coset representatives, got " + std::to_string(reps.size()));
    std::set<weyl::WeylElement> canon;
    for (const auto& w : reps) {
        require(w.n() == n, Error::Code::label,
                "fixed_components: representative size mismatch");
        canon.insert(weyl::double_coset_representative(w, theta_h, theta));
    }
    require(canon.size() == reps.size(), Error::Code::label,
            "fixed_components: representatives are not in distinct double cosets");

    // eigenvalue clusters follow the blocks of Theta(H)
    const auto block_of = weyl::theta_blocks(n, theta_h);
    std::vector<std::pair<int, int>> blocks;
    for (int pos = 0; pos < n;) {
        int end = pos;
        while (end < n && block_of[end] == block_of[pos]) ++end;
        blocks.emplace_back(pos, end - pos);
        pos = end;
    }

    const flag::FlagSignature sig = flag::FlagSignature::from_theta(n, theta);
    const Eigen::MatrixXd g_inv = d.g.inverse();

    std::vector<FixedComponent> out;
    for (const auto& w : reps) {
        // permuted eigenvector frame: column t of g_perm is g.col(w(t))
        Eigen::MatrixXd g_perm(n, n);
        for (int t = 0; t < n; ++t) g_perm.col(t) = d.g.col(w.image(t));
        FixedComponent comp{w,
                            flag::act(g_perm, flag::base_point(sig)),
                            0,
                            blocks,
                            {},
                            g_inv};

        const auto& dims = sig.dims();
        comp.profile.assign(dims.size(), std::vector<int>(blocks.size(), 0));
        for (std::size_t a = 0; a < dims.size(); ++a)
            for (int t = 0; t < dims[a]; ++t)
                ++comp.profile[a][block_of[w.image(t)]];

        // component dimension: product of block-internal flag manifolds
        int dim = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            std::set<int> inner;
            for (std::size_t a = 0; a < dims.size(); ++a) {
                const int c = comp.profile[a][b];
                if (c > 0 && c < blocks[b].second) inner.insert(c);
            }
            dim += flag_dim({inner.begin(), inner.end()}, blocks[b].second);
        }
        comp.dimension = dim;
        out.push_back(std::move(comp));
    }
    return out;
}

} // namespace flagctl::lie
