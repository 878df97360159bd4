#include "flagctl/dynamics.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "flagctl/errors.hpp"
#include "flagctl/lie_structure.hpp"
#include "flagctl/rng.hpp"

namespace flagctl::dyn {

namespace {

void require_traceless(const Eigen::MatrixXd& m, const std::string& name) {
    require(m.rows() == m.cols() && m.rows() >= 2, Error::Code::dimension,
            name + " must be square with n >= 2");
    const double scale = std::max(1.0, m.norm());
    require(std::abs(m.trace()) <= lie::tol::trace * scale * m.rows(),
            Error::Code::domain,
            name + " must be traceless, trace = " + std::to_string(m.trace()));
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, int n, const std::string& name) {
    require(j.is_array() && !j.empty(), Error::Code::config,
            "config: field '" + name + "' must be a non-empty array");
    Eigen::MatrixXd m(n, n);
    if (j.front().is_array()) { // nested rows
        require(static_cast<int>(j.size()) == n, Error::Code::config,
                "config: '" + name + "' needs " + std::to_string(n) + " rows");
        for (int r = 0; r < n; ++r) {
            require(static_cast<int>(j[r].size()) == n, Error::Code::config,
                    "config: '" + name + "' row " + std::to_string(r) + " needs " +
                        std::to_string(n) + " entries");
            for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
        }
    } else { // flat row-major
        require(static_cast<int>(j.size()) == n * n, Error::Code::config,
                "config: '" + name + "' needs " + std::to_string(n * n) +
                    " entries (row-major)");
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) m(r, c) = j[r * n + c].get<double>();
    }
    return m;
}

} // namespace

ControlRange::ControlRange(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
    require(!lo_.empty() && lo_.size() == hi_.size(), Error::Code::dimension,
            "ControlRange: lo and hi must be non-empty and equally sized");
    for (std::size_t j = 0; j < lo_.size(); ++j)
        require(lo_[j] < 0.0 && 0.0 < hi_[j], Error::Code::range,
                "ControlRange: component " + std::to_string(j) +
                    " must satisfy lo < 0 < hi");
}

bool ControlRange::contains(const Eigen::VectorXd& u, double slack) const {
    if (u.size() != m()) return false;
    for (int j = 0; j < m(); ++j) {
        const double pad = slack * std::max(1.0, std::max(-lo_[j], hi_[j]));
        if (u(j) < lo_[j] - pad || u(j) > hi_[j] + pad) return false;
    }
    return true;
}

BilinearSystem::BilinearSystem(Eigen::MatrixXd a, std::vector<Eigen::MatrixXd> b,
                               ControlRange range)
    : a_(std::move(a)), b_(std::move(b)), range_(std::move(range)) {
    require_traceless(a_, "drift matrix A");
    require(!b_.empty(), Error::Code::dimension, "BilinearSystem: need m >= 1");
    require(static_cast<int>(b_.size()) == range_.m(), Error::Code::dimension,
            "BilinearSystem: control range has " + std::to_string(range_.m()) +
                " axes for " + std::to_string(b_.size()) + " control matrices");
    for (std::size_t j = 0; j < b_.size(); ++j) {
        require_traceless(b_[j], "control matrix B" + std::to_string(j + 1));
        require(b_[j].rows() == a_.rows(), Error::Code::dimension,
                "BilinearSystem: B" + std::to_string(j + 1) + " size differs from A");
    }
}

Eigen::MatrixXd BilinearSystem::drift_matrix(const Eigen::VectorXd& u) const {
    require(u.size() == m(), Error::Code::dimension,
            "drift_matrix: control has wrong dimension");
    require(range_.contains(u), Error::Code::range,
            "drift_matrix: control value outside the admissible range");
    Eigen::MatrixXd d = a_;
    for (int j = 0; j < m(); ++j) d += u(j) * b_[j];
    return d;
}

BilinearSystem BilinearSystem::backward() const {
    std::vector<Eigen::MatrixXd> nb;
    nb.reserve(b_.size());
    for (const auto& bj : b_) nb.push_back(-bj);
    return BilinearSystem(-a_, std::move(nb), range_);
}

BilinearSystem BilinearSystem::from_json(const nlohmann::json& j) {
    require(j.contains("n"), Error::Code::config, "config: missing field 'n'");
    const int n = j.at("n").get<int>();
    require(n >= 2 && n <= 4, Error::Code::config,
            "config: 'n' must be between 2 and 4");
    require(j.contains("A"), Error::Code::config, "config: missing field 'A'");
    require(j.contains("B"), Error::Code::config, "config: missing field 'B'");
    require(j.contains("range"), Error::Code::config, "config: missing field 'range'");

    const Eigen::MatrixXd a = parse_matrix(j.at("A"), n, "A");
    std::vector<Eigen::MatrixXd> b;
    const auto& jb = j.at("B");
    require(jb.is_array() && !jb.empty(), Error::Code::config,
            "config: 'B' must be a non-empty list of matrices");
    for (std::size_t k = 0; k < jb.size(); ++k)
        b.push_back(parse_matrix(jb[k], n, "B[" + std::to_string(k) + "]"));

    const auto& jr = j.at("range");
    require(jr.contains("lo") && jr.contains("hi"), Error::Code::config,
            "config: 'range' needs 'lo' and 'hi'");
    try {
        ControlRange range(jr.at("lo").get<std::vector<double>>(),
                           jr.at("hi").get<std::vector<double>>());
        return BilinearSystem(a, std::move(b), std::move(range));
    } catch (const Error& e) {
        fail(Error::Code::config, std::string("config: ") + e.what());
    }
}

nlohmann::json BilinearSystem::to_json() const {
    nlohmann::json j;
    j["n"] = n();
    auto dump = [&](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    j["A"] = dump(a_);
    nlohmann::json bs = nlohmann::json::array();
    for (const auto& bj : b_) bs.push_back(dump(bj));
    j["B"] = std::move(bs);
    j["range"] = {{"lo", range_.lo()}, {"hi", range_.hi()}};
    return j;
}

Eigen::MatrixXd flow_matrix(const BilinearSystem& sys, const ControlWord& word) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(sys.n(), sys.n());
    for (const auto& step : word) {
        require(step.dt > 0.0, Error::Code::domain,
                "flow: control word steps need dt > 0");
        g = (step.dt * sys.drift_matrix(step.u)).exp() * g;
    }
    return g;
}

flag::FlagPoint flow_point(const BilinearSystem& sys, const flag::FlagPoint& x,
                           const ControlWord& word) {
    require(sys.n() == x.signature().n(), Error::Code::dimension,
            "flow_point: system and flag dimensions differ");
    if (word.empty()) return x;
    return flag::act(flow_matrix(sys, word), x);
}

std::vector<ControlSample> control_samples(const ControlRange& range, int level) {
    require(level >= 1, Error::Code::domain, "control_samples: level must be >= 1");
    const int m = range.m();

    // per axis: lo, level-1 points toward 0, 0, level-1 points toward hi, hi
    std::vector<std::vector<std::pair<double, bool>>> axis(m);
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < level; ++k)
            axis[j].push_back({range.lo()[j] * double(level - k) / level, k > 0});
        axis[j].push_back({0.0, true});
        for (int k = 1; k <= level; ++k)
            axis[j].push_back({range.hi()[j] * double(k) / level, k < level});
    }

    std::vector<ControlSample> out;
    std::vector<int> idx(m, 0);
    while (true) {
        Eigen::VectorXd u(m);
        bool interior = true;
        for (int j = 0; j < m; ++j) {
            u(j) = axis[j][idx[j]].first;
            interior = interior && axis[j][idx[j]].second;
        }
        out.push_back({u, interior});
        int j = m - 1;
        while (j >= 0 && ++idx[j] == static_cast<int>(axis[j].size())) idx[j--] = 0;
        if (j < 0) break;
    }
    return out;
}

namespace {

// orthonormal basis (Frobenius) of the Lie algebra generated by the seeds
std::vector<Eigen::MatrixXd> bracket_closure(std::vector<Eigen::MatrixXd> seeds) {
    std::vector<Eigen::MatrixXd> basis;
    auto add = [&](Eigen::MatrixXd v) {
        for (const auto& b : basis) v -= (b.cwiseProduct(v)).sum() * b;
        const double norm = v.norm();
        if (norm > 1e-10) {
            basis.push_back(v / norm);
            return true;
        }
        return false;
    };
    for (auto& s : seeds) add(std::move(s));
    bool grew = true;
    while (grew) {
        grew = false;
        const auto snapshot = basis;
        for (std::size_t i = 0; i < snapshot.size(); ++i)
            for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
                Eigen::MatrixXd lb =
                    snapshot[i] * snapshot[j] - snapshot[j] * snapshot[i];
                if (add(std::move(lb))) grew = true;
            }
    }
    return basis;
}

} // namespace

AccessibilityReport accessibility_diagnostic(const BilinearSystem& sys,
                                             const flag::FlagSignature& signature,
                                             int points, std::uint64_t seed) {
    require(signature.n() == sys.n(), Error::Code::dimension,
            "accessibility_diagnostic: dimension mismatch");
    std::vector<Eigen::MatrixXd> seeds{sys.a()};
    for (const auto& bj : sys.b()) seeds.push_back(bj);
    const auto algebra = bracket_closure(std::move(seeds));

    AccessibilityReport report;
    report.points = points;
    report.algebra_dim = static_cast<int>(algebra.size());
    report.manifold_dim = signature.manifold_dim();
    if (report.manifold_dim == 0) return report; // one-point manifold

    const int n = sys.n();
    const int levels = static_cast<int>(signature.dims().size());
    rng::Stream stream(rng::mix(seed, 0xacce55));
    for (int p = 0; p < points; ++p) {
        Eigen::MatrixXd raw(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) raw(r, c) = stream.next_gauss();
        const flag::FlagPoint x(flag::orthonormal_frame(raw), signature);

        // stack the induced tangent vectors (I - P_k) M P_k per flag level
        Eigen::MatrixXd tangents(levels * n * n, algebra.size());
        for (std::size_t a = 0; a < algebra.size(); ++a)
            for (int k = 0; k < levels; ++k) {
                const Eigen::MatrixXd pk = x.projector(k);
                const Eigen::MatrixXd t =
                    (Eigen::MatrixXd::Identity(n, n) - pk) * algebra[a] * pk;
                tangents.block(k * n * n, a, n * n, 1) =
                    Eigen::Map<const Eigen::VectorXd>(t.data(), n * n);
            }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(tangents);
        int rank = 0;
        for (int k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) > 1e-8 * svd.singularValues()(0)) ++rank;
        if (rank < report.manifold_dim) ++report.deficient;
    }
    return report;
}

} // namespace flagctl::dyn
