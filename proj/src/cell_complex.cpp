#include "flagctl/cell_complex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>

#include "flagctl/detail/parallel.hpp"
#include "flagctl/errors.hpp"
#include "flagctl/rng.hpp"

namespace flagctl::flag {

namespace {
constexpr double kNeighborFactor = 2.5; // in covering radii
} // namespace

CellComplex::CellComplex(FlagSignature signature, std::vector<FlagPoint> centers,
                         double radius, int resolution, std::uint64_t seed)
    : signature_(std::move(signature)), centers_(std::move(centers)),
      radius_(radius), resolution_(resolution), seed_(seed) {
    require(!centers_.empty(), Error::Code::resolution, "CellComplex: no centers");
    for (const auto& c : centers_)
        require(c.signature() == signature_, Error::Code::dimension,
                "CellComplex: center signature mismatch");
    build_index();
}

void CellComplex::build_index() {
    const int n = signature_.n();
    const int levels = static_cast<int>(signature_.dims().size());
    segment_sizes_.assign(levels, n * n);

    const int len = std::max(1, levels * n * n);
    stacks_.resize(size(), len);
    stacks_.setZero();
    for (int c = 0; c < size(); ++c)
        if (levels > 0) stacks_.row(c) = centers_[c].projector_stack().transpose();

    neighbors_.assign(size(), {});
    const double cutoff = kNeighborFactor * radius_;
    for (int a = 0; a < size(); ++a)
        for (int b = a + 1; b < size(); ++b) {
            const double d = distance_stacks(stacks_.row(a).transpose(),
                                             stacks_.row(b).transpose(), segment_sizes_);
            if (d <= cutoff) {
                neighbors_[a].push_back(b);
                neighbors_[b].push_back(a);
            }
        }
}

int CellComplex::locate(const FlagPoint& x) const {
    require(x.signature() == signature_, Error::Code::dimension,
            "locate: signature mismatch");
    if (signature_.degenerate()) return 0;
    return locate_stack(x.projector_stack());
}

int CellComplex::locate_stack(const Eigen::VectorXd& stack) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < size(); ++c) {
        const double d =
            distance_stacks(stack, stacks_.row(c).transpose(), segment_sizes_);
        if (d < best_d) { // strict: ties stay at the lowest index
            best_d = d;
            best = c;
        }
    }
    return best;
}

int CellComplex::locate_and_ball(const Eigen::VectorXd& stack, double eps,
                                 std::vector<int>& hits) const {
    hits.clear();
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < size(); ++c) {
        const double d =
            distance_stacks(stack, stacks_.row(c).transpose(), segment_sizes_);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
        if (eps > 0.0 && d < eps) hits.push_back(c);
    }
    if (!std::binary_search(hits.begin(), hits.end(), best)) {
        hits.push_back(best);
        std::sort(hits.begin(), hits.end());
    }
    return best;
}

std::vector<int> CellComplex::ball(const FlagPoint& x, double eps) const {
    require(x.signature() == signature_, Error::Code::dimension,
            "ball: signature mismatch");
    std::vector<int> hits;
    if (signature_.degenerate()) return {0};
    locate_and_ball(x.projector_stack(), eps, hits);
    return hits;
}

std::vector<int> CellComplex::dilate(const std::vector<int>& cells) const {
    std::set<int> out(cells.begin(), cells.end());
    for (int c : cells) out.insert(neighbors_[c].begin(), neighbors_[c].end());
    return {out.begin(), out.end()};
}

nlohmann::json CellComplex::to_json() const {
    nlohmann::json j;
    j["schema"] = "flagctl-cell-complex";
    j["version"] = 1;
    j["n"] = signature_.n();
    j["dims"] = signature_.dims();
    j["resolution"] = resolution_;
    j["seed"] = seed_;
    j["radius"] = radius_;
    nlohmann::json centers = nlohmann::json::array();
    const int n = signature_.n();
    for (const auto& c : centers_) {
        std::vector<double> flat(n * n);
        for (int r = 0; r < n; ++r)
            for (int col = 0; col < n; ++col) flat[r * n + col] = c.frame()(r, col);
        centers.push_back(flat);
    }
    j["centers"] = std::move(centers);
    return j;
}

std::shared_ptr<const CellComplex> CellComplex::from_json(const nlohmann::json& j) {
    require(j.value("schema", "") == std::string("flagctl-cell-complex"),
            Error::Code::config, "cell complex cache: unknown schema");
    const int n = j.at("n").get<int>();
    FlagSignature sig(n, j.at("dims").get<std::vector<int>>());
    std::vector<FlagPoint> centers;
    for (const auto& flat : j.at("centers")) {
        const auto v = flat.get<std::vector<double>>();
        require(static_cast<int>(v.size()) == n * n, Error::Code::config,
                "cell complex cache: bad center length");
        Eigen::MatrixXd f(n, n);
        for (int r = 0; r < n; ++r)
            for (int col = 0; col < n; ++col) f(r, col) = v[r * n + col];
        centers.emplace_back(f, sig);
    }
    return std::make_shared<CellComplex>(sig, std::move(centers),
                                         j.at("radius").get<double>(),
                                         j.at("resolution").get<int>(),
                                         j.at("seed").get<std::uint64_t>());
}

namespace {

FlagPoint halton_point(const FlagSignature& sig, std::uint64_t index,
                       std::uint64_t seed) {
    const int n = sig.n();
    // Box-Muller over scrambled Halton coordinates -> Gaussian frame -> QR
    Eigen::MatrixXd m(n, n);
    int d = 0;
    double pending = 0.0;
    bool have_pending = false;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (have_pending) {
                m(r, c) = pending;
                have_pending = false;
                continue;
            }
            double u1 = rng::halton(index, d++, seed);
            const double u2 = rng::halton(index, d++, seed);
            if (u1 <= 1e-300) u1 = 1e-300;
            const double rad = std::sqrt(-2.0 * std::log(u1));
            m(r, c) = rad * std::cos(2.0 * std::numbers::pi * u2);
            pending = rad * std::sin(2.0 * std::numbers::pi * u2);
            have_pending = true;
        }
    return FlagPoint(orthonormal_frame(m), sig);
}

bool is_projective_line(const FlagSignature& sig) {
    return sig.n() == 2 && sig.dims() == std::vector<int>{1};
}

} // namespace

std::shared_ptr<const CellComplex> discretize(const FlagSignature& signature,
                                              int resolution, std::uint64_t seed,
                                              int threads) {
    require(resolution >= 8, Error::Code::resolution,
            "discretize: resolution must be >= 8, got " + std::to_string(resolution));

    if (signature.degenerate()) {
        std::vector<FlagPoint> centers{base_point(signature)};
        return std::make_shared<CellComplex>(signature, std::move(centers), 0.0, 1,
                                             seed);
    }

    std::vector<FlagPoint> centers;
    centers.reserve(resolution);
    int probe_count = 0;
    std::vector<FlagPoint> probes;

    if (is_projective_line(signature)) {
        // uniform angle grid on RP^1; cell k covers [k,k+1) * pi/res
        for (int k = 0; k < resolution; ++k) {
            const double t = (k + 0.5) * std::numbers::pi / resolution;
            Eigen::MatrixXd f(2, 2);
            f << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            centers.emplace_back(f, signature);
        }
        // probe grid a multiple of the cell grid so every cell boundary,
        // where the nearest-center distance peaks, is sampled exactly
        probe_count = 8 * resolution;
        for (int k = 0; k < probe_count; ++k) {
            const double t = k * std::numbers::pi / probe_count;
            Eigen::MatrixXd f(2, 2);
            f << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            probes.emplace_back(f, signature);
        }
    } else {
        for (int k = 0; k < resolution; ++k)
            centers.push_back(halton_point(signature, k + 1, seed));
        probe_count = std::max(8192, 20 * resolution);
        probes.reserve(probe_count);
        for (int k = 0; k < probe_count; ++k)
            probes.push_back(halton_point(signature, resolution + k + 1, seed));
    }

    // covering radius: max over probes of the distance to the nearest center
    auto interim = std::make_shared<CellComplex>(signature, centers, 0.0, resolution,
                                                 seed);
    std::vector<double> nearest(probe_count, 0.0);
    detail::parallel_chunks(probe_count, threads, [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            const Eigen::VectorXd stack = probes[p].projector_stack();
            const int c = interim->locate_stack(stack);
            nearest[p] = distance(probes[p], interim->center(c));
        }
    });
    const double radius = *std::max_element(nearest.begin(), nearest.end());

    return std::make_shared<CellComplex>(signature, std::move(centers), radius,
                                         resolution, seed);
}

std::vector<int> fiber_cell_map(const CellComplex& complex_f,
                                const CellComplex& complex_fi) {
    require(complex_f.signature().n() == complex_fi.signature().n(),
            Error::Code::dimension, "fiber map: mismatched n");
    require(complex_f.signature().theta().empty(), Error::Code::dimension,
            "fiber map: source complex must live on the maximal flag");
    std::vector<int> map(complex_f.size());
    const weyl::ThetaSet target = complex_fi.signature().theta();
    for (int c = 0; c < complex_f.size(); ++c)
        map[c] = complex_fi.locate(project(complex_f.center(c), target));
    return map;
}

std::vector<int> fiber_saturate_with_map(const std::vector<int>& cells,
                                         const std::vector<int>& map,
                                         int total_cells) {
    std::set<int> image;
    for (int c : cells) image.insert(map.at(c));
    std::vector<int> out;
    for (int c = 0; c < total_cells; ++c)
        if (image.count(map[c])) out.push_back(c);
    return out;
}

std::vector<int> fiber_saturate(const std::vector<int>& cells, int i,
                                const CellComplex& complex_f,
                                const CellComplex& complex_fi) {
    const int n = complex_f.signature().n();
    require(i >= 1 && i <= n - 1, Error::Code::domain,
            "fiber_saturate: simple-root index out of range");
    const weyl::ThetaSet expected{i};
    require(complex_fi.signature().theta() == expected, Error::Code::dimension,
            "fiber_saturate: second complex must be the rank-one flag of root " +
                std::to_string(i));
    if (cells.empty()) return {};
    return fiber_saturate_with_map(cells, fiber_cell_map(complex_f, complex_fi),
                                   complex_f.size());
}

} // namespace flagctl::flag
