#include "flagctl/setfinder.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "flagctl/detail/parallel.hpp"
#include "flagctl/errors.hpp"
#include "flagctl/rng.hpp"

namespace flagctl::setfinder {

namespace {

// iterative Tarjan; components come back with sorted cells, ordered by
// their smallest cell
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;

    struct Frame {
        int v;
        std::size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < adj[f.v].size()) {
                const int w = adj[f.v][f.edge++];
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> scc;
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        scc.push_back(w);
                        if (w == f.v) break;
                    }
                    std::sort(scc.begin(), scc.end());
                    sccs.push_back(std::move(scc));
                }
                const int child = f.v;
                call.pop_back();
                if (!call.empty())
                    low[call.back().v] = std::min(low[call.back().v], low[child]);
            }
        }
    }
    std::sort(sccs.begin(), sccs.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return sccs;
}

std::vector<LabeledSet> component_sets(const CellGraph& graph, SetKind kind) {
    const auto sccs = strongly_connected_components(graph.union_adjacency());
    std::vector<LabeledSet> out;
    for (const auto& scc : sccs) {
        if (scc.size() == 1) {
            // one-cell components are kept only when every control pins the
            // cell to itself; cells that merely freeze under one extreme
            // control are transient artifacts of the time step
            if (!graph.self_edge_under_all_controls(scc.front())) continue;
        }
        out.push_back(LabeledSet{scc, kind, {}, {}});
    }
    return out;
}

flag::FlagPoint sample_point(const flag::CellComplex& complex, int cell, int k,
                             std::uint64_t seed) {
    const flag::FlagPoint& center = complex.center(cell);
    if (k == 0 || complex.radius() <= 0.0) return center;
    rng::Stream stream(rng::mix(seed, static_cast<std::uint64_t>(cell), k));
    const int n = complex.signature().n();
    double delta = 0.5 * complex.radius();
    for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::MatrixXd noise(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) noise(r, c) = delta * stream.next_gauss();
        flag::FlagPoint cand(flag::orthonormal_frame(center.frame() + noise),
                             complex.signature());
        if (complex.locate(cand) == cell) return cand;
        delta *= 0.5;
    }
    return center;
}

} // namespace

CellGraph::CellGraph(std::shared_ptr<const flag::CellComplex> complex, double tau,
                     double epsilon, std::vector<Eigen::VectorXd> controls,
                     int samples_per_cell, std::uint64_t seed,
                     std::vector<std::vector<std::vector<int>>> adjacency)
    : complex_(std::move(complex)), tau_(tau), epsilon_(epsilon),
      controls_(std::move(controls)), samples_per_cell_(samples_per_cell),
      seed_(seed), adjacency_(std::move(adjacency)) {
    union_adj_.assign(cells(), {});
    for (int c = 0; c < cells(); ++c) {
        std::set<int> merged;
        for (const auto& per_control : adjacency_)
            merged.insert(per_control[c].begin(), per_control[c].end());
        union_adj_[c].assign(merged.begin(), merged.end());
    }
}

std::vector<std::vector<int>> CellGraph::reverse_union_adjacency() const {
    std::vector<std::vector<int>> rev(cells());
    for (int c = 0; c < cells(); ++c)
        for (int t : union_adj_[c]) rev[t].push_back(c);
    return rev;
}

std::size_t CellGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& per_control : adjacency_)
        for (const auto& targets : per_control) total += targets.size();
    return total;
}

bool CellGraph::self_edge_under_all_controls(int c) const {
    for (const auto& per_control : adjacency_) {
        const auto& t = per_control[c];
        if (!std::binary_search(t.begin(), t.end(), c)) return false;
    }
    return true;
}

CellGraph build_graph(const dyn::BilinearSystem& sys,
                      std::shared_ptr<const flag::CellComplex> complex, double tau,
                      double epsilon, const std::vector<Eigen::VectorXd>& controls,
                      int samples_per_cell, std::uint64_t seed, int threads) {
    require(tau > 0.0, Error::Code::domain, "build_graph: tau must be positive");
    require(epsilon >= 0.0, Error::Code::domain, "build_graph: epsilon must be >= 0");
    require(samples_per_cell >= 1, Error::Code::domain,
            "build_graph: samples_per_cell must be >= 1");
    require(!controls.empty(), Error::Code::config,
            "build_graph: the control list is empty");
    require(sys.n() == complex->signature().n(), Error::Code::dimension,
            "build_graph: system and complex dimensions differ");

    // constant controls: one flow matrix per control serves every cell
    std::vector<Eigen::MatrixXd> flows;
    flows.reserve(controls.size());
    for (const auto& u : controls)
        flows.push_back((tau * sys.drift_matrix(u)).exp());

    const int n_cells = complex->size();
    const int n_controls = static_cast<int>(controls.size());
    std::vector<std::vector<std::vector<int>>> adjacency(
        n_controls, std::vector<std::vector<int>>(n_cells));

    detail::parallel_chunks(n_cells, threads, [&](int lo, int hi) {
        std::vector<int> hits;
        for (int c = lo; c < hi; ++c) {
            for (int s = 0; s < samples_per_cell; ++s) {
                const flag::FlagPoint x = sample_point(*complex, c, s, seed);
                for (int k = 0; k < n_controls; ++k) {
                    const flag::FlagPoint y = flag::act(flows[k], x);
                    const int nearest =
                        complex->locate_and_ball(y.projector_stack(), epsilon, hits);
                    auto& targets = adjacency[k][c];
                    if (epsilon > 0.0)
                        targets.insert(targets.end(), hits.begin(), hits.end());
                    else
                        targets.push_back(nearest);
                }
            }
            for (int k = 0; k < n_controls; ++k) {
                auto& t = adjacency[k][c];
                std::sort(t.begin(), t.end());
                t.erase(std::unique(t.begin(), t.end()), t.end());
            }
        }
    });

    return CellGraph(std::move(complex), tau, epsilon,
                     std::vector<Eigen::VectorXd>(controls), samples_per_cell, seed,
                     std::move(adjacency));
}

bool LabeledSet::contains_cell(int c) const {
    return std::binary_search(cells.begin(), cells.end(), c);
}

bool LabeledSet::has_label(const weyl::WeylElement& w) const {
    return std::find(labels.begin(), labels.end(), w) != labels.end();
}

std::vector<LabeledSet> control_sets(const CellGraph& graph) {
    require(graph.epsilon() == 0.0, Error::Code::domain,
            "control_sets: requires an epsilon = 0 graph");
    return component_sets(graph, SetKind::control);
}

std::vector<LabeledSet> chain_control_sets(const CellGraph& graph) {
    require(graph.epsilon() > 0.0, Error::Code::domain,
            "chain_control_sets: requires an epsilon > 0 graph");
    return component_sets(graph, SetKind::chain);
}

std::vector<CorePoint> core_points(const dyn::BilinearSystem& sys,
                                   const weyl::ThetaSet& theta,
                                   const std::vector<dyn::ControlSample>& controls) {
    theta.validate(sys.n());
    const auto reps = weyl::coset_representatives(sys.n(), theta);
    std::vector<CorePoint> out;
    for (const auto& sample : controls) {
        if (!sample.interior) continue;
        std::optional<lie::SplitDecomposition> dec;
        try {
            dec = lie::split_decompose(sys.drift_matrix(sample.u));
        } catch (const Error& e) {
            if (e.code() == Error::Code::not_split) continue; // skip this control
            throw;
        }
        if (!dec->regular) continue;
        for (const auto& comp : lie::fixed_components(*dec, theta, reps))
            out.push_back({comp.weyl_label, comp.point});
    }
    return out;
}

std::vector<LabeledSet> label_sets(std::vector<LabeledSet> sets,
                                   const std::vector<CorePoint>& cores,
                                   const flag::CellComplex& complex) {
    for (const auto& core : cores) {
        const int cell = complex.locate(core.point);
        bool placed = false;
        for (auto& set : sets) {
            if (!set.contains_cell(cell)) continue;
            if (!set.has_label(core.label)) set.labels.push_back(core.label);
            if (!std::binary_search(set.core_cells.begin(), set.core_cells.end(), cell)) {
                set.core_cells.push_back(cell);
                std::sort(set.core_cells.begin(), set.core_cells.end());
            }
            placed = true;
            break; // sets are pairwise disjoint
        }
        require(placed, Error::Code::labeling,
                "label_sets: core point labeled " + core.label.to_string() +
                    " (cell " + std::to_string(cell) +
                    ") lies in no computed set; the resolution is too coarse");
    }
    for (auto& set : sets) std::sort(set.labels.begin(), set.labels.end());
    return sets;
}

weyl::ThetaSet semigroup_flag_type(const std::vector<LabeledSet>& labeled, int n) {
    const weyl::WeylElement e = weyl::WeylElement::identity(n);
    const LabeledSet* invariant = nullptr;
    for (const auto& set : labeled)
        if (set.has_label(e)) invariant = &set;
    require(invariant != nullptr, Error::Code::structure,
            "semigroup_flag_type: no set carries the identity label");

    const std::vector<weyl::WeylElement>& stabilizer = invariant->labels;

    std::vector<std::vector<int>> subsets{{}};
    for (int i = 1; i <= n - 1; ++i) {
        const auto snapshot = subsets;
        for (auto v : snapshot) {
            v.push_back(i);
            subsets.push_back(std::move(v));
        }
    }
    for (const auto& indices : subsets) {
        const weyl::ThetaSet theta{std::vector<int>(indices)};
        if (weyl::subgroup(n, theta) == stabilizer) return theta;
    }
    fail(Error::Code::structure,
         "semigroup_flag_type: label stabilizer is not a standard parabolic "
         "subgroup; refine the resolution or sampling");
}

std::vector<int> domain_of_attraction(const CellGraph& graph, const LabeledSet& target) {
    const auto rev = graph.reverse_union_adjacency();
    std::vector<char> seen(graph.cells(), 0);
    std::queue<int> frontier;
    for (int c : target.cells) {
        seen[c] = 1;
        frontier.push(c);
    }
    while (!frontier.empty()) {
        const int c = frontier.front();
        frontier.pop();
        for (int p : rev[c])
            if (!seen[p]) {
                seen[p] = 1;
                frontier.push(p);
            }
    }
    std::vector<int> out;
    for (int c = 0; c < graph.cells(); ++c)
        if (seen[c]) out.push_back(c);
    return out;
}

std::vector<int> condensation_sink_sets(const CellGraph& graph,
                                        const std::vector<LabeledSet>& sets) {
    std::vector<int> sinks;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        // forward reach of set s over the union relation
        std::vector<char> seen(graph.cells(), 0);
        std::queue<int> frontier;
        for (int c : sets[s].cells) {
            seen[c] = 1;
            frontier.push(c);
        }
        while (!frontier.empty()) {
            const int c = frontier.front();
            frontier.pop();
            for (int t : graph.union_adjacency()[c])
                if (!seen[t]) {
                    seen[t] = 1;
                    frontier.push(t);
                }
        }
        bool reaches_other = false;
        for (std::size_t o = 0; o < sets.size() && !reaches_other; ++o) {
            if (o == s) continue;
            for (int c : sets[o].cells)
                if (seen[c]) {
                    reaches_other = true;
                    break;
                }
        }
        if (!reaches_other) sinks.push_back(static_cast<int>(s));
    }
    return sinks;
}

namespace {

std::vector<int> symmetric_difference(const std::vector<int>& a,
                                      const std::vector<int>& b) {
    std::vector<int> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(out));
    return out;
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

const LabeledSet* find_labeled(const std::vector<LabeledSet>& sets,
                               const weyl::WeylElement& w) {
    for (const auto& s : sets)
        if (s.has_label(w)) return &s;
    return nullptr;
}

} // namespace

ExhaustionReport check_exhaustion_formulas(
    const dyn::BilinearSystem& sys, std::shared_ptr<const flag::CellComplex> complex_f,
    const std::map<int, std::shared_ptr<const flag::CellComplex>>& fiber_complexes,
    const weyl::WeylElement& w, const ExhaustionParams& params) {
    const int n = sys.n();
    require(n == 2 || n == 3, Error::Code::domain,
            "check_exhaustion_formulas: implemented for n in {2, 3}");
    require(complex_f->signature().theta().empty(), Error::Code::config,
            "check_exhaustion_formulas: complex must live on the maximal flag");
    require(w.n() == n, Error::Code::dimension, "check_exhaustion_formulas: bad w");

    ExhaustionReport report;
    const weyl::WeylElement w0 = weyl::longest_element(n);
    report.domain_word = weyl::reduced_word(weyl::compose(w0, w));
    report.attraction_word = weyl::reduced_word(w);
    report.domain_degenerate = report.domain_word.empty();

    // every referenced rank-one complex must be supplied
    std::set<int> letters(report.domain_word.begin(), report.domain_word.end());
    letters.insert(report.attraction_word.begin(), report.attraction_word.end());
    for (int i : letters)
        require(fiber_complexes.count(i), Error::Code::config,
                "check_exhaustion_formulas: missing rank-one subcomplex for root " +
                    std::to_string(i));
    std::map<int, std::vector<int>> maps;
    for (int i : letters)
        maps[i] = flag::fiber_cell_map(*complex_f, *fiber_complexes.at(i));

    std::vector<Eigen::VectorXd> plain;
    for (const auto& s : params.controls) plain.push_back(s.u);
    const double eps =
        params.epsilon > 0.0 ? params.epsilon : 1.5 * complex_f->radius();

    const CellGraph graph0 = build_graph(sys, complex_f, params.tau, 0.0, plain,
                                         params.samples_per_cell, params.seed,
                                         params.threads);
    const auto cores = core_points(sys, weyl::ThetaSet{}, params.controls);
    const auto controls = label_sets(control_sets(graph0), cores, *complex_f);

    const LabeledSet* dw = find_labeled(controls, w);
    const LabeledSet* dw0 = find_labeled(controls, w0);
    require(dw != nullptr && dw0 != nullptr, Error::Code::labeling,
            "check_exhaustion_formulas: control sets for w and w0 were not found");

    const std::vector<int> attraction = domain_of_attraction(graph0, *dw);
    std::vector<int> rhs = dw0->cells;
    for (int i : report.domain_word)
        rhs = flag::fiber_saturate_with_map(rhs, maps.at(i), complex_f->size());
    report.domain_symmetric_difference =
        static_cast<int>(symmetric_difference(attraction, rhs).size());
    report.domain_within_band = subset_of(attraction, complex_f->dilate(rhs)) &&
                                subset_of(rhs, complex_f->dilate(attraction));

    const CellGraph graph_eps = build_graph(sys, complex_f, params.tau, eps, plain,
                                            params.samples_per_cell, params.seed,
                                            params.threads);
    const auto chains = label_sets(chain_control_sets(graph_eps), cores, *complex_f);
    const LabeledSet* ew = find_labeled(chains, w);
    const LabeledSet* e1 = find_labeled(chains, weyl::WeylElement::identity(n));
    require(ew != nullptr && e1 != nullptr, Error::Code::labeling,
            "check_exhaustion_formulas: chain sets for w and the identity missing");

    std::vector<int> chain_rhs = e1->cells;
    for (int i : report.attraction_word)
        chain_rhs = flag::fiber_saturate_with_map(chain_rhs, maps.at(i),
                                                  complex_f->size());
    int violations = 0;
    for (int c : ew->cells)
        if (!std::binary_search(chain_rhs.begin(), chain_rhs.end(), c)) ++violations;
    report.attraction_violations = violations;
    return report;
}

} // namespace flagctl::setfinder
