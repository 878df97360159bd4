#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "flagctl/cell_complex.hpp"
#include "flagctl/dynamics.hpp"
#include "flagctl/lie_structure.hpp"
#include "flagctl/weyl.hpp"

namespace flagctl::setfinder {

/// Control-labeled one-step transition relation between cells: the edge
/// (c, u, c') exists iff some sample point of c flows in time tau under
/// the constant control u to a point that lands in c' (epsilon = 0) or
/// within epsilon of c's center (epsilon > 0; the landing cell is always
/// included). Deterministic given (complex, system, tau, epsilon,
/// controls, samples_per_cell, seed), independent of the worker count.
class CellGraph {
public:
    CellGraph(std::shared_ptr<const flag::CellComplex> complex, double tau,
              double epsilon, std::vector<Eigen::VectorXd> controls,
              int samples_per_cell, std::uint64_t seed,
              std::vector<std::vector<std::vector<int>>> adjacency);

    const flag::CellComplex& complex() const { return *complex_; }
    std::shared_ptr<const flag::CellComplex> complex_ptr() const { return complex_; }
    double tau() const { return tau_; }
    double epsilon() const { return epsilon_; }
    const std::vector<Eigen::VectorXd>& controls() const { return controls_; }
    int samples_per_cell() const { return samples_per_cell_; }
    std::uint64_t seed() const { return seed_; }

    int cells() const { return complex_->size(); }
    /// Sorted, deduplicated targets of cell c under control k.
    const std::vector<int>& targets(int control, int c) const {
        return adjacency_.at(control).at(c);
    }
    /// Union of the per-control relations.
    const std::vector<std::vector<int>>& union_adjacency() const { return union_adj_; }
    std::vector<std::vector<int>> reverse_union_adjacency() const;
    std::size_t edge_count() const;
    bool self_edge_under_all_controls(int c) const;

private:
    std::shared_ptr<const flag::CellComplex> complex_;
    double tau_;
    double epsilon_;
    std::vector<Eigen::VectorXd> controls_;
    int samples_per_cell_;
    std::uint64_t seed_;
    std::vector<std::vector<std::vector<int>>> adjacency_; // [control][cell]
    std::vector<std::vector<int>> union_adj_;
};

CellGraph build_graph(const dyn::BilinearSystem& sys,
                      std::shared_ptr<const flag::CellComplex> complex, double tau,
                      double epsilon, const std::vector<Eigen::VectorXd>& controls,
                      int samples_per_cell, std::uint64_t seed, int threads = 0);

enum class SetKind { control, chain };

/// A computed control or chain control set: a strongly connected block of
/// cells, with the Weyl labels of the core points it captured.
struct LabeledSet {
    std::vector<int> cells; // sorted
    SetKind kind = SetKind::control;
    std::vector<weyl::WeylElement> labels; // sorted unique, filled by label_sets
    std::vector<int> core_cells;           // sorted unique
    bool contains_cell(int c) const;
    bool has_label(const weyl::WeylElement& w) const;
};

/// Strongly connected components of the union relation of an epsilon = 0
/// graph, dropping transient one-cell components (kept only when they
/// self-loop under every control). Inner approximations of the control
/// sets with nonempty interior, up to cell resolution.
std::vector<LabeledSet> control_sets(const CellGraph& graph);

/// Same component computation on an epsilon > 0 graph: the discretized
/// outer approximation of the chain control sets.
std::vector<LabeledSet> chain_control_sets(const CellGraph& graph);

struct CorePoint {
    weyl::WeylElement label; // canonical representative of w W_Theta
    flag::FlagPoint point;
};

/// Core points: for every strictly interior sampled control whose drift
/// matrix splits with a regular spectrum, the fixed flags of its flow,
/// one per coset representative of W / W_Theta. Empty when no interior
/// control is split regular.
std::vector<CorePoint> core_points(const dyn::BilinearSystem& sys,
                                   const weyl::ThetaSet& theta,
                                   const std::vector<dyn::ControlSample>& controls);

/// Attach to every set the labels of the core points whose cell it
/// contains. Throws Error::Code::labeling if some core point's cell lies
/// in no set (resolution too coarse).
std::vector<LabeledSet> label_sets(std::vector<LabeledSet> sets,
                                   const std::vector<CorePoint>& cores,
                                   const flag::CellComplex& complex);

/// The flag type of the semigroup: the theta whose Weyl subgroup equals
/// the label set of the invariant (identity-labeled) set. Requires sets
/// labeled on the maximal flag. Throws Error::Code::structure when the
/// stabilizer is not a standard parabolic subgroup.
weyl::ThetaSet semigroup_flag_type(const std::vector<LabeledSet>& labeled, int n);

/// Cells with a directed path into the target (target included).
std::vector<int> domain_of_attraction(const CellGraph& graph, const LabeledSet& target);

/// Indices of the labeled sets that cannot reach any other labeled set
/// (sinks of the condensation order restricted to labeled sets).
std::vector<int> condensation_sink_sets(const CellGraph& graph,
                                        const std::vector<LabeledSet>& sets);

struct ExhaustionParams {
    double tau = 0.5;
    double epsilon = 0.0; // <= 0 means 1.5 * covering radius
    std::vector<dyn::ControlSample> controls;
    int samples_per_cell = 3;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct ExhaustionReport {
    std::vector<int> domain_word;     // reduced word driving the domain formula
    std::vector<int> attraction_word; // reduced word of w
    bool domain_degenerate = false;   // empty domain word: reported, not asserted
    int domain_symmetric_difference = 0;
    bool domain_within_band = false; // symmetric difference inside one-cell dilations
    int attraction_violations = 0;   // chain-set cells escaping the fiber saturation
};

/// Compares the backward-reachability domain of the control set labeled w
/// against the fiber-saturation formula applied to the repeller-labeled
/// set, and checks the chain-set counterpart containment. Maximal flag
/// only, n in {2, 3}.
ExhaustionReport check_exhaustion_formulas(
    const dyn::BilinearSystem& sys, std::shared_ptr<const flag::CellComplex> complex_f,
    const std::map<int, std::shared_ptr<const flag::CellComplex>>& fiber_complexes,
    const weyl::WeylElement& w, const ExhaustionParams& params);

} // namespace flagctl::setfinder
