#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "flagctl/flag_manifold.hpp"

namespace flagctl::flag {

/// Cell decomposition of a flag manifold: a deterministic set of center
/// points with the nearest-center membership rule (ties go to the lowest
/// index) and an empirically measured covering radius.
class CellComplex {
public:
    CellComplex(FlagSignature signature, std::vector<FlagPoint> centers,
                double radius, int resolution, std::uint64_t seed);

    const FlagSignature& signature() const { return signature_; }
    int size() const { return static_cast<int>(centers_.size()); }
    const FlagPoint& center(int c) const { return centers_.at(c); }
    double radius() const { return radius_; }
    int resolution() const { return resolution_; }
    std::uint64_t seed() const { return seed_; }

    /// Cell of x: nearest center in the flag metric.
    int locate(const FlagPoint& x) const;
    int locate_stack(const Eigen::VectorXd& stack) const;

    /// Cells whose center lies strictly within eps of x. The nearest cell
    /// is always part of the result.
    std::vector<int> ball(const FlagPoint& x, double eps) const;
    /// Combined scan: returns the nearest cell and fills `hits` with all
    /// cells at distance < eps (nearest included). eps <= 0 yields just
    /// the nearest cell.
    int locate_and_ball(const Eigen::VectorXd& stack, double eps,
                        std::vector<int>& hits) const;

    /// Cells whose covering balls can overlap c's (center distance
    /// <= 2.5 * radius); used for one-cell dilations.
    const std::vector<int>& neighbors(int c) const { return neighbors_.at(c); }

    /// Dilate a sorted cell set by its neighbor lists.
    std::vector<int> dilate(const std::vector<int>& cells) const;

    nlohmann::json to_json() const;
    static std::shared_ptr<const CellComplex> from_json(const nlohmann::json& j);

private:
    void build_index();

    FlagSignature signature_;
    std::vector<FlagPoint> centers_;
    double radius_ = 0.0;
    int resolution_ = 0;
    std::uint64_t seed_ = 0;

    std::vector<int> segment_sizes_;                         // n^2 per flag level
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> stacks_;
    std::vector<std::vector<int>> neighbors_;
};

/// Deterministic cell decomposition. For the projective line the centers
/// form a uniform angle grid; otherwise they come from a seeded Halton
/// sample pushed through QR. The covering radius is measured with a dense
/// probe sample from the same sequence. Degenerate signatures (one-point
/// manifolds) yield a single cell.
std::shared_ptr<const CellComplex> discretize(const FlagSignature& signature,
                                              int resolution, std::uint64_t seed,
                                              int threads = 0);

/// Saturate a set of maximal-flag cells by the fibers of the projection to
/// the rank-one flag manifold of the i-th simple root: keep every cell
/// whose image cell is hit by the image of the input set.
std::vector<int> fiber_saturate(const std::vector<int>& cells, int i,
                                const CellComplex& complex_f,
                                const CellComplex& complex_fi);

/// Cell-to-cell projection map used by fiber_saturate; exposed so repeated
/// saturations can reuse it.
std::vector<int> fiber_cell_map(const CellComplex& complex_f,
                                const CellComplex& complex_fi);
std::vector<int> fiber_saturate_with_map(const std::vector<int>& cells,
                                         const std::vector<int>& map,
                                         int total_cells);

} // namespace flagctl::flag
