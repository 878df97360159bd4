#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "flagctl/flag_manifold.hpp"
#include "flagctl/weyl.hpp"

namespace flagctl::lie {

/// Shared numeric tolerances for the sl(n,R) structure computations.
namespace tol {
constexpr double trace = 1e-9; // relative trace-zero band
constexpr double lin = 1e-9;   // linear-algebra residuals
constexpr double root = 1e-9;  // relative root-vanishing band
} // namespace tol

/// The root e_i - e_j of sl(n,R), 0-based indices.
struct Root {
    int i = 0;
    int j = 0;
    bool operator==(const Root&) const = default;
};

/// Entries of a diagonal traceless matrix.
class CartanElement {
public:
    explicit CartanElement(std::vector<double> diag);

    int n() const { return static_cast<int>(diag_.size()); }
    const std::vector<double>& diag() const { return diag_; }
    double scale() const; // max absolute entry, floored at 1

    bool in_closed_chamber(double tol_root = tol::root) const; // non-increasing

private:
    std::vector<double> diag_;
};

/// The simple roots alpha_i = e_i - e_{i+1}, i = 1..n-1.
std::vector<Root> simple_roots(int n);
/// All positive roots e_i - e_j with i < j.
std::vector<Root> positive_roots(int n);

double eval_root(const Root& alpha, const CartanElement& h);

/// Indices i with alpha_i(H) = 0 within tolerance. Requires H in the
/// closed chamber.
weyl::ThetaSet flag_type_of(const CartanElement& h, double tol_root = tol::root);

/// X = g * diag(H) * g^{-1} with H sorted non-increasing; regular iff all
/// consecutive eigenvalue gaps clear the tolerance band.
struct SplitDecomposition {
    Eigen::MatrixXd g; // columns ordered by descending eigenvalue, det > 0
    CartanElement h;
    bool regular = false;
};

/// Split X into eigenbasis and chamber-ordered spectrum. Throws
/// Error::Code::not_split when the spectrum is not all-real or the matrix
/// fails to diagonalize within tolerance (Jordan blocks are rejected, not
/// approximated).
SplitDecomposition split_decompose(const Eigen::MatrixXd& x, double tolerance = tol::lin);

/// One connected component of the fixed-point set of the flow of exp(tX)
/// on the flag manifold of the given type, labeled by a Weyl double-coset
/// representative. For regular decompositions it is the single flag built
/// from eigenvector columns selected by the label.
struct FixedComponent {
    weyl::WeylElement weyl_label;
    flag::FlagPoint point; // representative
    int dimension = 0;
    /// Eigenvalue clusters as (first column, width) ranges of g.
    std::vector<std::pair<int, int>> blocks;
    /// profile[a][i] = dim(V_{dims[a]} intersect eigenspace block i);
    /// pins the component and decides membership.
    std::vector<std::vector<int>> profile;

    /// Membership test: pull p back through g and compare subspace
    /// intersection dimensions against the profile.
    bool contains(const flag::FlagPoint& p, double tolerance = 1e-6) const;

    Eigen::MatrixXd g_inverse; // cached for contains()
};

/// Components g * fix(H, w) for the given double-coset representatives,
/// which must represent W_{Theta(H)} \ W / W_Theta.
std::vector<FixedComponent> fixed_components(const SplitDecomposition& d,
                                             const weyl::ThetaSet& theta,
                                             const std::vector<weyl::WeylElement>& reps);

} // namespace flagctl::lie
