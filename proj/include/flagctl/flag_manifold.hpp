#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flagctl/weyl.hpp"

namespace flagctl::flag {

/// Which nested-subspace dimensions a flag of R^n retains. The convention
/// is dims = {1..n-1} \ theta: removing alpha_i from the flag type forgets
/// the i-dimensional member. theta = {} is the maximal flag, theta = full
/// the one-point manifold.
class FlagSignature {
public:
    FlagSignature(int n, std::vector<int> dims);
    static FlagSignature from_theta(int n, const weyl::ThetaSet& theta);

    int n() const { return n_; }
    const std::vector<int>& dims() const { return dims_; }
    weyl::ThetaSet theta() const;
    bool degenerate() const { return dims_.empty(); } // single point

    /// Real dimension of the manifold: (n^2 - sum of squared block sizes)/2.
    int manifold_dim() const;
    /// Consecutive gaps of (0, dims..., n).
    std::vector<int> block_sizes() const;

    bool operator==(const FlagSignature&) const = default;

private:
    int n_ = 0;
    std::vector<int> dims_;
};

/// Point of a flag manifold, carried as an n x n orthonormal frame; the
/// d-dimensional member of the flag is the span of the first d columns.
/// Two frames represent the same point iff all their projectors agree.
class FlagPoint {
public:
    FlagPoint(Eigen::MatrixXd frame, FlagSignature signature);

    const Eigen::MatrixXd& frame() const { return frame_; }
    const FlagSignature& signature() const { return signature_; }

    /// Orthogonal projector onto the k-th flag member (k indexes dims()).
    Eigen::MatrixXd projector(int k) const;
    /// All projectors stacked into one flat vector, in dims order; the
    /// cell complex uses this layout for fast distance scans.
    Eigen::VectorXd projector_stack() const;

private:
    Eigen::MatrixXd frame_;
    FlagSignature signature_;
};

/// The standard flag of coordinate subspaces (identity frame).
FlagPoint base_point(const FlagSignature& signature);

/// max over flag members of the Frobenius distance between projectors;
/// a metric on the manifold.
double distance(const FlagPoint& x, const FlagPoint& y);
double distance_stacks(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const std::vector<int>& segment_sizes);

/// Left action of an invertible matrix: maps every flag member V to g V,
/// re-orthonormalizing so the frame stays orthonormal with the same
/// prefix spans. Throws Error::Code::singular when g (numerically) fails
/// to be invertible.
FlagPoint act(const Eigen::MatrixXd& g, const FlagPoint& x);

/// Canonical projection to a coarser flag type; requires theta(x) to be a
/// subset of theta2 (the projection forgets the dims dropped by theta2).
FlagPoint project(const FlagPoint& x, const weyl::ThetaSet& theta2);

/// Deterministic QR with positive diagonal R; shared by act and the
/// discretization. Throws Error::Code::singular on rank deficiency.
Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& m);

} // namespace flagctl::flag
