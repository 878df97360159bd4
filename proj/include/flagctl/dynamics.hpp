#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <vector>

#include "flagctl/flag_manifold.hpp"

namespace flagctl::dyn {

/// Compact box of admissible control values with 0 strictly inside.
class ControlRange {
public:
    ControlRange(std::vector<double> lo, std::vector<double> hi);

    int m() const { return static_cast<int>(lo_.size()); }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }

    bool contains(const Eigen::VectorXd& u, double slack = 1e-12) const;

private:
    std::vector<double> lo_, hi_;
};

/// Right-invariant bilinear system: drift A plus control-scaled B_j, all
/// traceless, inducing flows on every flag manifold of SL(n,R).
class BilinearSystem {
public:
    BilinearSystem(Eigen::MatrixXd a, std::vector<Eigen::MatrixXd> b, ControlRange range);

    int n() const { return static_cast<int>(a_.rows()); }
    int m() const { return static_cast<int>(b_.size()); }
    const Eigen::MatrixXd& a() const { return a_; }
    const std::vector<Eigen::MatrixXd>& b() const { return b_; }
    const ControlRange& range() const { return range_; }

    /// A + sum u_j B_j; throws Error::Code::range for u outside the box.
    Eigen::MatrixXd drift_matrix(const Eigen::VectorXd& u) const;

    /// Time-reversed system: negates the drift and every control matrix.
    BilinearSystem backward() const;

    static BilinearSystem from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    Eigen::MatrixXd a_;
    std::vector<Eigen::MatrixXd> b_;
    ControlRange range_;
};

struct ControlStep {
    Eigen::VectorXd u;
    double dt = 0.0;
};
using ControlWord = std::vector<ControlStep>;

/// Product of the step exponentials, latest step leftmost.
Eigen::MatrixXd flow_matrix(const BilinearSystem& sys, const ControlWord& word);

/// Exact solution of the induced system under piecewise-constant controls:
/// applies exp(dt_k drift(u_k)) ... exp(dt_1 drift(u_1)) to the flag.
flag::FlagPoint flow_point(const BilinearSystem& sys, const flag::FlagPoint& x,
                           const ControlWord& word);

struct ControlSample {
    Eigen::VectorXd u;
    bool interior = false; // strictly inside the box
};

/// Deterministic grid over the box: per axis the endpoints, 0 and level-1
/// evenly spaced points between each endpoint and 0, combined over axes.
std::vector<ControlSample> control_samples(const ControlRange& range, int level);

/// Numerical test of the Lie-algebra rank condition: dimension of the
/// bracket closure of {A, B_j} pushed to the tangent space at sampled
/// flags. A diagnostic, not a proof.
struct AccessibilityReport {
    int points = 0;
    int deficient = 0;     // sampled flags with tangent rank < manifold dim
    int algebra_dim = 0;   // dimension of the bracket closure in sl(n)
    int manifold_dim = 0;
    bool ok() const { return deficient == 0; }
};

AccessibilityReport accessibility_diagnostic(const BilinearSystem& sys,
                                             const flag::FlagSignature& signature,
                                             int points, std::uint64_t seed);

} // namespace flagctl::dyn
