#pragma once

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flagctl/dynamics.hpp"
#include "flagctl/setfinder.hpp"

namespace flagctl::harness {

/// Names accepted in RunConfig::checks, in execution order.
const std::vector<std::string>& registered_checks();

struct RunConfig {
    dyn::BilinearSystem system;
    weyl::ThetaSet theta{};
    int resolution = 0;
    int samples_per_cell = 3;
    int control_level = 1;
    double tau = 0.5;
    std::optional<double> epsilon{}; // explicit chain-jump size
    double epsilon_factor = 1.5;     // x covering radius when epsilon is absent
    std::uint64_t seed = 1;
    std::vector<std::string> checks{};
    std::string cache_dir{};
    std::string csv_path{};
    int threads = 0;

    explicit RunConfig(dyn::BilinearSystem sys) : system(std::move(sys)) {}

    void validate() const; // throws Error::Code::config
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::ordered_json to_json() const;
};

struct CheckResult {
    std::string name;
    std::string status; // "pass" | "fail" | "skip"
    std::string reason; // context for skip / fail
    nlohmann::ordered_json measured = nlohmann::ordered_json::object();
    nlohmann::ordered_json tolerance = nlohmann::ordered_json::object();
    double runtime_s = 0.0;
};

/// Every chain control set must fully contain at least one control set.
CheckResult check_containment(const std::vector<setfinder::LabeledSet>& controls,
                              const std::vector<setfinder::LabeledSet>& chains);

/// Set counts must match the double-coset counts predicted by the
/// inferred flag types. Skips when inference failed upstream.
CheckResult check_counts(int n, const weyl::ThetaSet& theta,
                         const std::optional<weyl::ThetaSet>& theta_s,
                         const std::optional<weyl::ThetaSet>& theta_phi,
                         const std::vector<setfinder::LabeledSet>& controls,
                         const std::vector<setfinder::LabeledSet>& chains);

/// When the two flag types agree, every matched control/chain pair must
/// coincide up to Hausdorff distance 2 * radius + epsilon; when they
/// differ, some chain set must strictly exceed the dilated closure of
/// every control set it contains.
CheckResult check_closure(const std::vector<setfinder::LabeledSet>& controls,
                          const std::vector<setfinder::LabeledSet>& chains,
                          const flag::CellComplex& complex,
                          const std::optional<weyl::ThetaSet>& theta_s,
                          const std::optional<weyl::ThetaSet>& theta_phi,
                          double epsilon);

struct VerificationReport {
    nlohmann::ordered_json config;
    dyn::AccessibilityReport accessibility;
    std::shared_ptr<const flag::CellComplex> complex;
    std::string complex_file;
    double epsilon = 0.0;
    std::vector<setfinder::LabeledSet> control_sets;
    std::vector<setfinder::LabeledSet> chain_sets;
    std::optional<weyl::ThetaSet> flag_type_s;
    std::optional<weyl::ThetaSet> flag_type_phi;
    std::string flag_type_error;
    std::vector<CheckResult> checks;

    bool all_passed() const; // no failing check
    nlohmann::ordered_json to_json() const;
};

/// Full pipeline: discretize, build graphs, compute and label sets, infer
/// flag types, run the requested checks. Aborts with a structured message
/// naming the failing stage.
VerificationReport run(const RunConfig& config);

void write_report(const VerificationReport& report, const std::string& path);
/// One row per cell: ids of the containing control / chain set (or -1)
/// plus the center frame columns spanning the flag members.
void write_csv(const VerificationReport& report, const std::string& path);

} // namespace flagctl::harness
