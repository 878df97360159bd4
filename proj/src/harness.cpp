#include "flagctl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "flagctl/errors.hpp"

namespace flagctl::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::ordered_json labels_json(const std::vector<weyl::WeylElement>& labels) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& w : labels) out.push_back(w.one_line());
    return out;
}

nlohmann::ordered_json set_json(const setfinder::LabeledSet& s) {
    nlohmann::ordered_json j;
    j["size"] = s.cells.size();
    j["labels"] = labels_json(s.labels);
    j["core_cells"] = s.core_cells;
    j["cells"] = s.cells;
    return j;
}

double hausdorff(const flag::CellComplex& complex, const std::vector<int>& a,
                 const std::vector<int>& b) {
    auto one_sided = [&](const std::vector<int>& from, const std::vector<int>& to) {
        double worst = 0.0;
        for (int c : from) {
            double best = std::numeric_limits<double>::infinity();
            for (int d : to)
                best = std::min(best, flag::distance(complex.center(c), complex.center(d)));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    return std::max(one_sided(a, b), one_sided(b, a));
}

// max distance from a cell of `outer` to the cell set `inner`
double excess(const flag::CellComplex& complex, const std::vector<int>& outer,
              const std::vector<int>& inner) {
    double worst = 0.0;
    for (int c : outer) {
        double best = std::numeric_limits<double>::infinity();
        for (int d : inner)
            best = std::min(best, flag::distance(complex.center(c), complex.center(d)));
        worst = std::max(worst, best);
    }
    return worst;
}

std::string theta_key(const weyl::ThetaSet& theta) {
    std::string key;
    for (int i : theta.indices()) key += std::to_string(i);
    return key.empty() ? "none" : key;
}

} // namespace

const std::vector<std::string>& registered_checks() {
    static const std::vector<std::string> names{"containment", "counts", "closure",
                                                "exhaustion"};
    return names;
}

void RunConfig::validate() const {
    require(resolution >= 8, Error::Code::config,
            "config: 'resolution' must be >= 8");
    require(samples_per_cell >= 1, Error::Code::config,
            "config: 'samples_per_cell' must be >= 1");
    require(control_level >= 1, Error::Code::config,
            "config: 'control_level' must be >= 1");
    require(tau > 0.0, Error::Code::config, "config: 'tau' must be positive");
    if (epsilon) require(*epsilon >= 0.0, Error::Code::config,
                         "config: 'epsilon' must be >= 0");
    require(epsilon_factor > 0.0, Error::Code::config,
            "config: 'epsilon_factor' must be positive");
    theta.validate(system.n());
    const auto& reg = registered_checks();
    for (const auto& c : checks)
        require(std::find(reg.begin(), reg.end(), c) != reg.end(),
                Error::Code::config, "config: unknown check '" + c + "'");
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    require(j.is_object(), Error::Code::config, "config: root must be an object");
    require(j.contains("system"), Error::Code::config,
            "config: missing field 'system'");
    RunConfig cfg(dyn::BilinearSystem::from_json(j.at("system")));
    if (j.contains("theta"))
        cfg.theta = weyl::ThetaSet(j.at("theta").get<std::vector<int>>());
    require(j.contains("resolution"), Error::Code::config,
            "config: missing field 'resolution'");
    cfg.resolution = j.at("resolution").get<int>();
    cfg.samples_per_cell = j.value("samples_per_cell", cfg.samples_per_cell);
    cfg.control_level = j.value("control_level", cfg.control_level);
    cfg.tau = j.value("tau", cfg.tau);
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    cfg.epsilon_factor = j.value("epsilon_factor", cfg.epsilon_factor);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("checks"))
        cfg.checks = j.at("checks").get<std::vector<std::string>>();
    cfg.cache_dir = j.value("cache_dir", cfg.cache_dir);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Error::Code::config, "config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Error::Code::config, "config: invalid JSON in '" + path + "': " + e.what());
    }
    return from_json(j);
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["system"] = system.to_json();
    j["theta"] = theta.indices();
    j["resolution"] = resolution;
    j["samples_per_cell"] = samples_per_cell;
    j["control_level"] = control_level;
    j["tau"] = tau;
    if (epsilon)
        j["epsilon"] = *epsilon;
    else
        j["epsilon_factor"] = epsilon_factor;
    j["seed"] = seed;
    j["checks"] = checks;
    if (!cache_dir.empty()) j["cache_dir"] = cache_dir;
    j["threads"] = threads;
    return j;
}

CheckResult check_containment(const std::vector<setfinder::LabeledSet>& controls,
                              const std::vector<setfinder::LabeledSet>& chains) {
    const auto start = Clock::now();
    CheckResult result;
    result.name = "containment";
    int violations = 0;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < chains.size(); ++e) {
        int found = -1;
        for (std::size_t d = 0; d < controls.size(); ++d) {
            if (std::includes(chains[e].cells.begin(), chains[e].cells.end(),
                              controls[d].cells.begin(), controls[d].cells.end())) {
                found = static_cast<int>(d);
                break;
            }
        }
        if (found < 0) ++violations;
        pairs.push_back({{"chain", e}, {"contains_control", found}});
    }
    result.measured["chain_sets"] = chains.size();
    result.measured["control_sets"] = controls.size();
    result.measured["violations"] = violations;
    result.measured["pairs"] = std::move(pairs);
    result.status = violations == 0 ? "pass" : "fail";
    if (violations > 0)
        result.reason = std::to_string(violations) +
                        " chain set(s) contain no whole control set";
    result.runtime_s = seconds_since(start);
    return result;
}

CheckResult check_counts(int n, const weyl::ThetaSet& theta,
                         const std::optional<weyl::ThetaSet>& theta_s,
                         const std::optional<weyl::ThetaSet>& theta_phi,
                         const std::vector<setfinder::LabeledSet>& controls,
                         const std::vector<setfinder::LabeledSet>& chains) {
    const auto start = Clock::now();
    CheckResult result;
    result.name = "counts";
    if (!theta_s || !theta_phi) {
        result.status = "skip";
        result.reason = "flag-type inference failed upstream";
        result.runtime_s = seconds_since(start);
        return result;
    }
    const auto expected_controls = weyl::double_cosets(n, *theta_s, theta).size();
    const auto expected_chains = weyl::double_cosets(n, *theta_phi, theta).size();
    result.measured["control_sets"] = controls.size();
    result.measured["chain_sets"] = chains.size();
    result.measured["expected_control_sets"] = expected_controls;
    result.measured["expected_chain_sets"] = expected_chains;
    result.measured["flag_type_S"] = theta_s->indices();
    result.measured["flag_type_phi"] = theta_phi->indices();
    const bool ok =
        controls.size() == expected_controls && chains.size() == expected_chains;
    result.status = ok ? "pass" : "fail";
    if (!ok) result.reason = "set counts disagree with the double-coset counts";
    result.runtime_s = seconds_since(start);
    return result;
}

CheckResult check_closure(const std::vector<setfinder::LabeledSet>& controls,
                          const std::vector<setfinder::LabeledSet>& chains,
                          const flag::CellComplex& complex,
                          const std::optional<weyl::ThetaSet>& theta_s,
                          const std::optional<weyl::ThetaSet>& theta_phi,
                          double epsilon) {
    const auto start = Clock::now();
    CheckResult result;
    result.name = "closure";
    if (!theta_s || !theta_phi) {
        result.status = "skip";
        result.reason = "flag-type inference failed upstream";
        result.runtime_s = seconds_since(start);
        return result;
    }
    const double bound = 2.0 * complex.radius() + epsilon;
    result.tolerance["hausdorff"] = bound;

    if (*theta_s == *theta_phi) {
        nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
        double worst = 0.0;
        for (const auto& d : controls) {
            const setfinder::LabeledSet* match = nullptr;
            for (const auto& e : chains)
                for (const auto& w : d.labels)
                    if (e.has_label(w)) match = &e;
            if (match == nullptr) {
                result.status = "skip";
                result.reason = "control set with labels " +
                                labels_json(d.labels).dump() +
                                " has no matching chain set";
                result.runtime_s = seconds_since(start);
                return result;
            }
            const double gap = hausdorff(complex, d.cells, match->cells);
            worst = std::max(worst, gap);
            gaps.push_back({{"labels", labels_json(d.labels)}, {"hausdorff", gap}});
        }
        result.measured["pairs"] = std::move(gaps);
        result.measured["worst_gap"] = worst;
        result.status = worst <= bound ? "pass" : "fail";
        if (worst > bound)
            result.reason = "closure gap " + std::to_string(worst) +
                            " exceeds the discretization bound";
    } else {
        // differing flag types: some chain set must strictly exceed the
        // dilated closure of every control set it contains
        bool witness = false;
        for (const auto& e : chains) {
            bool contains_some = false;
            bool exceeds_all = true;
            for (const auto& d : controls) {
                if (!std::includes(e.cells.begin(), e.cells.end(), d.cells.begin(),
                                   d.cells.end()))
                    continue;
                contains_some = true;
                if (excess(complex, e.cells, d.cells) <= bound) exceeds_all = false;
            }
            if (contains_some && exceeds_all) witness = true;
        }
        result.measured["strictly_larger_chain_set_found"] = witness;
        result.status = witness ? "pass" : "fail";
        if (!witness)
            result.reason = "flag types differ but no chain set strictly exceeds "
                            "its control sets";
    }
    result.runtime_s = seconds_since(start);
    return result;
}

namespace {

struct Pipeline {
    const RunConfig& cfg;
    VerificationReport report;
    std::vector<dyn::ControlSample> samples;
    std::vector<Eigen::VectorXd> plain_controls;
    std::shared_ptr<const flag::CellComplex> complex;
    std::optional<setfinder::CellGraph> graph0;
    std::optional<setfinder::CellGraph> graph_eps;

    explicit Pipeline(const RunConfig& c) : cfg(c) {}

    [[noreturn]] static void stage_fail(const std::string& stage, const Error& e) {
        throw Error(e.code(), "stage '" + stage + "': " + e.what());
    }

    std::shared_ptr<const flag::CellComplex>
    cached_discretize(const flag::FlagSignature& sig, std::string* file_out) {
        namespace fs = std::filesystem;
        std::string file;
        if (!cfg.cache_dir.empty()) {
            std::ostringstream name;
            name << "complex_n" << sig.n() << "_theta" << theta_key(sig.theta())
                 << "_r" << cfg.resolution << "_s" << cfg.seed << ".json";
            file = (fs::path(cfg.cache_dir) / name.str()).string();
            if (fs::exists(file)) {
                std::ifstream in(file);
                nlohmann::json j;
                in >> j;
                auto loaded = flag::CellComplex::from_json(j);
                if (loaded->signature() == sig &&
                    loaded->resolution() == cfg.resolution &&
                    loaded->seed() == cfg.seed) {
                    if (file_out) *file_out = file;
                    return loaded;
                }
            }
        }
        auto fresh = flag::discretize(sig, cfg.resolution, cfg.seed, cfg.threads);
        if (!file.empty()) {
            fs::create_directories(fs::path(file).parent_path());
            std::ofstream out(file);
            out << fresh->to_json().dump();
            if (file_out) *file_out = file;
        }
        return fresh;
    }

    void run_stages() {
        const int n = cfg.system.n();

        try {
            report.accessibility = dyn::accessibility_diagnostic(
                cfg.system, flag::FlagSignature::from_theta(n, cfg.theta), 100,
                cfg.seed);
        } catch (const Error& e) {
            stage_fail("accessibility", e);
        }

        try {
            complex = cached_discretize(flag::FlagSignature::from_theta(n, cfg.theta),
                                        &report.complex_file);
            report.complex = complex;
            report.epsilon =
                cfg.epsilon ? *cfg.epsilon : cfg.epsilon_factor * complex->radius();
        } catch (const Error& e) {
            stage_fail("discretize", e);
        }

        try {
            samples = dyn::control_samples(cfg.system.range(), cfg.control_level);
            for (const auto& s : samples) plain_controls.push_back(s.u);
        } catch (const Error& e) {
            stage_fail("controls", e);
        }

        try {
            graph0 = setfinder::build_graph(cfg.system, complex, cfg.tau, 0.0,
                                            plain_controls, cfg.samples_per_cell,
                                            cfg.seed, cfg.threads);
            if (report.epsilon > 0.0)
                graph_eps = setfinder::build_graph(cfg.system, complex, cfg.tau,
                                                   report.epsilon, plain_controls,
                                                   cfg.samples_per_cell, cfg.seed,
                                                   cfg.threads);
        } catch (const Error& e) {
            stage_fail("graphs", e);
        }

        try {
            report.control_sets = setfinder::control_sets(*graph0);
            if (graph_eps)
                report.chain_sets = setfinder::chain_control_sets(*graph_eps);
        } catch (const Error& e) {
            stage_fail("sets", e);
        }

        std::vector<setfinder::CorePoint> cores;
        try {
            cores = setfinder::core_points(cfg.system, cfg.theta, samples);
        } catch (const Error& e) {
            stage_fail("cores", e);
        }

        try {
            report.control_sets =
                setfinder::label_sets(std::move(report.control_sets), cores, *complex);
            report.chain_sets =
                setfinder::label_sets(std::move(report.chain_sets), cores, *complex);
        } catch (const Error& e) {
            stage_fail("labels", e);
        }

        infer_flag_types();
        run_checks();
    }

    void infer_flag_types() {
        const int n = cfg.system.n();
        const bool needed =
            cfg.theta.empty() ||
            std::find(cfg.checks.begin(), cfg.checks.end(), "counts") !=
                cfg.checks.end() ||
            std::find(cfg.checks.begin(), cfg.checks.end(), "closure") !=
                cfg.checks.end();
        if (!needed) return;

        try {
            if (cfg.theta.empty()) {
                report.flag_type_s =
                    setfinder::semigroup_flag_type(report.control_sets, n);
                report.flag_type_phi =
                    setfinder::semigroup_flag_type(report.chain_sets, n);
                return;
            }
            // inference lives on the maximal flag; rerun the set pipeline there
            auto max_complex =
                cached_discretize(flag::FlagSignature::from_theta(n, {}), nullptr);
            const double eps = cfg.epsilon
                                   ? *cfg.epsilon
                                   : cfg.epsilon_factor * max_complex->radius();
            auto g0 = setfinder::build_graph(cfg.system, max_complex, cfg.tau, 0.0,
                                             plain_controls, cfg.samples_per_cell,
                                             cfg.seed, cfg.threads);
            auto ge = setfinder::build_graph(cfg.system, max_complex, cfg.tau, eps,
                                             plain_controls, cfg.samples_per_cell,
                                             cfg.seed, cfg.threads);
            const auto max_cores =
                setfinder::core_points(cfg.system, weyl::ThetaSet{}, samples);
            const auto max_controls = setfinder::label_sets(
                setfinder::control_sets(g0), max_cores, *max_complex);
            const auto max_chains = setfinder::label_sets(
                setfinder::chain_control_sets(ge), max_cores, *max_complex);
            report.flag_type_s = setfinder::semigroup_flag_type(max_controls, n);
            report.flag_type_phi = setfinder::semigroup_flag_type(max_chains, n);
        } catch (const Error& e) {
            report.flag_type_error = e.what();
        }
    }

    void run_checks() {
        const int n = cfg.system.n();
        for (const auto& name : registered_checks()) {
            if (std::find(cfg.checks.begin(), cfg.checks.end(), name) ==
                cfg.checks.end())
                continue;
            if (!report.accessibility.ok()) {
                report.checks.push_back(
                    {name, "skip",
                     "local-accessibility diagnostic failed at " +
                         std::to_string(report.accessibility.deficient) +
                         " sample points",
                     {}, {}, 0.0});
                continue;
            }
            if (name == "containment") {
                report.checks.push_back(
                    check_containment(report.control_sets, report.chain_sets));
            } else if (name == "counts") {
                auto r = check_counts(n, cfg.theta, report.flag_type_s,
                                      report.flag_type_phi, report.control_sets,
                                      report.chain_sets);
                if (r.status == "skip" && !report.flag_type_error.empty())
                    r.reason += ": " + report.flag_type_error;
                report.checks.push_back(std::move(r));
            } else if (name == "closure") {
                auto r = check_closure(report.control_sets, report.chain_sets,
                                       *complex, report.flag_type_s,
                                       report.flag_type_phi, report.epsilon);
                if (r.status == "skip" && !report.flag_type_error.empty())
                    r.reason += ": " + report.flag_type_error;
                report.checks.push_back(std::move(r));
            } else if (name == "exhaustion") {
                report.checks.push_back(run_exhaustion());
            }
        }
    }

    CheckResult run_exhaustion() {
        const auto start = Clock::now();
        CheckResult result;
        result.name = "exhaustion";
        const int n = cfg.system.n();
        if (!cfg.theta.empty() || n > 3) {
            result.status = "skip";
            result.reason = "exhaustion check needs the maximal flag and n <= 3";
            result.runtime_s = seconds_since(start);
            return result;
        }
        try {
            std::map<int, std::shared_ptr<const flag::CellComplex>> fibers;
            for (int i = 1; i <= n - 1; ++i)
                fibers[i] = cached_discretize(
                    flag::FlagSignature::from_theta(n, weyl::ThetaSet{i}), nullptr);
            setfinder::ExhaustionParams params;
            params.tau = cfg.tau;
            params.epsilon = report.epsilon;
            params.controls = samples;
            params.samples_per_cell = cfg.samples_per_cell;
            params.seed = cfg.seed;
            params.threads = cfg.threads;
            const auto rep = setfinder::check_exhaustion_formulas(
                cfg.system, complex, fibers, weyl::WeylElement::identity(n), params);
            result.measured["domain_word"] = rep.domain_word;
            result.measured["domain_symmetric_difference"] =
                rep.domain_symmetric_difference;
            result.measured["domain_within_band"] = rep.domain_within_band;
            result.measured["domain_degenerate"] = rep.domain_degenerate;
            result.measured["attraction_violations"] = rep.attraction_violations;
            const bool ok = (rep.domain_degenerate || rep.domain_within_band) &&
                            rep.attraction_violations == 0;
            result.status = ok ? "pass" : "fail";
            if (!ok) result.reason = "exhaustion formulas violated beyond one cell";
        } catch (const Error& e) {
            result.status = "skip";
            result.reason = e.what();
        }
        result.runtime_s = seconds_since(start);
        return result;
    }
};

} // namespace

bool VerificationReport::all_passed() const {
    for (const auto& c : checks)
        if (c.status == "fail") return false;
    return true;
}

nlohmann::ordered_json VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config;
    j["accessibility"] = {{"points", accessibility.points},
                          {"deficient", accessibility.deficient},
                          {"algebra_dim", accessibility.algebra_dim},
                          {"manifold_dim", accessibility.manifold_dim},
                          {"ok", accessibility.ok()}};
    j["complex"] = {{"cells", complex ? complex->size() : 0},
                    {"radius", complex ? complex->radius() : 0.0},
                    {"file", complex_file}};
    j["epsilon"] = epsilon;
    nlohmann::ordered_json controls = nlohmann::ordered_json::array();
    for (const auto& s : control_sets) controls.push_back(set_json(s));
    j["control_sets"] = std::move(controls);
    nlohmann::ordered_json chains = nlohmann::ordered_json::array();
    for (const auto& s : chain_sets) chains.push_back(set_json(s));
    j["chain_sets"] = std::move(chains);
    j["flag_type_S"] =
        flag_type_s ? nlohmann::ordered_json(flag_type_s->indices()) : nullptr;
    j["flag_type_phi"] =
        flag_type_phi ? nlohmann::ordered_json(flag_type_phi->indices()) : nullptr;
    if (!flag_type_error.empty()) j["flag_type_inference_error"] = flag_type_error;

    if (flag_type_phi && complex) {
        // per-label hyperbolicity of the chain sets, from the criterion
        nlohmann::ordered_json hyp = nlohmann::ordered_json::object();
        const auto theta = complex->signature().theta();
        for (const auto& s : chain_sets)
            for (const auto& w : s.labels)
                hyp[w.to_string()] = weyl::is_hyperbolic_label(
                    complex->signature().n(), *flag_type_phi, w, theta);
        j["hyperbolic_labels"] = std::move(hyp);
    }

    nlohmann::ordered_json checks_json = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["status"] = c.status;
        if (!c.reason.empty()) cj["reason"] = c.reason;
        cj["measured"] = c.measured;
        cj["tolerance"] = c.tolerance;
        cj["runtime_s"] = c.runtime_s;
        checks_json.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks_json);
    j["passed"] = all_passed();
    return j;
}

VerificationReport run(const RunConfig& config) {
    config.validate();
    Pipeline pipeline(config);
    pipeline.report.config = config.to_json();
    pipeline.run_stages();
    return std::move(pipeline.report);
}

void write_report(const VerificationReport& report, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), Error::Code::config, "cannot write report to '" + path + "'");
    out << report.to_json().dump(2) << "\n";
}

void write_csv(const VerificationReport& report, const std::string& path) {
    require(report.complex != nullptr, Error::Code::config,
            "write_csv: report carries no complex");
    std::ofstream out(path);
    require(out.good(), Error::Code::config, "cannot write csv to '" + path + "'");
    const auto& complex = *report.complex;
    const auto& dims = complex.signature().dims();
    const int n = complex.signature().n();
    const int span = dims.empty() ? 0 : dims.back();

    out << "cell,control_set,chain_set";
    for (int col = 0; col < span; ++col)
        for (int row = 0; row < n; ++row) out << ",f" << col << "_" << row;
    out << "\n";
    for (int c = 0; c < complex.size(); ++c) {
        int control_id = -1, chain_id = -1;
        for (std::size_t s = 0; s < report.control_sets.size(); ++s)
            if (report.control_sets[s].contains_cell(c)) control_id = static_cast<int>(s);
        for (std::size_t s = 0; s < report.chain_sets.size(); ++s)
            if (report.chain_sets[s].contains_cell(c)) chain_id = static_cast<int>(s);
        out << c << "," << control_id << "," << chain_id;
        const auto& f = complex.center(c).frame();
        for (int col = 0; col < span; ++col)
            for (int row = 0; row < n; ++row) out << "," << f(row, col);
        out << "\n";
    }
}

} // namespace flagctl::harness
