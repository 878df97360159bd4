// Command-line front end: analyze / check run the verification pipeline on
// a JSON config, weyl prints the group combinatorics. Exit codes: 0 all
// requested checks passed, 1 some check failed, 2 configuration or
// pipeline error.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "flagctl/errors.hpp"
#include "flagctl/harness.hpp"
#include "flagctl/weyl.hpp"

namespace {

using namespace flagctl;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ','))
        if (!token.empty()) out.push_back(std::stoi(token));
    return out;
}

int run_weyl(int n, const std::string& cosets, const std::string& word_perm) {
    nlohmann::ordered_json j;
    j["n"] = n;
    const auto all = weyl::all_elements(n);
    std::cout << "|W| = " << all.size() << "\n";
    j["order"] = all.size();
    const auto w0 = weyl::longest_element(n);
    std::cout << "w0 = " << w0.to_string() << ", length " << w0.length() << "\n";
    j["longest_element"] = w0.one_line();

    if (!cosets.empty()) {
        const auto semi = cosets.find(';');
        require(semi != std::string::npos, Error::Code::config,
                "--cosets expects 'L;R' with comma-separated indices");
        const weyl::ThetaSet left{parse_int_list(cosets.substr(0, semi))};
        const weyl::ThetaSet right{parse_int_list(cosets.substr(semi + 1))};
        left.validate(n);
        right.validate(n);
        const auto blocks = weyl::double_cosets(n, left, right);
        std::cout << "double cosets W_" << left.to_string() << " \\ W / W_"
                  << right.to_string() << ": " << blocks.size() << " block(s)\n";
        nlohmann::ordered_json jblocks = nlohmann::ordered_json::array();
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            std::cout << "  block " << b << " (size " << blocks[b].size() << "):";
            nlohmann::ordered_json jb = nlohmann::ordered_json::array();
            for (const auto& w : blocks[b]) {
                std::cout << ' ' << w.to_string();
                jb.push_back(w.one_line());
            }
            std::cout << "\n";
            jblocks.push_back(std::move(jb));
        }
        j["cosets"] = {{"left", left.indices()},
                       {"right", right.indices()},
                       {"count", blocks.size()},
                       {"blocks", std::move(jblocks)}};
    }

    if (!word_perm.empty()) {
        const auto w = weyl::WeylElement::from_one_line(parse_int_list(word_perm));
        require(w.n() == n, Error::Code::config,
                "--word permutation length disagrees with --n");
        const auto word = weyl::reduced_word(w);
        std::cout << "reduced word of " << w.to_string() << ":";
        for (int i : word) std::cout << " s" << i;
        std::cout << " (length " << word.size() << ")\n";
        j["word"] = {{"permutation", w.one_line()}, {"letters", word}};
    }

    std::cout << j.dump(2) << "\n";
    return 0;
}

void print_check_lines(const harness::VerificationReport& report) {
    std::cout << "control sets: " << report.control_sets.size()
              << ", chain sets: " << report.chain_sets.size() << "\n";
    if (report.flag_type_s)
        std::cout << "flag type Theta(S) = " << report.flag_type_s->to_string()
                  << ", Theta(phi) = " << report.flag_type_phi->to_string() << "\n";
    else if (!report.flag_type_error.empty())
        std::cout << "flag-type inference failed: " << report.flag_type_error << "\n";
    for (const auto& c : report.checks) {
        std::cout << "[" << c.status << "] " << c.name;
        if (!c.reason.empty()) std::cout << " (" << c.reason << ")";
        std::cout << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"control sets and chain control sets on flag manifolds of SL(n,R)"};
    app.require_subcommand(1);

    std::string config_path, out_path, csv_path, theta_arg, checks_arg;
    int n = 3;
    std::string cosets_arg, word_arg;

    auto* analyze = app.add_subcommand("analyze", "run the full pipeline on a config");
    analyze->add_option("--config", config_path, "JSON run configuration")->required();
    analyze->add_option("--theta", theta_arg, "override theta, e.g. '1,2'");
    analyze->add_option("--out", out_path, "write the JSON report here");
    analyze->add_option("--csv", csv_path, "write per-cell set membership CSV");

    auto* check = app.add_subcommand("check", "run selected checks on a config");
    check->add_option("--config", config_path, "JSON run configuration")->required();
    check->add_option("--checks", checks_arg,
                      "comma-separated subset of containment,counts,closure,exhaustion");

    auto* weyl_cmd = app.add_subcommand("weyl", "Weyl group counts, cosets, words");
    weyl_cmd->add_option("--n", n, "rank of SL(n,R), 2..4")->required();
    weyl_cmd->add_option("--cosets", cosets_arg, "double cosets 'L;R', e.g. '1;2'");
    weyl_cmd->add_option("--word", word_arg, "reduced word of a permutation '3,2,1'");

    CLI11_PARSE(app, argc, argv);

    try {
        if (weyl_cmd->parsed()) return run_weyl(n, cosets_arg, word_arg);

        harness::RunConfig cfg = harness::RunConfig::load(config_path);
        if (!theta_arg.empty()) {
            cfg.theta = flagctl::weyl::ThetaSet{parse_int_list(theta_arg)};
            cfg.validate();
        }
        if (check->parsed() && !checks_arg.empty()) {
            cfg.checks.clear();
            std::string token;
            std::istringstream in(checks_arg);
            while (std::getline(in, token, ','))
                if (!token.empty()) cfg.checks.push_back(token);
            cfg.validate();
        }

        const harness::VerificationReport report = harness::run(cfg);
        print_check_lines(report);
        if (analyze->parsed()) {
            if (!out_path.empty()) {
                harness::write_report(report, out_path);
                std::cout << "report written to " << out_path << "\n";
            }
            if (!csv_path.empty()) {
                harness::write_csv(report, csv_path);
                std::cout << "csv written to " << csv_path << "\n";
            }
        }
        return report.all_passed() ? 0 : 1;
    } catch (const flagctl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
