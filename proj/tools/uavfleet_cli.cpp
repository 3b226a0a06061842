// uavfleet: spare-fleet sizing and Monte Carlo mission trials.

#include "uavfleet/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace uavfleet;

namespace {

std::vector<SizingRule> parse_methods(const std::vector<std::string>& names)
{
    std::vector<SizingRule> out;
    for (const std::string& n : names) {
        if (n == "all")
            return {all_rules.begin(), all_rules.end()};
        const SizingRule r = parse_rule(n);
        if (std::find(out.begin(), out.end(), r) == out.end())
            out.push_back(r);
    }
    return out;
}

void check_mr(int m, double r)
{
    if (m < 1)
        throw ConfigError("m must be at least 1");
    if (!(r > 0.0))
        throw ConfigError("r must be positive");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spare-fleet sizing and mission simulation for persistent UAV coverage"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    ExperimentSpec spec;
    std::vector<std::string> method_names{"all"};
    int m = 0;
    double r = 0.0;
    int k = 0;
    int waves = 12;
    std::string mode = "worst_case";
    int h_max = 100;
    std::vector<double> eps_list;
    std::string out_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", spec.scenario_files, "Scenario file(s)")->required()->check(CLI::ExistingFile);
        sub->add_option("--methods", method_names, "Sizing rules (naive,duty_cycle,erlang_b,proposed or all)")
            ->delimiter(',');
        sub->add_option("--trials", spec.n_trials, "Trials per method")->check(CLI::PositiveNumber);
        sub->add_option("--seed", spec.base_seed, "Base seed");
        sub->add_option("--epsilon", spec.epsilon, "Erlang-B blocking target")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--out", spec.output_dir, "Output directory");
        sub->add_option("--jobs", spec.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    };

    CLI::App* size = app.add_subcommand("size", "Print k for every sizing rule");
    size->add_option("--m", m, "Active positions")->required();
    size->add_option("--r", r, "Recovery ratio R")->required();
    size->add_option("--epsilon", spec.epsilon, "Erlang-B blocking target")->check(CLI::Range(0.0, 1.0));

    CLI::App* run = app.add_subcommand("run", "Run Monte Carlo trials");
    add_common(run);
    run->add_flag("--dump-sites", spec.dump_sites, "Write the trial-0 site layout per scenario");
    run->add_flag("--event-log", spec.event_log, "Write the trial-0 event log per scenario and method");

    CLI::App* sweep = app.add_subcommand("sweep", "Run one scenario over a list of wind CVs");
    add_common(sweep);
    sweep->add_option("--cv-list", spec.cv_sweep, "Wind CV values")->delimiter(',')->required();

    CLI::App* reference = app.add_subcommand("reference", "Tabulate (1 - eps)^h");
    reference->add_option("--epsilon", eps_list, "Blocking probabilities")->delimiter(',');
    reference->add_option("--h-max", h_max, "Largest h (rows run 1..h-max)")->check(CLI::PositiveNumber);
    reference->add_option("--out", out_path, "CSV path (default: stdout)");

    CLI::App* oracle = app.add_subcommand("oracle", "Wave-by-wave occupancy of the analytic model");
    oracle->add_option("--m", m, "Active positions")->required();
    oracle->add_option("--r", r, "Recovery ratio R")->required();
    oracle->add_option("--k", k, "Spare count")->required();
    oracle->add_option("--mode", mode, "worst_case or staggered");
    oracle->add_option("--waves", waves, "Replacement waves to simulate")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*size) {
            check_mr(m, r);
            std::cout << format_size_table(m, r, spec.epsilon);
        } else if (*run) {
            spec.methods = parse_methods(method_names);
            cmd_run(spec, std::cerr);
        } else if (*sweep) {
            spec.methods = parse_methods(method_names);
            cmd_sweep(spec, std::cerr);
        } else if (*reference) {
            if (eps_list.empty())
                eps_list = {0.01};
            std::vector<double> hs;
            for (int h = 1; h <= h_max; ++h)
                hs.push_back(h);
            if (out_path.empty()) {
                write_reference_csv(std::cout, eps_list, hs);
            } else {
                std::ofstream out(out_path);
                if (!out)
                    throw ConfigError("cannot write " + out_path);
                write_reference_csv(out, eps_list, hs);
            }
        } else if (*oracle) {
            check_mr(m, r);
            if (k < 0)
                throw ConfigError("k must be non-negative");
            OccupancyTrace trace;
            if (mode == "worst_case" || mode == "worst-case")
                trace = worst_case_oracle(m, r, k, waves);
            else if (mode == "staggered")
                trace = staggered_oracle(m, r, k, waves);
            else
                throw ConfigError("unknown mode '" + mode + "' (expected worst_case or staggered)");
            write_oracle_report(std::cout, trace, m, r, k, mode);
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
