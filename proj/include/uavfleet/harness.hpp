#ifndef UAVFLEET_HARNESS_HPP
#define UAVFLEET_HARNESS_HPP

#include "uavfleet/geometry.hpp"
#include "uavfleet/scenario.hpp"
#include "uavfleet/simengine.hpp"
#include "uavfleet/sizing.hpp"
#include "uavfleet/stats.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace uavfleet {

inline constexpr const char* kToolVersion = "0.3.1";

struct ExperimentSpec
{
    std::vector<std::string> scenario_files;
    std::vector<SizingRule> methods{all_rules.begin(), all_rules.end()};
    int n_trials = 1000;
    std::uint64_t base_seed = 20240601;
    std::vector<double> cv_sweep;
    double epsilon = 0.01;
    std::string output_dir = ".";
    int jobs = 0; // 0 = hardware concurrency
    bool dump_sites = false;
    bool event_log = false;
};

/// Everything a trial needs that does not depend on the sizing rule.
struct TrialSetup
{
    std::uint64_t seed = 0;
    SiteLayout layout;
    std::vector<Route> routes;
    TravelNoise noise;
};

/// Trial seed from (base seed, scenario name, trial index); never from the method.
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& scenario, int trial);

TrialSetup prepare_trial(const ScenarioConfig& cfg, const DerivedMission& mission, std::uint64_t seed);

struct MethodOutcome
{
    FleetPlan plan;
    std::vector<TrialResult> trials;
    std::vector<TrialDigest> digests;
    AggregateStats stats;
};

struct ScenarioOutcome
{
    ScenarioConfig cfg;
    DerivedMission mission;
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> layout_hashes;
    std::vector<MethodOutcome> methods;
};

struct RunOptions
{
    int n_trials = 1000;
    std::uint64_t base_seed = 20240601;
    double epsilon = 0.01;
    int jobs = 0;
    bool keep_traces = true; // false drops per-step traces once digested
};

/**
 * Runs every method over the same n_trials seeded trials of one scenario.
 * Trials run on a worker pool; results are stored by trial index, so the
 * outcome is independent of scheduling. Throws ConfigError when a trial
 * layout is infeasible, listing the offending sites.
 */
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::vector<SizingRule>& methods,
                             const RunOptions& options);

/// Calls fn(i) for i in [0, n) on `jobs` threads; rethrows the first exception.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

int resolve_jobs(int jobs);

// --- CSV / report emission ---------------------------------------------------

void write_summary_header(std::ostream& out);
void write_summary_rows(std::ostream& out, const ScenarioOutcome& outcome);
void write_trials_header(std::ostream& out);
void write_trial_rows(std::ostream& out, const ScenarioOutcome& outcome);

using DigestTable = std::map<std::pair<std::string, std::string>, std::vector<TrialDigest>>;

/// Parses a per-trial CSV back into digests keyed by (scenario, method).
DigestTable read_trial_digests(std::istream& in);

void write_sites_csv(std::ostream& out, const SiteLayout& layout);
void write_event_log_csv(std::ostream& out, const std::vector<EventRecord>& events);

std::string format_size_table(int m, double r, double epsilon);
void write_reference_csv(std::ostream& out, const std::vector<double>& epsilons, const std::vector<double>& h_values);
void write_oracle_report(std::ostream& out, const OccupancyTrace& trace, int m, double r, int k,
                         const std::string& mode);

// --- subcommands -------------------------------------------------------------

/// Runs the experiment and writes summary.csv, trials.csv, manifest.json into output_dir.
std::vector<ScenarioOutcome> cmd_run(const ExperimentSpec& spec, std::ostream& log);

/// One run per CV value; writes sweep.csv with columns cv, method, success_rate, wilson_lb.
void cmd_sweep(const ExperimentSpec& spec, std::ostream& log);

} // namespace uavfleet

#endif // UAVFLEET_HARNESS_HPP
