#include "uavfleet/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace uavfleet {

namespace {

std::string num(double v, int precision = 6)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

std::string hex(std::uint64_t v)
{
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

std::uint64_t name_hash(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep))
        out.push_back(cell);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    return out;
}

std::string histogram_cell(const std::vector<long>& hist)
{
    std::string s;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (i)
            s += ' ';
        s += std::to_string(hist[i]);
    }
    return s;
}

struct LoadedScenario
{
    std::string path;
    ScenarioConfig cfg;
};

std::vector<LoadedScenario> load_all(const std::vector<std::string>& files)
{
    if (files.empty())
        throw ConfigError("no scenario files given");
    std::vector<LoadedScenario> out;
    for (const std::string& f : files)
        out.push_back({f, load_scenario(f)});
    return out;
}

RunOptions run_options(const ExperimentSpec& spec)
{
    if (spec.n_trials < 1)
        throw ConfigError("trials must be at least 1");
    if (spec.methods.empty())
        throw ConfigError("no sizing methods selected");
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
        throw ConfigError("epsilon must be in (0, 1)");
    RunOptions opt;
    opt.n_trials = spec.n_trials;
    opt.base_seed = spec.base_seed;
    opt.epsilon = spec.epsilon;
    opt.jobs = spec.jobs;
    opt.keep_traces = false;
    return opt;
}

} // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& scenario, int trial)
{
    return derive_seed(base_seed, name_hash(scenario), static_cast<std::uint64_t>(trial));
}

TrialSetup prepare_trial(const ScenarioConfig& cfg, const DerivedMission& mission, std::uint64_t seed)
{
    TrialSetup setup;
    setup.seed = seed;
    setup.layout = partition_sites(generate_sites(cfg, generation_centers(cfg, mission.m), seed), mission.m, seed);
    setup.routes = build_routes(setup.layout, mission.m, cfg.base_position);
    setup.noise = TravelNoise(seed, cfg.wind_cv, cfg.per_leg_noise_halfwidth);
    return setup;
}

int resolve_jobs(int jobs)
{
    if (jobs > 0)
        return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
{
    const int workers = std::min(resolve_jobs(jobs), std::max(n, 1));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure)
                        failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::vector<SizingRule>& methods,
                             const RunOptions& options)
{
    ScenarioOutcome outcome;
    outcome.cfg = cfg;
    outcome.mission = derive_mission(cfg);
    const int n = options.n_trials;
    outcome.seeds.resize(n);
    outcome.layout_hashes.resize(n);
    for (SizingRule rule : methods) {
        MethodOutcome mo;
        mo.plan = size_fleet(rule, outcome.mission.m, outcome.mission.r, options.epsilon);
        mo.trials.resize(n);
        mo.digests.resize(n);
        outcome.methods.push_back(std::move(mo));
    }

    parallel_for(n, options.jobs, [&](int i) {
        const std::uint64_t seed = trial_seed(options.base_seed, cfg.name, i);
        const TrialSetup setup = prepare_trial(cfg, outcome.mission, seed);
        const FeasibilityVerdict verdict = check_feasibility(cfg, setup.layout.sites);
        if (!verdict.feasible) {
            std::ostringstream msg;
            msg << cfg.name << ": trial " << i << " has sites beyond one sortie's reach:";
            for (std::size_t s : verdict.offending_sites)
                msg << " #" << s << " (" << setup.layout.sites[s].x << ", " << setup.layout.sites[s].y << ")";
            throw ConfigError(msg.str());
        }
        outcome.seeds[i] = seed;
        outcome.layout_hashes[i] = layout_hash(setup.layout);
        for (MethodOutcome& mo : outcome.methods) {
            TrialResult r = run_trial(cfg, outcome.mission, mo.plan, setup.layout, setup.routes, setup.noise);
            mo.digests[i] = digest(r, cfg.timestep);
            if (!options.keep_traces)
                r.concurrency_trace = {};
            mo.trials[i] = std::move(r);
        }
    });

    for (MethodOutcome& mo : outcome.methods)
        mo.stats = aggregate(mo.digests);
    return outcome;
}

void write_summary_header(std::ostream& out)
{
    out << "scenario,method,m,r,k,n_trials,success_rate,wilson_lb,mean_handovers,burst_concentration,"
           "p90_concurrent,p90_window_demand\n";
}

void write_summary_rows(std::ostream& out, const ScenarioOutcome& outcome)
{
    for (const MethodOutcome& mo : outcome.methods) {
        const AggregateStats& s = mo.stats;
        out << outcome.cfg.name << ',' << to_string(mo.plan.rule) << ',' << mo.plan.m << ',' << num(mo.plan.r, 4)
            << ',' << mo.plan.k << ',' << s.n_trials << ',' << num(s.success_rate) << ',' << num(s.wilson_lb) << ','
            << num(s.mean_handovers) << ',' << (s.burst_concentration ? num(*s.burst_concentration) : "--") << ','
            << num(s.p90_concurrent_recovery, 1) << ',' << num(s.p90_window_demand, 1) << '\n';
    }
}

void write_trials_header(std::ostream& out)
{
    out << "scenario,method,trial,seed,layout_hash,k,success,handovers,requests,exhaustions,"
           "exhaustions_in_top_decile,sites_scanned,duration,max_window_demand,concurrency_hist\n";
}

void write_trial_rows(std::ostream& out, const ScenarioOutcome& outcome)
{
    for (const MethodOutcome& mo : outcome.methods) {
        for (std::size_t i = 0; i < mo.trials.size(); ++i) {
            const TrialResult& t = mo.trials[i];
            const TrialDigest& d = mo.digests[i];
            out << outcome.cfg.name << ',' << to_string(mo.plan.rule) << ',' << i << ',' << outcome.seeds[i] << ','
                << hex(outcome.layout_hashes[i]) << ',' << mo.plan.k << ',' << (t.success ? 1 : 0) << ','
                << t.handover_count << ',' << t.request_times.size() << ',' << t.exhaustion_events.size() << ','
                << d.burst.in_top_decile << ',' << t.sites_scanned << ',' << num(t.duration, 1) << ','
                << d.max_window_demand << ',' << histogram_cell(d.concurrency_histogram) << '\n';
        }
    }
}

DigestTable read_trial_digests(std::istream& in)
{
    DigestTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("trials csv: empty input");
    const std::vector<std::string> header = split(line, ',');
    auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ConfigError("trials csv: missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_scen = col("scenario"), c_method = col("method"), c_success = col("success"),
                      c_hand = col("handovers"), c_exh = col("exhaustions"), c_top = col("exhaustions_in_top_decile"),
                      c_demand = col("max_window_demand"), c_hist = col("concurrency_hist");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size())
            throw ConfigError("trials csv: ragged row");
        TrialDigest d;
        d.success = cells[c_success] == "1";
        d.handovers = std::stoi(cells[c_hand]);
        d.burst.exhaustions = std::stol(cells[c_exh]);
        d.burst.in_top_decile = std::stol(cells[c_top]);
        d.max_window_demand = std::stoi(cells[c_demand]);
        std::istringstream hist(cells[c_hist]);
        for (long v; hist >> v;)
            d.concurrency_histogram.push_back(v);
        table[{cells[c_scen], cells[c_method]}].push_back(std::move(d));
    }
    return table;
}

void write_sites_csv(std::ostream& out, const SiteLayout& layout)
{
    out << "site_id,x,y,uav\n";
    for (std::size_t i = 0; i < layout.sites.size(); ++i)
        out << i << ',' << num(layout.sites[i].x) << ',' << num(layout.sites[i].y) << ','
            << (layout.assignment.empty() ? -1 : layout.assignment[i]) << '\n';
}

void write_event_log_csv(std::ostream& out, const std::vector<EventRecord>& events)
{
    out << "time,event_type,uav_id,detail\n";
    for (const EventRecord& e : events)
        out << num(e.time, 2) << ',' << e.event_type << ',' << e.uav_id << ',' << e.detail << '\n';
}

std::string format_size_table(int m, double r, double epsilon)
{
    std::ostringstream out;
    out << "m = " << m << ", R = " << r << ", epsilon = " << epsilon << "\n";
    out << std::left << std::setw(12) << "rule" << "k\n";
    for (SizingRule rule : all_rules)
        out << std::left << std::setw(12) << to_string(rule) << size_fleet(rule, m, r, epsilon).k << '\n';
    return out.str();
}

void write_reference_csv(std::ostream& out, const std::vector<double>& epsilons, const std::vector<double>& h_values)
{
    out << "epsilon,h,reference\n";
    for (double eps : epsilons)
        for (double h : h_values)
            out << num(eps, 4) << ',' << num(h, 2) << ',' << num(compounding_reference(eps, h), 6) << '\n';
}

void write_oracle_report(std::ostream& out, const OccupancyTrace& trace, int m, double r, int k,
                         const std::string& mode)
{
    out << "mode=" << mode << " m=" << m << " r=" << r << " k=" << k << " ceil(r)=" << ceil_ratio(r) << '\n';
    out << "index,time,requests,in_recovery,flight_ready\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        out << i + 1 << ',' << num(trace.times[i], 4) << ',' << trace.requests[i] << ',' << trace.in_recovery[i]
            << ',' << trace.flight_ready[i] << '\n';
    out << "max_in_recovery=" << trace.max_in_recovery() << " (bound m*ceil(r)=" << m * ceil_ratio(r) << ")\n";
    if (trace.exhausted_at)
        out << "verdict: EXHAUSTED at instant " << *trace.exhausted_index + 1 << " (t=" << num(*trace.exhausted_at, 4)
            << " x t_active)\n";
    else
        out << "verdict: no exhaustion\n";
}

std::vector<ScenarioOutcome> cmd_run(const ExperimentSpec& spec, std::ostream& log)
{
    const RunOptions options = run_options(spec);
    const std::vector<LoadedScenario> scenarios = load_all(spec.scenario_files);
    const std::filesystem::path dir(spec.output_dir);
    std::filesystem::create_directories(dir);

    std::vector<ScenarioOutcome> outcomes;
    for (const LoadedScenario& s : scenarios) {
        log << "running " << s.cfg.name << " (" << options.n_trials << " trials x " << spec.methods.size()
            << " methods)\n";
        outcomes.push_back(run_scenario(s.cfg, spec.methods, options));
    }

    {
        std::ofstream summary = open_out(dir / "summary.csv");
        write_summary_header(summary);
        for (const ScenarioOutcome& o : outcomes)
            write_summary_rows(summary, o);
    }
    {
        std::ofstream trials = open_out(dir / "trials.csv");
        write_trials_header(trials);
        for (const ScenarioOutcome& o : outcomes)
            write_trial_rows(trials, o);
    }

    nlohmann::ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["base_seed"] = spec.base_seed;
    manifest["n_trials"] = spec.n_trials;
    manifest["epsilon"] = spec.epsilon;
    manifest["methods"] = nlohmann::json::array();
    for (SizingRule r : spec.methods)
        manifest["methods"].push_back(std::string(to_string(r)));
    manifest["scenarios"] = nlohmann::json::array();
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        ScenarioConfig native = scenarios[i].cfg;
        native.m_override.reset();
        native.r_override.reset();
        const DerivedMission nat = derive_mission(native);
        manifest["scenarios"].push_back({{"name", scenarios[i].cfg.name},
                                         {"file", scenarios[i].path},
                                         {"config_hash", hex(config_hash(scenarios[i].cfg))},
                                         {"m", outcomes[i].mission.m},
                                         {"r", outcomes[i].mission.r},
                                         {"native_m", nat.m},
                                         {"native_r", nat.r}});
    }
    {
        std::ofstream out = open_out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }

    for (const LoadedScenario& s : scenarios) {
        if (!spec.dump_sites && !spec.event_log)
            break;
        const DerivedMission mission = derive_mission(s.cfg);
        const TrialSetup setup = prepare_trial(s.cfg, mission, trial_seed(spec.base_seed, s.cfg.name, 0));
        if (spec.dump_sites) {
            std::ofstream out = open_out(dir / ("sites_" + s.cfg.name + ".csv"));
            write_sites_csv(out, setup.layout);
        }
        if (spec.event_log) {
            for (SizingRule rule : spec.methods) {
                std::vector<EventRecord> events;
                EngineOptions eo;
                eo.event_log = &events;
                run_trial(s.cfg, mission, size_fleet(rule, mission.m, mission.r, spec.epsilon), setup.layout,
                          setup.routes, setup.noise, eo);
                std::ofstream out =
                    open_out(dir / ("events_" + s.cfg.name + "_" + std::string(to_string(rule)) + ".csv"));
                write_event_log_csv(out, events);
            }
        }
    }

    for (const ScenarioOutcome& o : outcomes)
        for (const MethodOutcome& mo : o.methods)
            log << o.cfg.name << ' ' << to_string(mo.plan.rule) << " k=" << mo.plan.k
                << " success=" << num(mo.stats.success_rate, 3) << " wlb=" << num(mo.stats.wilson_lb, 3)
                << (certify(mo.stats) ? " certified" : " NOT certified") << '\n';
    return outcomes;
}

void cmd_sweep(const ExperimentSpec& spec, std::ostream& log)
{
    if (spec.cv_sweep.empty())
        throw ConfigError("sweep: empty CV list");
    for (double cv : spec.cv_sweep)
        if (!(cv >= 0.0))
            throw ConfigError("sweep: CV values must be non-negative");
    if (spec.scenario_files.size() != 1)
        throw ConfigError("sweep: exactly one scenario file expected");
    const RunOptions options = run_options(spec);
    const ScenarioConfig base = load_scenario(spec.scenario_files.front());
    const std::filesystem::path dir(spec.output_dir);
    std::filesystem::create_directories(dir);

    std::ofstream out = open_out(dir / "sweep.csv");
    out << "cv,method,success_rate,wilson_lb\n";
    for (double cv : spec.cv_sweep) {
        ScenarioConfig cfg = base;
        cfg.wind_cv = cv;
        const ScenarioOutcome o = run_scenario(cfg, spec.methods, options);
        for (const MethodOutcome& mo : o.methods) {
            out << num(cv, 2) << ',' << to_string(mo.plan.rule) << ',' << num(mo.stats.success_rate) << ','
                << num(mo.stats.wilson_lb) << '\n';
            log << "cv=" << num(cv, 2) << ' ' << to_string(mo.plan.rule) << " success=" << num(mo.stats.success_rate, 3)
                << " wlb=" << num(mo.stats.wilson_lb, 3) << '\n';
        }
    }
}

} // namespace uavfleet
