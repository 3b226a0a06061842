// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "uavfleet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace uavfleet;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail)
{
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario_path(int i)
{
    return std::string(UAVFLEET_SCENARIO_DIR) + "/s" + std::to_string(i) + ".cfg";
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const MethodOutcome& method(const ScenarioOutcome& o, SizingRule rule)
{
    for (const MethodOutcome& mo : o.methods)
        if (mo.plan.rule == rule)
            return mo;
    throw DomainError("method missing from outcome");
}

// Independent blocking value: log-space truncated Poisson, B = term_k / sum_{j<=k} term_j.
double blocking_by_sum(int k, double a)
{
    std::vector<double> logs(k + 1);
    for (int j = 0; j <= k; ++j)
        logs[j] = j * std::log(a) - std::lgamma(j + 1.0);
    const double top = *std::max_element(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs)
        sum += std::exp(l - top);
    return std::exp(logs[k] - top) / sum;
}

void sizing_exactness()
{
    struct Row
    {
        int m;
        double r;
        int k[4];
    };
    const Row table[] = {{2, 0.87, {2, 2, 6, 4}},
                         {2, 1.59, {2, 4, 9, 6}},
                         {4, 2.15, {4, 12, 16, 16}},
                         {7, 3.30, {7, 28, 34, 35}},
                         {10, 3.39, {10, 40, 46, 50}}};
    const auto t0 = std::chrono::steady_clock::now();
    int wrong = 0;
    for (const Row& row : table)
        for (std::size_t i = 0; i < all_rules.size(); ++i)
            if (size_fleet(all_rules[i], row.m, row.r, 0.01).k != row.k[i])
                ++wrong;
    const double secs = seconds_since(t0);
    report("sizing_exactness", wrong == 0 && secs < 1.0, fmt("%d of 20 mismatched, %.3f s", wrong, secs));
}

void erlang_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> loads{0.1};
    for (int i = 1; i <= 100; ++i)
        loads.push_back(0.5 * i);
    double worst = 0.0;
    for (double a : loads)
        for (int k = 0; k <= 100; ++k) {
            const double ref = blocking_by_sum(k, a);
            worst = std::max(worst, std::abs(erlang_b_blocking(k, a) - ref) / ref);
        }
    const double secs = seconds_since(t0);
    report("erlang_b_equivalence", worst < 1e-12 && secs < 1.0, fmt("max rel err %.2e, %.3f s", worst, secs));
}

void oracle_theorems()
{
    const auto t0 = std::chrono::steady_clock::now();
    int bad_safe = 0, bad_bound = 0, bad_boundary = 0, checked = 0;
    for (int m = 1; m <= 20; ++m) {
        for (int step = 1; step <= 500; ++step) {
            const double r = step / 100.0;
            const int c = ceil_ratio(r);
            const int waves = 2 * c + 4;
            const OccupancyTrace safe = worst_case_oracle(m, r, m * (c + 1), waves);
            if (safe.exhausted_index)
                ++bad_safe;
            if (safe.max_in_recovery() > m * c)
                ++bad_bound;
            if (r > 1.0 && step % 100 != 0) {
                const OccupancyTrace tight = worst_case_oracle(m, r, m * c, waves);
                // exhausted_index counts waves from zero
                if (!tight.exhausted_index || *tight.exhausted_index + 1 != static_cast<std::size_t>(c))
                    ++bad_boundary;
            }
            ++checked;
        }
    }
    const double secs = seconds_since(t0);
    report("oracle_theorems_grid", bad_safe + bad_bound + bad_boundary == 0 && secs < 10.0,
           fmt("%d (m,r) pairs: %d exhausted at m(ceil+1), %d over m*ceil, %d boundary misses, %.2f s", checked,
               bad_safe, bad_bound, bad_boundary, secs));
}

void wilson_values()
{
    struct Case
    {
        long s;
        double lb;
    };
    const Case cases[] = {{1000, 0.996}, {699, 0.670}, {136, 0.116}, {2, 0.001}};
    double worst = 0.0;
    for (const Case& c : cases)
        worst = std::max(worst, std::abs(wilson_lower_bound(c.s, 1000) - c.lb));
    report("wilson_exactness", worst <= 0.0005, fmt("max abs err %.5f", worst));
}

void compounding()
{
    const double v = compounding_reference(0.01, 69);
    report("compounding_curve", v >= 0.4994 && v <= 0.5004, fmt("0.99^69 = %.6f", v));
}

struct Certified
{
    std::vector<ScenarioOutcome> outcomes;
    double seconds = 0.0;
};

Certified run_calibrated()
{
    RunOptions opt;
    opt.n_trials = 1000;
    opt.keep_traces = false;
    const std::vector<SizingRule> all(all_rules.begin(), all_rules.end());
    Certified c;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 1; i <= 5; ++i)
        c.outcomes.push_back(run_scenario(load_scenario(scenario_path(i)), all, opt));
    c.seconds = seconds_since(t0);
    return c;
}

void certification(const Certified& c)
{
    std::string detail;
    bool ok = true;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += what + "; ";
        }
    };
    for (std::size_t i = 0; i < c.outcomes.size(); ++i) {
        const ScenarioOutcome& o = c.outcomes[i];
        const AggregateStats& naive = method(o, SizingRule::Naive).stats;
        const AggregateStats& duty = method(o, SizingRule::DutyCycle).stats;
        const AggregateStats& erl = method(o, SizingRule::ErlangB).stats;
        const AggregateStats& prop = method(o, SizingRule::Proposed).stats;
        const std::string s = o.cfg.name;
        switch (i) {
        case 0:
            expect(certify(naive) && certify(duty) && certify(erl) && certify(prop), s + " not all certified");
            break;
        case 1:
        case 2:
            expect(naive.n_success == 0, s + " naive succeeded");
            expect(certify(duty) && certify(erl) && certify(prop), s + " duty/erlang/proposed not certified");
            break;
        case 3:
            expect(!certify(duty) && duty.success_rate < 0.40, s + " duty-cycle pattern");
            expect(certify(erl) && certify(prop), s + " erlang/proposed not certified");
            break;
        case 4:
            expect(!certify(erl) && erl.success_rate >= 0.50 && erl.success_rate <= 0.90, s + " erlang pattern");
            expect(certify(prop) && prop.wilson_lb >= 0.98, s + " proposed pattern");
            break;
        }
        detail += fmt("%s %.3f/%.3f/%.3f/%.3f; ", s.c_str(), naive.success_rate, duty.success_rate,
                      erl.success_rate, prop.success_rate);
    }
    ok = ok && c.seconds < 300.0;
    report("certification_pattern", ok, detail + fmt("%.1f s", c.seconds));
}

void burst(const Certified& c)
{
    auto conc = [&](std::size_t i, SizingRule rule) {
        return method(c.outcomes[i], rule).stats.burst_concentration.value_or(-1.0);
    };
    const double s5e = conc(4, SizingRule::ErlangB);
    const double s4e = conc(3, SizingRule::ErlangB);
    const double s4d = conc(3, SizingRule::DutyCycle);
    report("burst_concentration", s5e >= 0.80 && s4e >= 0.90 && s4d >= 0.80,
           fmt("S5 erlang %.3f, S4 erlang %.3f, S4 duty %.3f", s5e, s4e, s4d));
}

void handover_invariance(const Certified& c)
{
    bool ok = true;
    std::string detail;
    for (const ScenarioOutcome& o : c.outcomes) {
        double lo = 1e300, hi = 0.0;
        for (SizingRule rule : {SizingRule::DutyCycle, SizingRule::ErlangB, SizingRule::Proposed}) {
            const AggregateStats& s = method(o, rule).stats;
            if (s.n_success == 0)
                continue;
            lo = std::min(lo, s.mean_handovers);
            hi = std::max(hi, s.mean_handovers);
        }
        const double spread = hi > 0.0 ? (hi - lo) / lo : 0.0;
        ok = ok && spread < 0.05;
        detail += fmt("%s %.2f%%; ", o.cfg.name.c_str(), 100.0 * spread);
    }
    report("handover_invariance", ok, detail);
}

void cv_robustness()
{
    ScenarioConfig cfg = load_scenario(scenario_path(5));
    RunOptions opt;
    opt.n_trials = 1000;
    opt.keep_traces = false;
    double worst_lb = 1.0, lo = 1.0, hi = 0.0;
    for (int i = 0; i <= 6; ++i) {
        cfg.wind_cv = 0.05 * i;
        const ScenarioOutcome o = run_scenario(cfg, {SizingRule::ErlangB, SizingRule::Proposed}, opt);
        worst_lb = std::min(worst_lb, method(o, SizingRule::Proposed).stats.wilson_lb);
        const double e = method(o, SizingRule::ErlangB).stats.success_rate;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    report("cv_robustness", worst_lb >= 0.98 && hi - lo < 0.10,
           fmt("proposed min wilson_lb %.3f, erlang range [%.3f, %.3f]", worst_lb, lo, hi));
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    return out;
}

void determinism()
{
    const fs::path dir = fs::temp_directory_path() / "uavfleet_acceptance";
    fs::remove_all(dir);
    ExperimentSpec spec;
    for (int i = 1; i <= 5; ++i)
        spec.scenario_files.push_back(scenario_path(i));
    spec.n_trials = 60;
    std::ostringstream log;
    spec.output_dir = (dir / "a").string();
    cmd_run(spec, log);
    spec.output_dir = (dir / "b").string();
    spec.jobs = 1;
    cmd_run(spec, log);

    bool same = true;
    for (const char* f : {"summary.csv", "trials.csv", "manifest.json"})
        same = same && slurp(dir / "a" / f) == slurp(dir / "b" / f);

    // Every method row for a given (scenario, trial) must carry the same seed and layout hash.
    std::istringstream trials(slurp(dir / "a" / "trials.csv"));
    std::string line;
    std::getline(trials, line);
    const std::vector<std::string> head = split_csv(line);
    auto col = [&](const char* name) {
        return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    const std::size_t c_scen = col("scenario"), c_trial = col("trial"), c_seed = col("seed"),
                      c_hash = col("layout_hash");
    std::map<std::pair<std::string, std::string>, std::string> key;
    int rows = 0, mismatched = 0;
    while (std::getline(trials, line)) {
        const std::vector<std::string> cells = split_csv(line);
        const std::string id = cells.at(c_seed) + "/" + cells.at(c_hash);
        auto [it, fresh] = key.emplace(std::make_pair(cells.at(c_scen), cells.at(c_trial)), id);
        if (!fresh && it->second != id)
            ++mismatched;
        ++rows;
    }
    const bool shape = rows == 5 * 4 * 60 && key.size() == 5 * 60;
    report("determinism_seed_sharing", same && mismatched == 0 && shape,
           fmt("outputs %s, %d rows, %d layout mismatches", same ? "identical" : "differ", rows, mismatched));
    fs::remove_all(dir);
}

struct Fuzzed
{
    ScenarioConfig cfg;
    DerivedMission mission;
    SiteLayout layout;
    std::vector<Route> routes;
    TravelNoise noise;
    FleetPlan plan;
};

Fuzzed fuzz_case(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    Fuzzed f;
    ScenarioConfig& c = f.cfg;
    c.name = "fuzz";
    c.t_active = uni(20.0, 60.0);
    c.t_charge = uni(5.0, 150.0);
    c.flight_speed = uni(0.3, 1.0);
    c.t_scan = uni(0.2, 6.0);
    c.reserve_fraction = uni(0.05, 0.3);
    c.timestep = std::vector<double>{0.25, 0.5, 1.0}[pick(0, 2)];
    c.wind_cv = uni(0.0, 0.3);
    c.per_leg_noise_halfwidth = uni(0.0, 0.2);
    const double reach = ((1.0 - c.reserve_fraction) * c.t_active - c.t_scan) * c.flight_speed / 2.0;
    const double side = std::max(0.1, std::min(3.0, reach * 1.3));
    c.area_width = side;
    c.area_height = side;
    c.base_position = {uni(0.0, side), uni(0.0, side)};
    const int m = pick(1, 6);
    c.site_count = pick(m, 60);
    c.m_override = m;
    f.mission = derive_mission(c);
    f.layout = partition_sites(generate_sites(c, std::max(2, m), seed), m, seed);
    f.routes = build_routes(f.layout, m, c.base_position);
    f.noise = TravelNoise(seed, c.wind_cv, c.per_leg_noise_halfwidth);
    f.plan = {SizingRule::Proposed, m, f.mission.r, pick(0, 4 * m)};
    return f;
}

void fuzzing()
{
    int accounting = 0, battery = 0, battery_calm = 0, coverage = 0, infeasible = 0, errors = 0, timeouts = 0, ran = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        Fuzzed f = fuzz_case(seed);
        if (!check_feasibility(f.cfg, f.layout.sites).feasible) {
            ++infeasible;
            continue;
        }
        try {
            EngineOptions opt;
            opt.check_accounting = false; // checked here instead, after every step
            MissionEngine engine(f.cfg, f.mission, f.plan, f.layout, f.routes, f.noise, opt);
            bool books = true;
            while (!engine.finished()) {
                engine.step();
                books = books && engine.accounting_check();
            }
            const TrialResult t = engine.result();
            ++ran;
            if (!books)
                ++accounting;
            if (t.timed_out)
                ++timeouts;
            if (t.exhaustion_events.empty() && t.min_battery < 0.0) {
                ++battery;
                // Same trial with wind and leg noise off: the reserve must hold there.
                Fuzzed calm = f;
                calm.cfg.wind_cv = 0.0;
                calm.cfg.per_leg_noise_halfwidth = 0.0;
                calm.noise = TravelNoise(seed, 0.0, 0.0);
                const TrialResult q = run_trial(calm.cfg, calm.mission, calm.plan, calm.layout, calm.routes, calm.noise);
                if (q.min_battery < 0.0)
                    ++battery_calm;
            }
            if (t.success) {
                for (int s = 0; s < f.cfg.site_count; ++s)
                    if (engine.site_scan_count(s) != 1) {
                        ++coverage;
                        break;
                    }
            }
        } catch (const std::exception&) {
            ++errors;
        }
    }
    report("engine_fuzzing", ran > 0 && accounting + battery + coverage + errors + timeouts == 0,
           fmt("%d trials run (%d infeasible skipped): %d accounting, %d battery (%d with noise off), %d coverage, "
               "%d errors, %d timeouts",
               ran, infeasible, accounting, battery, battery_calm, coverage, errors, timeouts));
}

} // namespace

int main()
{
    sizing_exactness();
    erlang_equivalence();
    oracle_theorems();
    wilson_values();
    compounding();
    const Certified c = run_calibrated();
    certification(c);
    burst(c);
    handover_invariance(c);
    cv_robustness();
    determinism();
    fuzzing();
    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
