#include "uavfleet/sizing.hpp"

#include "uavfleet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace uavfleet {

namespace {

constexpr double kTimeTol = 1e-9;

struct Request
{
    // Time in units of t_active / slots, kept integral so that equal instants compare exactly.
    long tick;
    int position;
};

// Shared event loop for both oracles. `slots` subdivides t_active; request
// ticks and the recovery duration (r * slots ticks) are measured on that grid.
OccupancyTrace run_oracle(const std::vector<Request>& requests, double r, int slots, int k, double t_active,
                          bool need_full_wave, int m)
{
    std::map<long, int> by_tick;
    for (const Request& req : requests)
        ++by_tick[req.tick];

    const double recovery_ticks = r * slots;
    std::vector<long> recovering; // entry ticks of vehicles in recovery
    OccupancyTrace trace;
    for (const auto& [tick, count] : by_tick) {
        std::erase_if(recovering, [&](long entered) {
            return static_cast<double>(tick - entered) >= recovery_ticks - kTimeTol;
        });
        recovering.insert(recovering.end(), count, tick);

        const int in_recovery = static_cast<int>(recovering.size());
        const int ready = k - in_recovery;
        trace.times.push_back(static_cast<double>(tick) / slots * t_active);
        trace.requests.push_back(count);
        trace.in_recovery.push_back(in_recovery);
        trace.flight_ready.push_back(ready);

        const int needed = need_full_wave ? m : count;
        if (!trace.exhausted_at && ready < needed) {
            trace.exhausted_at = trace.times.back();
            trace.exhausted_index = trace.times.size() - 1;
        }
    }
    return trace;
}

void check_oracle_args(int m, double r, int k, int waves)
{
    if (m < 1)
        throw DomainError("oracle: m must be positive");
    if (!(r > 0.0))
        throw DomainError("oracle: r must be positive");
    if (k < 0)
        throw DomainError("oracle: k must be non-negative");
    if (waves < 1)
        throw DomainError("oracle: waves must be positive");
}

} // namespace

std::string_view to_string(SizingRule rule)
{
    switch (rule) {
    case SizingRule::Naive: return "naive";
    case SizingRule::DutyCycle: return "duty_cycle";
    case SizingRule::ErlangB: return "erlang_b";
    case SizingRule::Proposed: return "proposed";
    }
    return "unknown";
}

SizingRule parse_rule(std::string_view text)
{
    if (text == "naive")
        return SizingRule::Naive;
    if (text == "duty_cycle" || text == "duty-cycle" || text == "duty")
        return SizingRule::DutyCycle;
    if (text == "erlang_b" || text == "erlang-b" || text == "erlang")
        return SizingRule::ErlangB;
    if (text == "proposed" || text == "buffered")
        return SizingRule::Proposed;
    throw DomainError("unknown sizing rule '" + std::string(text) + "'");
}

int ceil_ratio(double r)
{
    return static_cast<int>(std::ceil(r - kTimeTol));
}

double erlang_b_blocking(int k, double a)
{
    if (k < 0)
        throw DomainError("erlang_b_blocking: negative server count");
    if (!(a >= 0.0))
        throw DomainError("erlang_b_blocking: offered load must be non-negative");
    double b = 1.0;
    for (int j = 1; j <= k; ++j)
        b = a * b / (j + a * b);
    return b;
}

int erlang_b_servers(double a, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("erlang_b_servers: epsilon must be in (0, 1)");
    if (!(a >= 0.0))
        throw DomainError("erlang_b_servers: offered load must be non-negative");
    // Same recursion as erlang_b_blocking, advanced one server at a time.
    double b = 1.0;
    int k = 0;
    while (b > epsilon) {
        ++k;
        b = a * b / (k + a * b);
    }
    return k;
}

FleetPlan size_fleet(SizingRule rule, int m, double r, double epsilon)
{
    if (m < 1)
        throw DomainError("size_fleet: m must be positive");
    if (!(r > 0.0))
        throw DomainError("size_fleet: r must be positive");
    FleetPlan plan{rule, m, r, 0};
    switch (rule) {
    case SizingRule::Naive: plan.k = m; break;
    case SizingRule::DutyCycle: plan.k = m * ceil_ratio(r); break;
    case SizingRule::ErlangB: plan.k = erlang_b_servers(m * r, epsilon); break;
    case SizingRule::Proposed: plan.k = m * (ceil_ratio(r) + 1); break;
    }
    return plan;
}

int OccupancyTrace::max_in_recovery() const
{
    return in_recovery.empty() ? 0 : *std::max_element(in_recovery.begin(), in_recovery.end());
}

OccupancyTrace worst_case_oracle(int m, double r, int k, int waves, double t_active)
{
    check_oracle_args(m, r, k, waves);
    std::vector<Request> requests;
    for (int j = 1; j <= waves; ++j)
        for (int p = 0; p < m; ++p)
            requests.push_back({j, p});
    return run_oracle(requests, r, 1, k, t_active, true, m);
}

OccupancyTrace staggered_oracle(int m, double r, int k, int waves, double t_active)
{
    check_oracle_args(m, r, k, waves);
    const int slots = ceil_ratio(r);
    std::vector<Request> requests;
    for (int j = 1; j <= waves; ++j)
        for (int p = 0; p < m; ++p)
            requests.push_back({static_cast<long>(j) * slots + p % slots, p});
    return run_oracle(requests, r, slots, k, t_active, false, m);
}

double compounding_reference(double epsilon, double h)
{
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw DomainError("compounding_reference: epsilon must be in [0, 1)");
    if (!(h >= 0.0))
        throw DomainError("compounding_reference: h must be non-negative");
    return std::pow(1.0 - epsilon, h);
}

} // namespace uavfleet
