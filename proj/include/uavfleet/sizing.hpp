#ifndef UAVFLEET_SIZING_HPP
#define UAVFLEET_SIZING_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uavfleet {

enum class SizingRule
{
    Naive,
    DutyCycle,
    ErlangB,
    Proposed
};

inline constexpr std::array<SizingRule, 4> all_rules = {SizingRule::Naive, SizingRule::DutyCycle,
                                                        SizingRule::ErlangB, SizingRule::Proposed};

/// Identifier used in CSV output and on the command line (e.g. "duty_cycle").
std::string_view to_string(SizingRule rule);

/// Accepts the CSV identifiers plus a few short aliases ("duty", "erlang").
SizingRule parse_rule(std::string_view text);

struct FleetPlan
{
    SizingRule rule = SizingRule::Proposed;
    int m = 1;
    double r = 1.0;
    int k = 0;
};

/// ceil(r), robust to representation error just above an integer.
int ceil_ratio(double r);

/**
 * Erlang-B blocking probability B(k, a) for k servers and offered load a,
 * via B(0,a) = 1, B(j,a) = a B(j-1,a) / (j + a B(j-1,a)).
 *
 * Throws DomainError for a < 0 or k < 0.
 */
double erlang_b_blocking(int k, double a);

/// Smallest k with B(k, a) <= epsilon, searched upward from k = 0.
int erlang_b_servers(double a, double epsilon);

FleetPlan size_fleet(SizingRule rule, int m, double r, double epsilon = 0.01);

/**
 * Wave-by-wave occupancy of the recovery pipeline.
 *
 * Each entry is one request instant. in_recovery counts every vehicle whose
 * recovery is running at that instant, including the cohort entering recovery
 * there; completions due at the same instant have already been released.
 * flight_ready = k - in_recovery.
 */
struct OccupancyTrace
{
    std::vector<double> times;
    std::vector<int> requests;
    std::vector<int> in_recovery;
    std::vector<int> flight_ready;
    std::optional<double> exhausted_at;
    std::optional<std::size_t> exhausted_index;

    int max_in_recovery() const;
};

/**
 * Fully phase-aligned cohorts: every one of the m positions requests a
 * replacement at t = j * t_active for j = 1..waves, and each request keeps a
 * vehicle in recovery for r * t_active. A wave is flagged as exhausting the
 * pool when flight_ready < m at that instant.
 */
OccupancyTrace worst_case_oracle(int m, double r, int k, int waves, double t_active = 1.0);

/**
 * Same dynamics with position p offset by (p mod ceil(r)) * t_active / ceil(r).
 * An instant where q positions request is flagged when flight_ready < q.
 */
OccupancyTrace staggered_oracle(int m, double r, int k, int waves, double t_active = 1.0);

/// (1 - epsilon)^h; h may be fractional (a mean handover count).
double compounding_reference(double epsilon, double h);

} // namespace uavfleet

#endif // UAVFLEET_SIZING_HPP
