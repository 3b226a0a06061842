#ifndef UAVFLEET_SCENARIO_HPP
#define UAVFLEET_SCENARIO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavfleet {

/// Planar position in kilometres.
struct Point
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Raised for malformed or physically inconsistent mission parameters.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation is called outside its mathematical domain.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/**
 * Physical mission parameters for one inspection scenario.
 *
 * Durations are in minutes, lengths in kilometres, speeds in km/min.
 * The cluster and noise knobs are not physical quantities of the vehicle;
 * they shape the random site layouts and travel-time perturbations.
 */
struct ScenarioConfig
{
    std::string name = "scenario";

    int site_count = 0;
    double area_width = 0.0;
    double area_height = 0.0;
    Point base_position{};

    double t_active = 0.0;
    double t_charge = 0.0;
    double t_scan = 0.0;
    double flight_speed = 0.0;

    double reserve_fraction = 0.15;
    double timestep = 0.5;
    double wind_cv = 0.15;
    double per_leg_noise_halfwidth = 0.10;

    // Site generation: isotropic Gaussian scatter (km) around uniformly drawn
    // centres. The centre count defaults to max(2, m).
    double cluster_scatter = 0.2;
    std::optional<int> cluster_centers;

    std::optional<int> m_override;
    std::optional<double> r_override;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const ScenarioConfig& cfg);

/// Usable flight time per sortie, (1 - reserve) * t_active.
double sortie_capacity(const ScenarioConfig& cfg);

/// Flight time from the base to the farthest corner of the area.
double nominal_return_time(const ScenarioConfig& cfg);

/// Transit-aware workload: scans plus one mean nearest-neighbour hop per site.
double workload_estimate(const ScenarioConfig& cfg);

int derive_active_count(const ScenarioConfig& cfg, double workload);

/// R = (t_charge + nominal return) / t_active, or the override when set.
double derive_recovery_ratio(const ScenarioConfig& cfg);

struct DerivedMission
{
    int m = 1;
    double r = 1.0;
    double nominal_return_time = 0.0;
};

DerivedMission derive_mission(const ScenarioConfig& cfg);

int generation_centers(const ScenarioConfig& cfg, int m);

struct FeasibilityVerdict
{
    bool feasible = true;
    std::vector<std::size_t> offending_sites;
};

FeasibilityVerdict check_feasibility(const ScenarioConfig& cfg, std::span<const Point> sites);

/// The four corners of the area; the farthest reachable points from any base.
std::vector<Point> area_corners(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Scenario files: one `key = value` pair per line, `#` starts a comment.
// Keys are the ScenarioConfig field names; base_position is written `x, y`.

ScenarioConfig parse_scenario(std::istream& in, const std::string& source);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(to_text(c)) reproduces c.
std::string to_text(const ScenarioConfig& cfg);

std::uint64_t config_hash(const ScenarioConfig& cfg);

} // namespace uavfleet

#endif // UAVFLEET_SCENARIO_HPP
