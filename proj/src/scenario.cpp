#include "uavfleet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uavfleet {

namespace {

void require(bool cond, const std::string& what)
{
    if (!cond)
        throw ConfigError("scenario: " + what);
}

} // namespace

double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

void validate(const ScenarioConfig& cfg)
{
    require(!cfg.name.empty() && cfg.name.find_first_of(", \t\n") == std::string::npos,
            "name must be non-empty without commas or whitespace");
    require(cfg.site_count > 0, "site_count must be positive");
    require(cfg.area_width > 0.0 && cfg.area_height > 0.0, "area dimensions must be positive");
    require(cfg.base_position.x >= 0.0 && cfg.base_position.x <= cfg.area_width
                && cfg.base_position.y >= 0.0 && cfg.base_position.y <= cfg.area_height,
            "base_position must lie inside the area");
    require(cfg.t_active > 0.0, "t_active must be positive");
    require(cfg.t_charge > 0.0, "t_charge must be positive");
    require(cfg.t_scan >= 0.0, "t_scan must be non-negative");
    require(cfg.flight_speed > 0.0, "flight_speed must be positive");
    require(cfg.reserve_fraction >= 0.0 && cfg.reserve_fraction < 1.0,
            "reserve_fraction must be in [0, 1)");
    require(cfg.timestep > 0.0 && cfg.timestep <= cfg.t_active,
            "timestep must be in (0, t_active]");
    require(cfg.wind_cv >= 0.0, "wind_cv must be non-negative");
    require(cfg.per_leg_noise_halfwidth >= 0.0 && cfg.per_leg_noise_halfwidth < 1.0,
            "per_leg_noise_halfwidth must be in [0, 1)");
    require(cfg.cluster_scatter >= 0.0, "cluster_scatter must be non-negative");
    require(!cfg.cluster_centers || *cfg.cluster_centers >= 1, "cluster_centers must be positive");
    require(!cfg.m_override || *cfg.m_override >= 1, "m_override must be positive");
    require(!cfg.r_override || *cfg.r_override > 0.0, "r_override must be positive");
}

double sortie_capacity(const ScenarioConfig& cfg)
{
    return (1.0 - cfg.reserve_fraction) * cfg.t_active;
}

std::vector<Point> area_corners(const ScenarioConfig& cfg)
{
    return {{0.0, 0.0}, {cfg.area_width, 0.0}, {0.0, cfg.area_height}, {cfg.area_width, cfg.area_height}};
}

double nominal_return_time(const ScenarioConfig& cfg)
{
    double farthest = 0.0;
    for (Point c : area_corners(cfg))
        farthest = std::max(farthest, distance(cfg.base_position, c));
    return farthest / cfg.flight_speed;
}

double workload_estimate(const ScenarioConfig& cfg)
{
    const double n = cfg.site_count;
    // Mean nearest-neighbour distance of a uniform point process, 1 / (2 sqrt(density)).
    const double hop = 0.5 * std::sqrt(cfg.area_width * cfg.area_height / n);
    return n * cfg.t_scan + n * hop / cfg.flight_speed;
}

int derive_active_count(const ScenarioConfig& cfg, double workload)
{
    if (cfg.m_override)
        return *cfg.m_override;
    const double capacity = sortie_capacity(cfg);
    if (!(capacity > 0.0))
        throw ConfigError("scenario: per-sortie capacity must be positive");
    if (!(workload > 0.0))
        throw ConfigError("scenario: workload estimate must be positive");
    return std::max(1, static_cast<int>(std::ceil(workload / capacity)));
}

double derive_recovery_ratio(const ScenarioConfig& cfg)
{
    if (cfg.r_override)
        return *cfg.r_override;
    validate(cfg);
    const double r = (cfg.t_charge + nominal_return_time(cfg)) / cfg.t_active;
    if (!(r > 0.0))
        throw ConfigError("scenario: recovery ratio must be positive");
    return r;
}

DerivedMission derive_mission(const ScenarioConfig& cfg)
{
    validate(cfg);
    DerivedMission out;
    out.nominal_return_time = nominal_return_time(cfg);
    out.m = derive_active_count(cfg, workload_estimate(cfg));
    out.r = derive_recovery_ratio(cfg);
    return out;
}

int generation_centers(const ScenarioConfig& cfg, int m)
{
    return cfg.cluster_centers ? *cfg.cluster_centers : std::max(2, m);
}

FeasibilityVerdict check_feasibility(const ScenarioConfig& cfg, std::span<const Point> sites)
{
    if (sites.empty())
        throw ConfigError("feasibility: empty site list");
    const double budget = sortie_capacity(cfg);
    FeasibilityVerdict verdict;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const double need = 2.0 * distance(cfg.base_position, sites[i]) / cfg.flight_speed + cfg.t_scan;
        if (need > budget + 1e-12)
            verdict.offending_sites.push_back(i);
    }
    verdict.feasible = verdict.offending_sites.empty();
    return verdict;
}

} // namespace uavfleet
