#ifndef UAVFLEET_GEOMETRY_HPP
#define UAVFLEET_GEOMETRY_HPP

#include "uavfleet/scenario.hpp"

#include <cstdint>
#include <vector>

namespace uavfleet {

struct SiteLayout
{
    std::vector<Point> sites;
    std::vector<int> assignment;        // site -> active position in [0, m); empty before partitioning
    std::vector<int> generation_center; // site -> index of the centre it was scattered around
};

/// Uniform centres, Gaussian scatter of cfg.cluster_scatter km, clipped to the area.
SiteLayout generate_sites(const ScenarioConfig& cfg, int centers, std::uint64_t seed);

/**
 * Lloyd's k-means with k = m, k-means++ seeding and a 100-iteration cap.
 * Empty clusters take the point of the largest cluster farthest from its centroid.
 */
SiteLayout partition_sites(SiteLayout layout, int m, std::uint64_t seed);

struct Route
{
    int uav_index = 0;
    std::vector<int> ordered_sites;
};

/// Greedy nearest neighbour from the base; ties go to the lower site index.
Route build_route(const SiteLayout& layout, int uav_index, Point base);

std::vector<Route> build_routes(const SiteLayout& layout, int m, Point base);

/**
 * Multiplicative travel-time perturbation for one trial.
 *
 * The common-mode factor is log-normal with unit mean and coefficient of
 * variation wind_cv. Per-leg factors are uniform on [1 - h, 1 + h] and are
 * derived from (seed, position, leg) by hashing, so a position sees the same
 * sequence regardless of how many spares the fleet holds.
 */
class TravelNoise
{
public:
    TravelNoise() = default;
    TravelNoise(std::uint64_t seed, double wind_cv, double per_leg_halfwidth);

    double common_mode_factor() const { return common_; }
    double per_leg_factor(int uav_index, int leg_index) const;

    /// Standard-normal draw behind the common-mode factor; independent of wind_cv.
    double common_mode_normal() const { return normal_; }

private:
    std::uint64_t seed_ = 0;
    double halfwidth_ = 0.0;
    double normal_ = 0.0;
    double common_ = 1.0;
};

/// Log-normal with unit mean and the given CV, evaluated at a standard-normal quantile.
double unit_mean_lognormal(double cv, double standard_normal);

double leg_time(Point from, Point to, const ScenarioConfig& cfg, const TravelNoise& noise, int uav_index,
                int leg_index);

/// Order-sensitive FNV-1a over site coordinates and assignment.
std::uint64_t layout_hash(const SiteLayout& layout);

/// SplitMix64 finaliser; the building block of every counter-based stream here.
std::uint64_t mix64(std::uint64_t x);

/// Hash of several words, used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

/// Uniform double in [0, 1) from 53 high bits.
double to_unit(std::uint64_t bits);

} // namespace uavfleet

#endif // UAVFLEET_GEOMETRY_HPP
