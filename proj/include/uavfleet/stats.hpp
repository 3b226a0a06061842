#ifndef UAVFLEET_STATS_HPP
#define UAVFLEET_STATS_HPP

#include "uavfleet/simengine.hpp"

#include <optional>
#include <span>
#include <vector>

namespace uavfleet {

inline constexpr double kWilsonZ = 1.96;
inline constexpr double kBurstWindow = 5.0; // minutes
inline constexpr double kCertificationThreshold = 0.95;

/// Lower end of the two-sided 95% Wilson score interval.
double wilson_lower_bound(long successes, long n);

/// Exhaustion counts against the top-decile non-overlapping demand windows of one trial.
struct BurstTally
{
    long in_top_decile = 0;
    long exhaustions = 0;

    std::optional<double> fraction() const;
};

BurstTally burst_tally(std::span<const double> exhaustions, std::span<const double> requests, double duration,
                       double window = kBurstWindow);

/// Fraction of exhaustion instants inside top-decile windows; empty when there are none.
std::optional<double> burst_concentration(std::span<const double> exhaustions, std::span<const double> requests,
                                          double duration, double window = kBurstWindow);

/// Nearest-rank quantile: the ceil(q n)-th smallest value (1-based, at least the first).
double nearest_rank_quantile(std::vector<double> values, double q);

/// Largest request count in any window [s, s + width) with s on the timestep grid.
int max_window_demand(std::span<const double> requests, double duration, double step, double width = kBurstWindow);

struct PercentileMetrics
{
    double concurrent_recovery = 0.0;
    double window_demand = 0.0;
};

PercentileMetrics percentile_metrics(std::span<const TrialResult> trials, double timestep, double q = 0.9);

struct AggregateStats
{
    long n_trials = 0;
    long n_success = 0;
    double success_rate = 0.0;
    double wilson_lb = 0.0;
    double mean_handovers = 0.0;        // successful trials only
    double mean_handovers_failed = 0.0; // failed trials only
    std::optional<double> burst_concentration;
    double p90_concurrent_recovery = 0.0;
    double p90_window_demand = 0.0;
};

/**
 * Per-trial quantities the aggregate is built from. Recomputing the
 * aggregate from a list of these is exact, which is how the per-trial CSV
 * stays consistent with the summary.
 */
struct TrialDigest
{
    bool success = false;
    int handovers = 0;
    BurstTally burst;
    int max_window_demand = 0;
    std::vector<long> concurrency_histogram; // index = vehicles in recovery
};

TrialDigest digest(const TrialResult& trial, double timestep);

AggregateStats aggregate(std::span<const TrialDigest> digests, double q = 0.9);
AggregateStats aggregate(std::span<const TrialResult> trials, double timestep, double q = 0.9);

bool certify(const AggregateStats& stats, double threshold = kCertificationThreshold);

} // namespace uavfleet

#endif // UAVFLEET_STATS_HPP
