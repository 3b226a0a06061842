#include "uavfleet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uavfleet {

namespace {

constexpr double kTol = 1e-9;

} // namespace

double wilson_lower_bound(long successes, long n)
{
    if (n <= 0)
        throw DomainError("wilson_lower_bound: n must be positive");
    if (successes < 0 || successes > n)
        throw DomainError("wilson_lower_bound: successes must be in [0, n]");
    const double nn = static_cast<double>(n);
    const double p = successes / nn;
    const double z2 = kWilsonZ * kWilsonZ;
    const double centre = p + z2 / (2.0 * nn);
    const double spread = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::max(0.0, (centre - spread) / (1.0 + z2 / nn));
}

std::optional<double> BurstTally::fraction() const
{
    if (exhaustions == 0)
        return std::nullopt;
    return static_cast<double>(in_top_decile) / static_cast<double>(exhaustions);
}

BurstTally burst_tally(std::span<const double> exhaustions, std::span<const double> requests, double duration,
                       double window)
{
    BurstTally tally;
    tally.exhaustions = static_cast<long>(exhaustions.size());
    if (exhaustions.empty())
        return tally;

    const std::size_t n_windows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / window - kTol)));
    auto window_of = [&](double t) {
        const double idx = std::floor(t / window + kTol);
        return std::min(n_windows - 1, static_cast<std::size_t>(std::max(0.0, idx)));
    };

    std::vector<long> demand(n_windows, 0);
    for (double t : requests)
        ++demand[window_of(t)];

    std::vector<std::size_t> order(n_windows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return demand[a] > demand[b]; });

    const std::size_t top = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n_windows) - kTol));
    std::vector<bool> is_top(n_windows, false);
    for (std::size_t i = 0; i < top; ++i)
        is_top[order[i]] = true;

    for (double t : exhaustions)
        if (is_top[window_of(t)])
            ++tally.in_top_decile;
    return tally;
}

std::optional<double> burst_concentration(std::span<const double> exhaustions, std::span<const double> requests,
                                          double duration, double window)
{
    return burst_tally(exhaustions, requests, duration, window).fraction();
}

double nearest_rank_quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw DomainError("quantile of an empty sample");
    if (!(q > 0.0 && q <= 1.0))
        throw DomainError("quantile level must be in (0, 1]");
    const std::size_t rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q * values.size() - kTol)));
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

int max_window_demand(std::span<const double> requests, double duration, double step, double width)
{
    if (requests.empty())
        return 0;
    std::vector<double> sorted(requests.begin(), requests.end());
    std::sort(sorted.begin(), sorted.end());
    const double horizon = std::max(duration, sorted.back());
    std::size_t lo = 0;
    std::size_t hi = 0;
    int best = 0;
    for (long i = 0;; ++i) {
        const double start = i * step;
        if (start > horizon + kTol)
            break;
        while (lo < sorted.size() && sorted[lo] < start - kTol)
            ++lo;
        hi = std::max(hi, lo);
        while (hi < sorted.size() && sorted[hi] < start + width - kTol)
            ++hi;
        best = std::max(best, static_cast<int>(hi - lo));
    }
    return best;
}

PercentileMetrics percentile_metrics(std::span<const TrialResult> trials, double timestep, double q)
{
    if (trials.empty())
        throw DomainError("percentile_metrics: no trials");
    std::vector<double> pooled;
    std::vector<double> per_trial;
    per_trial.reserve(trials.size());
    for (const TrialResult& t : trials) {
        pooled.insert(pooled.end(), t.concurrency_trace.begin(), t.concurrency_trace.end());
        per_trial.push_back(max_window_demand(t.request_times, t.duration, timestep));
    }
    PercentileMetrics out;
    out.concurrent_recovery = pooled.empty() ? 0.0 : nearest_rank_quantile(std::move(pooled), q);
    out.window_demand = nearest_rank_quantile(std::move(per_trial), q);
    return out;
}

TrialDigest digest(const TrialResult& trial, double timestep)
{
    TrialDigest d;
    d.success = trial.success;
    d.handovers = trial.handover_count;
    std::vector<double> exhaust;
    exhaust.reserve(trial.exhaustion_events.size());
    for (const ExhaustionEvent& e : trial.exhaustion_events)
        exhaust.push_back(e.time);
    d.burst = burst_tally(exhaust, trial.request_times, trial.duration);
    d.max_window_demand = max_window_demand(trial.request_times, trial.duration, timestep);
    for (int c : trial.concurrency_trace) {
        if (static_cast<std::size_t>(c) >= d.concurrency_histogram.size())
            d.concurrency_histogram.resize(c + 1, 0);
        ++d.concurrency_histogram[c];
    }
    return d;
}

AggregateStats aggregate(std::span<const TrialDigest> digests, double q)
{
    if (digests.empty())
        throw DomainError("aggregate: no trials");
    AggregateStats s;
    s.n_trials = static_cast<long>(digests.size());
    long handovers_ok = 0;
    long handovers_failed = 0;
    BurstTally burst;
    std::vector<long> hist;
    std::vector<double> demand;
    demand.reserve(digests.size());
    for (const TrialDigest& d : digests) {
        if (d.success) {
            ++s.n_success;
            handovers_ok += d.handovers;
        } else {
            handovers_failed += d.handovers;
        }
        burst.in_top_decile += d.burst.in_top_decile;
        burst.exhaustions += d.burst.exhaustions;
        demand.push_back(d.max_window_demand);
        if (d.concurrency_histogram.size() > hist.size())
            hist.resize(d.concurrency_histogram.size(), 0);
        for (std::size_t c = 0; c < d.concurrency_histogram.size(); ++c)
            hist[c] += d.concurrency_histogram[c];
    }
    const long n_failed = s.n_trials - s.n_success;
    s.success_rate = static_cast<double>(s.n_success) / static_cast<double>(s.n_trials);
    s.wilson_lb = wilson_lower_bound(s.n_success, s.n_trials);
    s.mean_handovers = s.n_success ? static_cast<double>(handovers_ok) / s.n_success : 0.0;
    s.mean_handovers_failed = n_failed ? static_cast<double>(handovers_failed) / n_failed : 0.0;
    s.burst_concentration = burst.fraction();

    // Nearest-rank quantile over the pooled histogram.
    const long total = std::accumulate(hist.begin(), hist.end(), 0L);
    if (total > 0) {
        const long rank = std::max(1L, static_cast<long>(std::ceil(q * static_cast<double>(total) - kTol)));
        long seen = 0;
        for (std::size_t c = 0; c < hist.size(); ++c) {
            seen += hist[c];
            if (seen >= rank) {
                s.p90_concurrent_recovery = static_cast<double>(c);
                break;
            }
        }
    }
    s.p90_window_demand = nearest_rank_quantile(std::move(demand), q);
    return s;
}

AggregateStats aggregate(std::span<const TrialResult> trials, double timestep, double q)
{
    std::vector<TrialDigest> digests;
    digests.reserve(trials.size());
    for (const TrialResult& t : trials)
        digests.push_back(digest(t, timestep));
    return aggregate(digests, q);
}

bool certify(const AggregateStats& stats, double threshold)
{
    return stats.wilson_lb >= threshold;
}

} // namespace uavfleet
