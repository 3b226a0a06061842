#ifndef UAVFLEET_SIMENGINE_HPP
#define UAVFLEET_SIMENGINE_HPP

#include "uavfleet/geometry.hpp"
#include "uavfleet/scenario.hpp"
#include "uavfleet/sizing.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uavfleet {

/// An engine bookkeeping invariant failed; the trial cannot be trusted.
class InvariantViolation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

enum class Role
{
    Active,
    Returning,
    Charging,
    Ready,
    TransitToHandover,
    Removed
};

std::string_view to_string(Role role);

/// Where an active position stands on its route. Travels with the vehicle
/// serving the position and is handed over intact on replacement.
struct TaskProgress
{
    enum class Phase
    {
        Flying,
        Scanning,
        Complete
    };

    int position = -1;
    int route_cursor = 0;
    double scan_progress = 0.0;
    Phase phase = Phase::Flying;
    Point leg_from{};
    Point leg_to{};
    double leg_duration = 0.0;
    double leg_elapsed = 0.0;
    int legs_drawn = 0; // next leg index in this position's noise stream
};

/// Straight-line flight used for return and handover transit.
struct Flight
{
    Point from{};
    Point to{};
    double start = 0.0;
    double duration = 0.0;
    double battery_at_start = 0.0;

    double arrival() const { return start + duration; }
};

struct UAVState
{
    int id = 0;
    Role role = Role::Ready;
    double battery_remaining = 0.0;
    Point position{};
    TaskProgress task;  // meaningful while Active or TransitToHandover
    Flight flight;      // meaningful while Returning or TransitToHandover
    double charge_end = 0.0;
};

struct ExhaustionEvent
{
    double time = 0.0;
    int uav_id = 0;

    friend bool operator==(const ExhaustionEvent&, const ExhaustionEvent&) = default;
};

struct EventRecord
{
    double time = 0.0;
    std::string event_type;
    int uav_id = 0;
    std::string detail;
};

struct TrialResult
{
    bool success = false;
    std::vector<ExhaustionEvent> exhaustion_events;
    int handover_count = 0;
    std::vector<double> handover_times;
    std::vector<double> request_times;
    int sites_scanned = 0;
    int site_count = 0;
    std::vector<int> concurrency_trace;
    double duration = 0.0;
    bool timed_out = false;
    double min_battery = 0.0; // before clamping; negative means a vehicle ran dry

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct EngineOptions
{
    std::vector<EventRecord>* event_log = nullptr;
    bool check_accounting = true;
    double max_duration = 0.0; // 0 picks a generous bound from the workload
};

/**
 * Fixed-timestep mission simulation for one trial.
 *
 * Each call to step() advances the clock by one timestep and applies, in
 * order: recovery completions, battery and work progress, replacement
 * triggers with spare dispatch, handover arrivals, trace recording.
 */
class MissionEngine
{
public:
    MissionEngine(const ScenarioConfig& cfg, const DerivedMission& mission, const FleetPlan& plan,
                  const SiteLayout& layout, const std::vector<Route>& routes, const TravelNoise& noise,
                  EngineOptions options = {});

    void step();
    bool finished() const { return finished_; }
    double now() const { return now_; }

    /// Role counts sum to m + k.
    bool accounting_check() const;

    std::span<const UAVState> uavs() const { return uavs_; }
    int count(Role role) const;
    int site_scan_count(int site) const { return scan_count_.at(site); }

    TrialResult result() const;

private:
    void release_recovered();
    void advance_airborne();
    void serve_triggers();
    void complete_handovers();
    void record_trace();

    void advance_work(UAVState& uav);
    void start_next_leg(UAVState& uav);
    void send_home(UAVState& uav);
    double estimated_return(Point from) const;
    void log(std::string_view type, int uav, std::string detail = {});
    void update_finished();

    const ScenarioConfig& cfg_;
    FleetPlan plan_;
    const SiteLayout& layout_;
    const std::vector<Route>& routes_;
    const TravelNoise& noise_;
    EngineOptions options_;

    std::vector<UAVState> uavs_;
    std::vector<int> scan_count_;
    std::vector<bool> position_live_;
    double now_ = 0.0;
    long steps_ = 0;
    double max_duration_ = 0.0;
    bool finished_ = false;
    TrialResult result_;
};

/// Runs a trial to completion. Throws ConfigError when any site is infeasible
/// and InvariantViolation when accounting fails mid-trial.
TrialResult run_trial(const ScenarioConfig& cfg, const DerivedMission& mission, const FleetPlan& plan,
                      const SiteLayout& layout, const std::vector<Route>& routes, const TravelNoise& noise,
                      EngineOptions options = {});

} // namespace uavfleet

#endif // UAVFLEET_SIMENGINE_HPP
