#include "uavfleet/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uavfleet {

namespace {

constexpr double kEps = 1e-9;

Point lerp(Point a, Point b, double f)
{
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

std::string fmt_point(Point p)
{
    std::ostringstream out;
    out.precision(6);
    out << p.x << ' ' << p.y;
    return out.str();
}

} // namespace

std::string_view to_string(Role role)
{
    switch (role) {
    case Role::Active: return "ACTIVE";
    case Role::Returning: return "RETURNING";
    case Role::Charging: return "CHARGING";
    case Role::Ready: return "READY";
    case Role::TransitToHandover: return "TRANSIT_TO_HANDOVER";
    case Role::Removed: return "REMOVED";
    }
    return "UNKNOWN";
}

MissionEngine::MissionEngine(const ScenarioConfig& cfg, const DerivedMission& mission, const FleetPlan& plan,
                             const SiteLayout& layout, const std::vector<Route>& routes, const TravelNoise& noise,
                             EngineOptions options)
    : cfg_(cfg), plan_(plan), layout_(layout), routes_(routes), noise_(noise), options_(options)
{
    validate(cfg_);
    if (plan_.m != mission.m)
        throw ConfigError("run_trial: plan.m differs from mission.m");
    if (static_cast<int>(routes_.size()) != plan_.m)
        throw ConfigError("run_trial: need one route per active position");
    if (plan_.k < 0)
        throw ConfigError("run_trial: negative spare count");

    scan_count_.assign(layout_.sites.size(), 0);
    position_live_.assign(plan_.m, true);
    result_.site_count = static_cast<int>(layout_.sites.size());
    result_.min_battery = cfg_.t_active;

    double work = 0.0;
    for (const Route& route : routes_) {
        if (route.ordered_sites.empty())
            throw ConfigError("run_trial: empty route");
        Point here = cfg_.base_position;
        for (int s : route.ordered_sites) {
            work += distance(here, layout_.sites.at(s)) / cfg_.flight_speed + cfg_.t_scan;
            here = layout_.sites[s];
        }
    }
    max_duration_ = options_.max_duration > 0.0 ? options_.max_duration
                                                : 100.0 * (cfg_.t_active + cfg_.t_charge) + 20.0 * work;

    uavs_.resize(plan_.m + plan_.k);
    for (int id = 0; id < static_cast<int>(uavs_.size()); ++id) {
        UAVState& u = uavs_[id];
        u.id = id;
        u.battery_remaining = cfg_.t_active;
        u.position = cfg_.base_position;
        u.role = id < plan_.m ? Role::Active : Role::Ready;
        if (u.role == Role::Active) {
            u.task.position = id;
            u.task.route_cursor = 0;
            start_next_leg(u);
        }
    }
}

double MissionEngine::estimated_return(Point from) const
{
    return distance(from, cfg_.base_position) / cfg_.flight_speed;
}

void MissionEngine::log(std::string_view type, int uav, std::string detail)
{
    if (options_.event_log)
        options_.event_log->push_back({now_, std::string(type), uav, std::move(detail)});
}

void MissionEngine::start_next_leg(UAVState& uav)
{
    TaskProgress& t = uav.task;
    const Route& route = routes_[t.position];
    const Point target = layout_.sites[route.ordered_sites[t.route_cursor]];
    t.phase = TaskProgress::Phase::Flying;
    t.leg_from = uav.position;
    t.leg_to = target;
    t.leg_duration = leg_time(uav.position, target, cfg_, noise_, t.position, t.legs_drawn++);
    t.leg_elapsed = 0.0;
    t.scan_progress = 0.0;
}

void MissionEngine::send_home(UAVState& uav)
{
    const double duration = leg_time(uav.position, cfg_.base_position, cfg_, noise_, uav.task.position,
                                     uav.task.legs_drawn++);
    uav.role = Role::Returning;
    uav.flight = {uav.position, cfg_.base_position, now_, duration, uav.battery_remaining};
}

void MissionEngine::advance_work(UAVState& uav)
{
    TaskProgress& t = uav.task;
    const Route& route = routes_[t.position];
    double budget = cfg_.timestep;
    while (budget > kEps && t.phase != TaskProgress::Phase::Complete) {
        if (t.phase == TaskProgress::Phase::Flying) {
            const double remain = t.leg_duration - t.leg_elapsed;
            if (remain <= budget + kEps) {
                budget -= remain;
                t.leg_elapsed = t.leg_duration;
                uav.position = t.leg_to;
                t.phase = TaskProgress::Phase::Scanning;
            } else {
                t.leg_elapsed += budget;
                uav.position = lerp(t.leg_from, t.leg_to, t.leg_elapsed / t.leg_duration);
                budget = 0.0;
            }
            continue;
        }
        const double remain = cfg_.t_scan - t.scan_progress;
        if (remain <= budget + kEps) {
            budget -= std::max(remain, 0.0);
            const int site = route.ordered_sites[t.route_cursor];
            if (++scan_count_[site] > 1)
                throw InvariantViolation("site " + std::to_string(site) + " scanned twice");
            log("site_scanned", uav.id, std::to_string(site));
            ++t.route_cursor;
            t.scan_progress = 0.0;
            if (t.route_cursor == static_cast<int>(route.ordered_sites.size()))
                t.phase = TaskProgress::Phase::Complete;
            else
                start_next_leg(uav);
        } else {
            t.scan_progress += budget;
            budget = 0.0;
        }
    }
}

void MissionEngine::release_recovered()
{
    for (UAVState& u : uavs_) {
        if (u.role == Role::Returning && u.flight.arrival() <= now_ + kEps) {
            u.role = Role::Charging;
            u.position = cfg_.base_position;
            u.battery_remaining = std::max(0.0, u.flight.battery_at_start - u.flight.duration);
            u.charge_end = u.flight.arrival() + cfg_.t_charge;
            log("return_arrival", u.id);
        }
        if (u.role == Role::Charging && u.charge_end <= now_ + kEps) {
            u.role = Role::Ready;
            u.battery_remaining = cfg_.t_active;
            log("ready", u.id);
        }
    }
}

void MissionEngine::advance_airborne()
{
    for (UAVState& u : uavs_) {
        switch (u.role) {
        case Role::Active: {
            const double raw = u.battery_remaining - cfg_.timestep;
            result_.min_battery = std::min(result_.min_battery, raw);
            u.battery_remaining = std::max(0.0, raw);
            advance_work(u);
            if (u.task.phase == TaskProgress::Phase::Complete) {
                position_live_[u.task.position] = false;
                log("position_complete", u.id, std::to_string(u.task.position));
                send_home(u);
            }
            break;
        }
        case Role::Returning:
        case Role::TransitToHandover: {
            const Flight& f = u.flight;
            const double elapsed = std::clamp(now_ - f.start, 0.0, f.duration);
            u.position = f.duration > 0.0 ? lerp(f.from, f.to, elapsed / f.duration) : f.to;
            const double raw = f.battery_at_start - elapsed;
            result_.min_battery = std::min(result_.min_battery, raw);
            u.battery_remaining = std::max(0.0, raw);
            break;
        }
        default: break;
        }
    }
}

void MissionEngine::serve_triggers()
{
    const double reserve = cfg_.reserve_fraction * cfg_.t_active;
    for (UAVState& requester : uavs_) {
        if (requester.role != Role::Active || requester.task.phase == TaskProgress::Phase::Complete)
            continue;
        if (requester.battery_remaining > estimated_return(requester.position) + reserve + kEps)
            continue;

        result_.request_times.push_back(now_);
        log("request", requester.id, fmt_point(requester.position));

        auto spare = std::find_if(uavs_.begin(), uavs_.end(), [](const UAVState& u) { return u.role == Role::Ready; });
        if (spare == uavs_.end()) {
            result_.exhaustion_events.push_back({now_, requester.id});
            position_live_[requester.task.position] = false;
            requester.role = Role::Removed;
            log("exhaustion", requester.id, std::to_string(requester.task.position));
            continue;
        }

        TaskProgress inherited = requester.task;
        if (inherited.phase == TaskProgress::Phase::Flying) {
            inherited.leg_from = requester.position;
            inherited.leg_duration -= inherited.leg_elapsed;
            inherited.leg_elapsed = 0.0;
        }
        const Point handover_point = requester.position;

        send_home(requester);
        inherited.legs_drawn = requester.task.legs_drawn;
        const double transit = leg_time(cfg_.base_position, handover_point, cfg_, noise_, inherited.position,
                                        inherited.legs_drawn++);
        spare->role = Role::TransitToHandover;
        spare->task = inherited;
        spare->flight = {cfg_.base_position, handover_point, now_, transit, spare->battery_remaining};

        ++result_.handover_count;
        result_.handover_times.push_back(now_);
        log("dispatch", spare->id, "replaces " + std::to_string(requester.id));
    }
}

void MissionEngine::complete_handovers()
{
    for (UAVState& u : uavs_) {
        if (u.role != Role::TransitToHandover || u.flight.arrival() > now_ + kEps)
            continue;
        u.role = Role::Active;
        u.position = u.flight.to;
        const double raw = u.flight.battery_at_start - u.flight.duration;
        result_.min_battery = std::min(result_.min_battery, raw);
        u.battery_remaining = std::max(0.0, raw);
        log("handover_complete", u.id, std::to_string(u.task.position));
    }
}

void MissionEngine::record_trace()
{
    result_.concurrency_trace.push_back(count(Role::Returning) + count(Role::Charging));
}

void MissionEngine::update_finished()
{
    if (std::none_of(position_live_.begin(), position_live_.end(), [](bool b) { return b; })) {
        finished_ = true;
    } else if (now_ >= max_duration_) {
        finished_ = true;
        result_.timed_out = true;
    }
    if (finished_)
        result_.duration = now_;
}

void MissionEngine::step()
{
    if (finished_)
        return;
    now_ = static_cast<double>(++steps_) * cfg_.timestep;
    release_recovered();
    advance_airborne();
    serve_triggers();
    complete_handovers();
    record_trace();
    if (options_.check_accounting && !accounting_check())
        throw InvariantViolation("role counts no longer sum to m + k at t = " + std::to_string(now_));
    update_finished();
}

int MissionEngine::count(Role role) const
{
    return static_cast<int>(std::count_if(uavs_.begin(), uavs_.end(), [role](const UAVState& u) { return u.role == role; }));
}

bool MissionEngine::accounting_check() const
{
    int total = 0;
    for (Role r : {Role::Active, Role::Returning, Role::Charging, Role::Ready, Role::TransitToHandover, Role::Removed})
        total += count(r);
    return total == plan_.m + plan_.k;
}

TrialResult MissionEngine::result() const
{
    TrialResult out = result_;
    out.sites_scanned = static_cast<int>(std::count_if(scan_count_.begin(), scan_count_.end(), [](int c) { return c > 0; }));
    if (!finished_)
        out.duration = now_;
    out.success = out.sites_scanned == out.site_count && out.exhaustion_events.empty() && !out.timed_out;
    return out;
}

TrialResult run_trial(const ScenarioConfig& cfg, const DerivedMission& mission, const FleetPlan& plan,
                      const SiteLayout& layout, const std::vector<Route>& routes, const TravelNoise& noise,
                      EngineOptions options)
{
    const FeasibilityVerdict verdict = check_feasibility(cfg, layout.sites);
    if (!verdict.feasible)
        throw ConfigError("run_trial: " + std::to_string(verdict.offending_sites.size())
                          + " site(s) unreachable within one sortie");
    MissionEngine engine(cfg, mission, plan, layout, routes, noise, options);
    while (!engine.finished())
        engine.step();
    return engine.result();
}

} // namespace uavfleet
