#include "uavfleet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace uavfleet {

namespace {

constexpr int kMaxLloydIterations = 100;

enum : std::uint64_t
{
    kTagSites = 0x51e5,
    kTagPartition = 0x9a27,
    kTagWind = 0x3d1f,
    kTagLeg = 0x1e6f,
};

int nearest_center(Point p, const std::vector<Point>& centers)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = distance(p, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<Point> kmeanspp_seeds(const std::vector<Point>& pts, int k, std::mt19937_64& rng)
{
    std::vector<Point> centers;
    centers.reserve(k);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    centers.push_back(pts[pick(rng)]);
    std::vector<double> d2(pts.size());
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d = distance(pts[i], centers[nearest_center(pts[i], centers)]);
            d2[i] = d * d;
            total += d2[i];
        }
        if (total <= 0.0) {
            // Every point coincides with a centre; repair handles the rest.
            centers.push_back(pts[pick(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        std::size_t chosen = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            target -= d2[i];
            if (target < 0.0 && d2[i] > 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(pts[chosen]);
    }
    return centers;
}

std::vector<Point> centroids(const std::vector<Point>& pts, const std::vector<int>& label, int k,
                             const std::vector<Point>& previous)
{
    std::vector<Point> sum(k);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sum[label[i]].x += pts[i].x;
        sum[label[i]].y += pts[i].y;
        ++count[label[i]];
    }
    std::vector<Point> out(previous);
    for (int c = 0; c < k; ++c)
        if (count[c] > 0)
            out[c] = {sum[c].x / count[c], sum[c].y / count[c]};
    return out;
}

// Moves points into empty clusters until every cluster is populated.
void repair_empty(const std::vector<Point>& pts, std::vector<int>& label, std::vector<Point>& centers)
{
    const int k = static_cast<int>(centers.size());
    for (;;) {
        std::vector<int> count(k, 0);
        for (int l : label)
            ++count[l];
        const auto empty = std::find(count.begin(), count.end(), 0);
        if (empty == count.end())
            return;
        const int largest = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
        std::size_t farthest = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (label[i] != largest)
                continue;
            const double d = distance(pts[i], centers[largest]);
            if (d > far_d) {
                far_d = d;
                farthest = i;
            }
        }
        const int target = static_cast<int>(empty - count.begin());
        label[farthest] = target;
        centers[target] = pts[farthest];
        centers = centroids(pts, label, k, centers);
    }
}

} // namespace

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return mix64(mix64(mix64(a) ^ b) ^ c);
}

double to_unit(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SiteLayout generate_sites(const ScenarioConfig& cfg, int centers, std::uint64_t seed)
{
    if (cfg.site_count <= 0)
        throw ConfigError("generate_sites: site_count must be positive");
    if (centers < 1)
        throw ConfigError("generate_sites: need at least one cluster centre");

    std::mt19937_64 rng(derive_seed(seed, kTagSites));
    std::uniform_real_distribution<double> ux(0.0, cfg.area_width);
    std::uniform_real_distribution<double> uy(0.0, cfg.area_height);
    std::vector<Point> hubs(centers);
    for (Point& h : hubs)
        h = {ux(rng), uy(rng)};

    SiteLayout layout;
    layout.sites.reserve(cfg.site_count);
    layout.generation_center.reserve(cfg.site_count);
    std::uniform_int_distribution<int> which(0, centers - 1);
    std::normal_distribution<double> scatter(0.0, 1.0);
    for (int i = 0; i < cfg.site_count; ++i) {
        const int c = which(rng);
        const double dx = scatter(rng) * cfg.cluster_scatter;
        const double dy = scatter(rng) * cfg.cluster_scatter;
        layout.sites.push_back({std::clamp(hubs[c].x + dx, 0.0, cfg.area_width),
                                std::clamp(hubs[c].y + dy, 0.0, cfg.area_height)});
        layout.generation_center.push_back(c);
    }
    return layout;
}

SiteLayout partition_sites(SiteLayout layout, int m, std::uint64_t seed)
{
    const auto& pts = layout.sites;
    if (m < 1)
        throw ConfigError("partition_sites: m must be positive");
    if (static_cast<int>(pts.size()) < m)
        throw ConfigError("partition_sites: fewer sites than active UAVs");

    std::mt19937_64 rng(derive_seed(seed, kTagPartition));
    std::vector<Point> centers = kmeanspp_seeds(pts, m, rng);
    std::vector<int> label(pts.size(), -1);
    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int c = nearest_center(pts[i], centers);
            if (c != label[i]) {
                label[i] = c;
                changed = true;
            }
        }
        repair_empty(pts, label, centers);
        if (!changed)
            break;
        centers = centroids(pts, label, m, centers);
    }
    repair_empty(pts, label, centers);
    layout.assignment = std::move(label);
    return layout;
}

Route build_route(const SiteLayout& layout, int uav_index, Point base)
{
    std::vector<int> pending;
    for (std::size_t i = 0; i < layout.assignment.size(); ++i)
        if (layout.assignment[i] == uav_index)
            pending.push_back(static_cast<int>(i));
    if (pending.empty())
        throw DomainError("build_route: UAV " + std::to_string(uav_index) + " has no assigned sites");

    Route route{uav_index, {}};
    route.ordered_sites.reserve(pending.size());
    Point here = base;
    while (!pending.empty()) {
        // pending stays sorted, so the first strict minimum is the lowest index on ties.
        auto best = pending.begin();
        double best_d = distance(here, layout.sites[*best]);
        for (auto it = pending.begin() + 1; it != pending.end(); ++it) {
            const double d = distance(here, layout.sites[*it]);
            if (d < best_d) {
                best_d = d;
                best = it;
            }
        }
        route.ordered_sites.push_back(*best);
        here = layout.sites[*best];
        pending.erase(best);
    }
    return route;
}

std::vector<Route> build_routes(const SiteLayout& layout, int m, Point base)
{
    std::vector<Route> routes;
    routes.reserve(m);
    for (int u = 0; u < m; ++u)
        routes.push_back(build_route(layout, u, base));
    return routes;
}

double unit_mean_lognormal(double cv, double standard_normal)
{
    if (cv <= 0.0)
        return 1.0;
    const double sigma2 = std::log1p(cv * cv);
    return std::exp(-0.5 * sigma2 + std::sqrt(sigma2) * standard_normal);
}

TravelNoise::TravelNoise(std::uint64_t seed, double wind_cv, double per_leg_halfwidth)
    : seed_(seed), halfwidth_(per_leg_halfwidth)
{
    std::mt19937_64 rng(derive_seed(seed, kTagWind));
    std::normal_distribution<double> normal(0.0, 1.0);
    normal_ = normal(rng);
    common_ = unit_mean_lognormal(wind_cv, normal_);
}

double TravelNoise::per_leg_factor(int uav_index, int leg_index) const
{
    if (halfwidth_ <= 0.0)
        return 1.0;
    const std::uint64_t bits = derive_seed(derive_seed(seed_, kTagLeg), static_cast<std::uint64_t>(uav_index),
                                           static_cast<std::uint64_t>(leg_index));
    return 1.0 - halfwidth_ + 2.0 * halfwidth_ * to_unit(bits);
}

double leg_time(Point from, Point to, const ScenarioConfig& cfg, const TravelNoise& noise, int uav_index,
                int leg_index)
{
    const double d = distance(from, to);
    if (d == 0.0)
        return 0.0;
    return d / cfg.flight_speed * noise.common_mode_factor() * noise.per_leg_factor(uav_index, leg_index);
}

std::uint64_t layout_hash(const SiteLayout& layout)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const Point& p : layout.sites) {
        feed(&p.x, sizeof p.x);
        feed(&p.y, sizeof p.y);
    }
    for (int a : layout.assignment)
        feed(&a, sizeof a);
    return h;
}

} // namespace uavfleet
