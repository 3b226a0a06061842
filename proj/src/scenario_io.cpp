#include "uavfleet/scenario.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace uavfleet {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct LineContext
{
    const std::string& source;
    int line;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
    }
};

double parse_real(const std::string& text, const LineContext& at)
{
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        at.fail("expected a number, got '" + text + "'");
    return value;
}

int parse_int(const std::string& text, const LineContext& at)
{
    int value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        at.fail("expected an integer, got '" + text + "'");
    return value;
}

Point parse_point(const std::string& text, const LineContext& at)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        at.fail("expected 'x, y', got '" + text + "'");
    return {parse_real(trim(text.substr(0, comma)), at), parse_real(trim(text.substr(comma + 1)), at)};
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const LineContext&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"name", [](ScenarioConfig& c, const std::string& v, const LineContext&) { c.name = v; }},
        {"site_count", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.site_count = parse_int(v, at); }},
        {"area_width", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.area_width = parse_real(v, at); }},
        {"area_height", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.area_height = parse_real(v, at); }},
        {"base_position", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.base_position = parse_point(v, at); }},
        {"t_active", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.t_active = parse_real(v, at); }},
        {"t_charge", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.t_charge = parse_real(v, at); }},
        {"t_scan", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.t_scan = parse_real(v, at); }},
        {"flight_speed", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.flight_speed = parse_real(v, at); }},
        {"reserve_fraction", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.reserve_fraction = parse_real(v, at); }},
        {"timestep", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.timestep = parse_real(v, at); }},
        {"wind_cv", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.wind_cv = parse_real(v, at); }},
        {"per_leg_noise_halfwidth", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.per_leg_noise_halfwidth = parse_real(v, at); }},
        {"cluster_scatter", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.cluster_scatter = parse_real(v, at); }},
        {"cluster_centers", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.cluster_centers = parse_int(v, at); }},
        {"m_override", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.m_override = parse_int(v, at); }},
        {"r_override", [](ScenarioConfig& c, const std::string& v, const LineContext& at) { c.r_override = parse_real(v, at); }},
    };
    return table;
}

} // namespace

ScenarioConfig parse_scenario(std::istream& in, const std::string& source)
{
    ScenarioConfig cfg;
    std::map<std::string, int> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const LineContext at{source, line_no};
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            at.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            at.fail("unknown key '" + key + "'");
        if (auto [pos, fresh] = seen.emplace(key, line_no); !fresh)
            at.fail("duplicate key '" + key + "' (first set on line " + std::to_string(pos->second) + ")");
        if (value.empty())
            at.fail("missing value for '" + key + "'");
        it->second(cfg, value, at);
    }
    for (const char* key : {"site_count", "area_width", "area_height", "base_position", "t_active",
                            "t_charge", "t_scan", "flight_speed"}) {
        if (!seen.contains(key))
            throw ConfigError(source + ": missing required key '" + std::string(key) + "'");
    }
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open scenario file");
    return parse_scenario(in, path);
}

std::string to_text(const ScenarioConfig& cfg)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "name = " << cfg.name << '\n'
        << "site_count = " << cfg.site_count << '\n'
        << "area_width = " << cfg.area_width << '\n'
        << "area_height = " << cfg.area_height << '\n'
        << "base_position = " << cfg.base_position.x << ", " << cfg.base_position.y << '\n'
        << "t_active = " << cfg.t_active << '\n'
        << "t_charge = " << cfg.t_charge << '\n'
        << "t_scan = " << cfg.t_scan << '\n'
        << "flight_speed = " << cfg.flight_speed << '\n'
        << "reserve_fraction = " << cfg.reserve_fraction << '\n'
        << "timestep = " << cfg.timestep << '\n'
        << "wind_cv = " << cfg.wind_cv << '\n'
        << "per_leg_noise_halfwidth = " << cfg.per_leg_noise_halfwidth << '\n'
        << "cluster_scatter = " << cfg.cluster_scatter << '\n';
    if (cfg.cluster_centers)
        out << "cluster_centers = " << *cfg.cluster_centers << '\n';
    if (cfg.m_override)
        out << "m_override = " << *cfg.m_override << '\n';
    if (cfg.r_override)
        out << "r_override = " << *cfg.r_override << '\n';
    return out.str();
}

std::uint64_t config_hash(const ScenarioConfig& cfg)
{
    // FNV-1a over the canonical text.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace uavfleet
