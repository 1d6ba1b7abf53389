#pragma once

/**
 * @file scenario.hpp
 * @brief Scenario files: JSON documents with a `kind` and a kind-specific body,
 * parsed into typed configurations. Every schema problem raises SchemaError
 * with the JSON path of the offending key.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tropnet/carfollow.hpp"
#include "tropnet/errors.hpp"
#include "tropnet/metro_line.hpp"
#include "tropnet/road.hpp"

namespace tropnet::scenario {

using json = nlohmann::json;

inline const std::vector<std::string>& kinds() {
    static const std::vector<std::string> k = {"metro-phases",     "metro-junction", "metro-demand-mp",
                                               "metro-dp-surface", "road-bounds",    "road-itinerary",
                                               "carfollow-bench",  "validate"};
    return k;
}

/// Typed view of one JSON object; tracks its path for error messages.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    const std::string& path() const { return path_; }
    bool has(const char* key) const { return j_.contains(key); }

    [[noreturn]] void fail(const std::string& msg, const char* key = nullptr) const {
        throw SchemaError(path_ + (key ? std::string(".") + key : std::string()) + ": " + msg);
    }

    /// Rejects keys outside the allowed set.
    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

    const json& raw(const char* key) const {
        if (!has(key)) fail("missing required key", key);
        return j_.at(key);
    }

    Node child(const char* key) const { return Node(raw(key), path_ + "." + key); }

    double number(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number()) fail("expected a number", key);
        return v.get<double>();
    }
    double number(const char* key, double def) const { return has(key) ? number(key) : def; }

    double positive(const char* key) const {
        double v = number(key);
        if (!(v > 0)) fail("must be > 0", key);
        return v;
    }
    double positive(const char* key, double def) const { return has(key) ? positive(key) : def; }

    double nonnegative(const char* key, double def) const {
        double v = number(key, def);
        if (!(v >= 0)) fail("must be >= 0", key);
        return v;
    }

    std::size_t count(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail("expected a nonnegative integer", key);
        return v.get<std::size_t>();
    }
    std::size_t count(const char* key, std::size_t def) const { return has(key) ? count(key) : def; }

    bool flag(const char* key, bool def) const {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) fail("expected true or false", key);
        return v.get<bool>();
    }

    std::string text(const char* key, const std::string& def) const {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_string()) fail("expected a string", key);
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) const {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail("expected a nonempty array of numbers", key);
        std::vector<double> out;
        for (auto& x : v) {
            if (!x.is_number()) fail("expected a nonempty array of numbers", key);
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const char* key) const {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail("expected a nonempty array of integers", key);
        std::vector<std::size_t> out;
        for (auto& x : v) {
            if (!x.is_number_integer() || x.get<long long>() < 0) fail("expected a nonempty array of integers", key);
            out.push_back(x.get<std::size_t>());
        }
        return out;
    }

    std::pair<std::size_t, std::size_t> range(const char* key) const {
        std::vector<std::size_t> v = counts(key);
        if (v.size() != 2 || v[0] > v[1]) fail("expected [lo, hi] with lo <= hi", key);
        return {v[0], v[1]};
    }

    std::vector<Node> objects(const char* key) const {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail("expected a nonempty array of objects", key);
        std::vector<Node> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], path_ + "." + key + "[" + std::to_string(i) + "]");
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

// ---------------------------------------------------------------- payloads

struct PhasesSpec {
    metro::PhysicalLine line;
    std::size_t m_lo = 1, m_hi = 0;  ///< m_hi = 0: up to n - 1
};

struct JunctionSpec {
    std::array<metro::JunctionPart, 3> part;
};

struct DemandMpSpec {
    metro::PhysicalLine line;
    std::size_t m = 0;
    std::vector<double> lambdas;
    double alpha = 10.0;
    double g_extra = 20.0;
};

struct SurfaceSpec {
    metro::PhysicalLine line;
    std::size_t m_lo = 1, m_hi = 0, m_step = 1;
    std::vector<double> lambdas;
    double alpha = 30.0;
    double kappa = 500.0;
    std::size_t iters = 2000;
};

struct RoadBoundsSpec {
    road::RoadSectionParams section;
    std::optional<road::TrafficLightParams> light;
    double dt = 1.0;
    std::size_t horizon = 100;
    std::optional<std::pair<double, double>> arrival;  ///< (rate veh/s, burst veh)
};

struct FlowSpec {
    std::vector<std::pair<double, double>> points;
    double tail_rate = 0.0;  ///< veh/s
};

struct ItinerarySpec {
    std::vector<road::ItinerarySection> sections;
    double dt = 1.0;
    std::size_t horizon = 800;
    bool augment = false;
    FlowSpec forward, backward;
};

struct CarfollowSpec {
    carfollow::Benchmark bench;
    std::vector<std::size_t> m_values{1, 5, 10, 20};
    double lambda = 0.0;
    bool trajectories = false;
};

struct ValidateSpec {
    std::size_t lines = 200;
    std::size_t soundness_cases = 500;
    std::size_t dp_lines = 20;
};

using Payload = std::variant<PhasesSpec, JunctionSpec, DemandMpSpec, SurfaceSpec, RoadBoundsSpec, ItinerarySpec,
                             CarfollowSpec, ValidateSpec>;

struct Scenario {
    std::string kind;
    std::string name;
    std::uint64_t seed = 1;
    Payload payload;
};

namespace detail {

inline metro::PhysicalLine parse_line(const Node& n) {
    n.allow({"inter_station_m", "segment_m", "cruise_speed", "acceleration", "deceleration", "terminus_m",
             "terminus_speed", "min_dwell", "min_sep", "symmetric_return"});
    metro::PhysicalLine p;
    p.inter_station_m = n.numbers("inter_station_m");
    for (double d : p.inter_station_m)
        if (!(d > 0)) n.fail("inter-station lengths must be > 0", "inter_station_m");
    p.segment_m = n.positive("segment_m", p.segment_m);
    p.cruise_speed = n.positive("cruise_speed", p.cruise_speed);
    p.acceleration = n.positive("acceleration", p.acceleration);
    p.deceleration = n.positive("deceleration", p.deceleration);
    p.terminus_m = n.positive("terminus_m", p.terminus_m);
    p.terminus_speed = n.positive("terminus_speed", p.terminus_speed);
    p.min_dwell = n.nonnegative("min_dwell", p.min_dwell);
    p.min_sep = n.nonnegative("min_sep", p.min_sep);
    p.symmetric_return = n.flag("symmetric_return", p.symmetric_return);
    return p;
}

inline metro::JunctionPart parse_part(const Node& n) {
    n.allow({"segments", "trains", "travel_s", "sep_s", "max_ts_s"});
    metro::JunctionPart p;
    p.n = n.count("segments");
    if (p.n == 0) n.fail("must be > 0", "segments");
    p.m = n.count("trains", 0);
    p.T = static_cast<double>(p.n) * n.positive("travel_s");
    p.S = static_cast<double>(p.n) * n.positive("sep_s");
    p.max_ts = n.positive("max_ts_s");
    return p;
}

inline road::RoadSectionParams parse_section(const Node& n) {
    road::RoadSectionParams p;
    p.length = n.positive("length");
    p.v = n.positive("v");
    p.w = n.positive("w");
    p.q_max = n.positive("q_max");
    p.n_max = n.positive("n_max");
    p.n = n.nonnegative("n", 0.0);
    try {
        p.validate();
    } catch (const ConfigError& e) {
        n.fail(e.what());
    }
    return p;
}

inline road::TrafficLightParams parse_light(const Node& n) {
    n.allow({"cycle", "green", "red"});
    road::TrafficLightParams tl{n.positive("cycle"), n.nonnegative("green", -1), n.nonnegative("red", -1)};
    if (!n.has("green") || !n.has("red")) n.fail("green and red are required");
    try {
        tl.validate();
    } catch (const ConfigError& e) {
        n.fail(e.what());
    }
    return tl;
}

inline FlowSpec parse_flow(const Node& n) {
    n.allow({"points", "tail_rate"});
    FlowSpec f;
    const json& pts = n.raw("points");
    if (!pts.is_array()) n.fail("expected an array of [t, y] pairs", "points");
    double last_t = 0.0, last_y = 0.0;
    for (auto& p : pts) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            n.fail("expected an array of [t, y] pairs", "points");
        double t = p[0].get<double>(), y = p[1].get<double>();
        if (t <= last_t && !f.points.empty()) n.fail("times must increase", "points");
        if (t <= 0 || y < last_y) n.fail("flow must start after t = 0 and be nondecreasing", "points");
        f.points.emplace_back(t, y);
        last_t = t;
        last_y = y;
    }
    f.tail_rate = n.nonnegative("tail_rate", 0.0);
    return f;
}

inline PhasesSpec parse_phases(const Node& n) {
    PhasesSpec s;
    s.line = parse_line(n.child("line"));
    if (n.has("m_range")) std::tie(s.m_lo, s.m_hi) = n.range("m_range");
    return s;
}

inline JunctionSpec parse_junction(const Node& n) {
    JunctionSpec s;
    s.part[0] = parse_part(n.child("central"));
    std::vector<Node> br = n.objects("branches");
    if (br.size() != 2) n.fail("exactly two branches required", "branches");
    s.part[1] = parse_part(br[0]);
    s.part[2] = parse_part(br[1]);
    return s;
}

inline DemandMpSpec parse_demand_mp(const Node& n) {
    DemandMpSpec s;
    s.line = parse_line(n.child("line"));
    s.m = n.count("m");
    s.lambdas = n.numbers("lambdas");
    for (double l : s.lambdas)
        if (l < 0) n.fail("demand rates must be >= 0", "lambdas");
    s.alpha = n.positive("alpha", s.alpha);
    s.g_extra = n.nonnegative("g_extra_s", s.g_extra);
    return s;
}

inline SurfaceSpec parse_surface(const Node& n) {
    SurfaceSpec s;
    s.line = parse_line(n.child("line"));
    if (n.has("m_range")) std::tie(s.m_lo, s.m_hi) = n.range("m_range");
    s.m_step = n.count("m_step", 1);
    if (s.m_step == 0) n.fail("must be > 0", "m_step");
    s.lambdas = n.numbers("lambdas");
    for (double l : s.lambdas)
        if (l < 0) n.fail("demand rates must be >= 0", "lambdas");
    s.alpha = n.positive("alpha", s.alpha);
    s.kappa = n.positive("kappa", s.kappa);
    s.iters = n.count("iters", s.iters);
    if (s.iters < 2) n.fail("must be >= 2", "iters");
    return s;
}

inline RoadBoundsSpec parse_road_bounds(const Node& n) {
    RoadBoundsSpec s;
    Node sec = n.child("section");
    sec.allow({"length", "v", "w", "q_max", "n_max", "n"});
    s.section = parse_section(sec);
    if (n.has("light")) s.light = parse_light(n.child("light"));
    s.dt = n.positive("dt", s.dt);
    s.horizon = n.count("horizon", s.horizon);
    if (n.has("arrival")) {
        Node a = n.child("arrival");
        a.allow({"rate", "burst"});
        s.arrival = std::make_pair(a.nonnegative("rate", 0.0), a.nonnegative("burst", 0.0));
    }
    return s;
}

inline ItinerarySpec parse_itinerary(const Node& n) {
    ItinerarySpec s;
    for (const Node& sec : n.objects("sections")) {
        sec.allow({"length", "v", "w", "q_max", "n_max", "n", "light"});
        road::ItinerarySection is{parse_section(sec), std::nullopt};
        if (sec.has("light")) is.light = parse_light(sec.child("light"));
        s.sections.push_back(is);
    }
    s.dt = n.positive("dt", s.dt);
    s.horizon = n.count("horizon", s.horizon);
    s.augment = n.flag("augment", s.augment);
    Node in = n.child("inputs");
    in.allow({"forward", "backward"});
    s.forward = parse_flow(in.child("forward"));
    s.backward = parse_flow(in.child("backward"));
    return s;
}

inline CarfollowSpec parse_carfollow(const Node& n) {
    CarfollowSpec s;
    carfollow::Benchmark& b = s.bench;
    b.cars = n.count("cars", b.cars);
    if (b.cars < 2) n.fail("at least two cars required", "cars");
    b.steps = n.count("steps", b.steps);
    b.cruise = n.positive("cruise", b.cruise);
    b.slow = n.nonnegative("slow", b.slow);
    if (n.has("slowdowns")) {
        const json& v = n.raw("slowdowns");
        if (!v.is_array()) n.fail("expected an array of [start, end] step pairs", "slowdowns");
        b.slowdowns.clear();
        for (auto& p : v) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned() ||
                p[0].get<std::size_t>() >= p[1].get<std::size_t>())
                n.fail("expected an array of [start, end] step pairs", "slowdowns");
            b.slowdowns.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
        }
    }
    if (n.has("law")) {
        Node law = n.child("law");
        law.allow({"a", "y0", "v_max"});
        const double a = law.positive("a"), y0 = law.nonnegative("y0", 0.0), vmax = law.positive("v_max");
        if (a > 1) law.fail("slope must lie in (0, 1]", "a");
        b.law = carfollow::saturating_law(a, y0, vmax);
    }
    if (b.cruise > carfollow::speed_law(1e12, b.law)) n.fail("cruise speed above the law's maximum", "cruise");
    if (n.has("m_values")) s.m_values = n.counts("m_values");
    for (std::size_t m : s.m_values)
        if (m == 0) n.fail("leader counts must be >= 1", "m_values");
    s.lambda = n.nonnegative("lambda", s.lambda);
    s.trajectories = n.flag("trajectories", s.trajectories);
    return s;
}

inline ValidateSpec parse_validate(const Node& n) {
    ValidateSpec s;
    s.lines = n.count("lines", s.lines);
    s.soundness_cases = n.count("soundness_cases", s.soundness_cases);
    s.dp_lines = n.count("dp_lines", s.dp_lines);
    return s;
}

}  // namespace detail

inline Scenario parse(const std::string& text, const std::string& origin = "scenario") {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SchemaError(origin + ": not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw SchemaError(origin + ": top level must be an object");
    Node root(doc, "$");
    Scenario s;
    const json& k = root.raw("kind");
    if (!k.is_string()) root.fail("expected a string", "kind");
    s.kind = k.get<std::string>();
    s.name = root.text("name", s.kind);
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) root.fail("invalid name", "name");
    if (root.has("seed")) s.seed = root.count("seed");

    using namespace detail;
    auto common = {"kind", "name", "seed", "description"};
    auto with = [&](std::initializer_list<const char*> extra) {
        std::vector<const char*> all(common);
        all.insert(all.end(), extra.begin(), extra.end());
        std::set<std::string> ok(all.begin(), all.end());
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (!ok.count(it.key())) root.fail("unknown key '" + it.key() + "'");
    };
    if (s.kind == "metro-phases") {
        with({"line", "m_range"});
        s.payload = parse_phases(root);
    } else if (s.kind == "metro-junction") {
        with({"central", "branches"});
        s.payload = parse_junction(root);
    } else if (s.kind == "metro-demand-mp") {
        with({"line", "m", "lambdas", "alpha", "g_extra_s"});
        s.payload = parse_demand_mp(root);
    } else if (s.kind == "metro-dp-surface") {
        with({"line", "m_range", "m_step", "lambdas", "alpha", "kappa", "iters"});
        s.payload = parse_surface(root);
    } else if (s.kind == "road-bounds") {
        with({"section", "light", "dt", "horizon", "arrival"});
        s.payload = parse_road_bounds(root);
    } else if (s.kind == "road-itinerary") {
        with({"sections", "dt", "horizon", "augment", "inputs"});
        s.payload = parse_itinerary(root);
    } else if (s.kind == "carfollow-bench") {
        with({"cars", "steps", "cruise", "slow", "slowdowns", "law", "m_values", "lambda", "trajectories"});
        s.payload = parse_carfollow(root);
    } else if (s.kind == "validate") {
        with({"lines", "soundness_cases", "dp_lines"});
        s.payload = parse_validate(root);
    } else {
        root.fail("unknown kind '" + s.kind + "'", "kind");
    }
    return s;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Scenario load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

}  // namespace tropnet::scenario
