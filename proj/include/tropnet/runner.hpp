#pragma once

/**
 * @file runner.hpp
 * @brief Executes a parsed scenario and returns its CSV tables.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tropnet/carfollow.hpp"
#include "tropnet/curve.hpp"
#include "tropnet/metro_dp.hpp"
#include "tropnet/metro_line.hpp"
#include "tropnet/road.hpp"
#include "tropnet/scenario.hpp"
#include "tropnet/validate.hpp"

namespace tropnet::runner {

struct Table {
    std::string file;
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const {
        std::string out;
        for (auto& c : comments) out += "# " + c + "\n";
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
            out += "\n";
        };
        line(header);
        for (auto& r : rows) line(r);
        return out;
    }
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> iters;
};

struct Result {
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    bool converged = true;
    bool checks_passed = true;
};

/// Shortest round-trip-stable text for CSV cells; infinities as "inf".
inline std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    if (x == 0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline std::string fmt(std::size_t x) { return std::to_string(x); }

namespace detail {

inline Result phases(const scenario::PhasesSpec& s) {
    metro::LineConfig cfg = metro::build_line_config(s.line);
    const std::size_t hi = s.m_hi ? s.m_hi : cfg.n() - 1;
    Table t{"phases.csv", {}, {"m", "rho", "h_s", "f_per_h", "w_s", "g_s", "phase"}, {}};
    for (auto& p : metro::phase_diagram(cfg, s.m_lo, hi))
        t.rows.push_back({fmt(p.m), fmt(p.rho), fmt(p.h), fmt(p.f * 3600), fmt(p.w), fmt(p.g), metro::phase_name(p.phase)});
    std::size_t platforms = 0;
    for (auto& sg : cfg.seg) platforms += sg.platform ? 1 : 0;
    const std::size_t m_opt = metro::optimal_trains(cfg);
    Table sum{"summary.csv",
              {},
              {"segments", "platforms", "length_m", "h_min_s", "f_max_per_h", "m_opt"},
              {{fmt(cfg.n()), fmt(platforms), fmt(cfg.length()), fmt(cfg.h_min()), fmt(3600 / cfg.h_min()),
                fmt(m_opt)}}};
    return {{t, sum}, {}, true, true};
}

inline Result junction(const scenario::JunctionSpec& s) {
    Table t{"junction.csv", {}, {"m", "dm", "m0", "m1", "m2", "h0_s", "h1_s", "h2_s", "f0_per_h", "binding"}, {}};
    std::set<std::pair<long long, long long>> seen;
    std::set<std::string> labels;
    metro::JunctionConfig c;
    c.part = s.part;
    for (std::size_t m0 = 0; m0 <= s.part[0].n; ++m0)
        for (std::size_t m1 = 0; m1 <= s.part[1].n; ++m1)
            for (std::size_t m2 = 0; m2 <= s.part[2].n; ++m2) {
                const long long m = static_cast<long long>(m0 + m1 + m2);
                const long long dm = static_cast<long long>(m2) - static_cast<long long>(m1);
                if (!seen.insert({m, dm}).second) continue;
                c.part[0].m = m0;
                c.part[1].m = m1;
                c.part[2].m = m2;
                metro::JunctionResult r = metro::junction_headway(c);
                labels.insert(metro::junction_term_name(r.binding));
                t.rows.push_back({std::to_string(m), std::to_string(dm), fmt(m0), fmt(m1), fmt(m2), fmt(r.h0),
                                  fmt(r.h1), fmt(r.h2), fmt(r.f0 * 3600), metro::junction_term_name(r.binding)});
            }
    Table reg{"regions.csv", {}, {"binding"}, {}};
    for (auto& l : labels) reg.rows.push_back({l});
    return {{t, reg}, {}, true, true};
}

inline metro::DemandConfig uniform_demand(const metro::LineConfig& cfg, double lambda, double alpha, double g_extra) {
    metro::DemandConfig d;
    for (auto& s : cfg.seg) {
        metro::PlatformDemand p;
        p.run_nominal = s.run + s.dwell;
        p.run_min = s.run;
        if (s.platform) {
            p.lambda_in = p.lambda_out = lambda;
            p.alpha_in = p.alpha_out = alpha;
            p.g_max = s.run + s.sep + g_extra;
        }
        d.node.push_back(p);
    }
    return d;
}

inline Result demand_mp(const scenario::DemandMpSpec& s) {
    metro::LineConfig cfg = metro::with_trains(metro::build_line_config(s.line), s.m);
    if (s.m == 0 || s.m >= cfg.n()) throw StructureError("metro-demand-mp: m must satisfy 0 < m < n");
    Table t{"demand_mp.csv", {}, {"lambda", "x", "h_s", "f_per_h", "conditions_ok"}, {}};
    for (double lam : s.lambdas) {
        metro::DemandConfig d = uniform_demand(cfg, lam, s.alpha, s.g_extra);
        metro::DemandHeadway h = metro::demand_dependent_headway(cfg, d, s.m);
        t.rows.push_back({fmt(lam), fmt(2 * lam / s.alpha), fmt(h.h), fmt(h.f * 3600), h.conditions_ok ? "1" : "0"});
    }
    return {{t}, {}, true, true};
}

inline Result surface(const scenario::SurfaceSpec& s, const Overrides& o) {
    metro::LineConfig base = metro::build_line_config(s.line);
    const std::size_t K = o.iters.value_or(s.iters);
    const std::size_t hi = std::min(s.m_hi ? s.m_hi : base.n() - 1, base.n() - 1);
    Table t{"surface.csv", {}, {"m", "lambda", "h_s", "f_per_h", "w_s", "g_s", "converged"}, {}};
    Result res;
    for (std::size_t m = std::max<std::size_t>(s.m_lo, 1); m <= hi; m += s.m_step)
        for (auto& p : metro::demand_phase_surface(base, s.lambdas, s.alpha, s.kappa, m, m, K)) {
            t.rows.push_back({fmt(p.m), fmt(p.lambda), fmt(p.h), fmt(p.f * 3600), fmt(p.w), fmt(p.g),
                              p.converged ? "1" : "0"});
            if (!p.converged) {
                res.converged = false;
                res.warnings.push_back("no stationary regime at m = " + fmt(p.m) + ", lambda = " + fmt(p.lambda) +
                                       " after K = " + fmt(K));
            }
        }
    res.tables.push_back(t);
    return res;
}

inline const char* entry_name(std::size_t i, std::size_t j) {
    static const char* n[2][2] = {{"11", "12"}, {"21", "22"}};
    return n[i][j];
}

inline Result road_bounds(const scenario::RoadBoundsSpec& s, const Overrides& o) {
    const std::size_t H = o.horizon.value_or(s.horizon);
    const double dt = s.dt;
    CurveMatrix beta = s.light ? road::controlled_section_service(s.section, *s.light, H, dt)
                               : road::section_service_matrix(s.section, H, dt);
    std::vector<RateLatency> ref = road::rate_latency_bounds(s.section, dt);
    Table rl{"rate_latency.csv",
             {},
             {"entry", "rate_veh_per_s", "latency_s", "offset_veh", "ref_latency_s", "ref_offset_veh"},
             {}};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            RateLatency e = extract_rate_latency(beta(i, j));
            const RateLatency& r = ref[2 * i + j];
            rl.rows.push_back({entry_name(i, j), fmt(e.rate / dt), fmt(e.latency * dt), fmt(e.offset),
                               fmt(r.latency * dt), fmt(r.offset)});
        }
    Table sv{"service.csv", {}, {"t_s", "b11", "b12", "b21", "b22"}, {}};
    sv.comments.push_back("tail_rate_per_step b11=" + fmt(beta(0, 0).tail_rate()) + " b12=" +
                          fmt(beta(0, 1).tail_rate()) + " b21=" + fmt(beta(1, 0).tail_rate()) +
                          " b22=" + fmt(beta(1, 1).tail_rate()));
    for (std::size_t t = 0; t <= H; ++t)
        sv.rows.push_back({fmt(static_cast<double>(t) * dt), fmt(beta(0, 0)[t]), fmt(beta(0, 1)[t]),
                           fmt(beta(1, 0)[t]), fmt(beta(1, 1)[t])});
    Result res{{rl, sv}, {}, true, true};
    if (s.arrival) {
        Curve a = curves::affine(s.arrival->first * dt, s.arrival->second, H, dt);
        Table b{"bounds.csv", {}, {"pair", "delay_bound_s", "backlog_bound_veh"}, {}};
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                BoundResult r = bound_calculators(a, beta(i, j));
                if (r.edge_warning) res.warnings.push_back(std::string("bound at horizon edge for ") + entry_name(i, j));
                b.rows.push_back({std::string(entry_name(i, j)).insert(1, "-"), fmt(r.delay * dt), fmt(r.backlog)});
            }
        res.tables.push_back(b);
    }
    return res;
}

inline Result itinerary(const scenario::ItinerarySpec& s, const Overrides& o) {
    const std::size_t H = o.horizon.value_or(s.horizon);
    Curve u_fw = road::piecewise_flow(s.forward.points, s.forward.tail_rate, H, s.dt);
    Curve u_bw = road::piecewise_flow(s.backward.points, s.backward.tail_rate, H, s.dt);
    road::ItineraryResult r = road::itinerary_delay(s.sections, u_fw, u_bw, s.augment);
    Result res;
    Table d{"delays.csv", {}, {"pair", "delay_bound_s", "backlog_bound_veh"}, {}};
    for (std::size_t i = 0; i < 2; ++i) {
        double backlog_i = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
            const double bl = vertical_deviation(r.alpha.alpha(i, j), r.beta(i, j));
            backlog_i = std::max(backlog_i, bl);
            d.rows.push_back({std::string(entry_name(i, j)).insert(1, "-"), fmt(r.delay.parts[i][j] * s.dt), fmt(bl)});
        }
        d.rows.push_back({std::to_string(i + 1), fmt(r.delay.d[i] * s.dt), fmt(backlog_i)});
    }
    Table sh{"shifts.csv", {}, {"i", "j", "T_s"}, {}};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            sh.rows.push_back({fmt(i + 1), fmt(j + 1), fmt(r.alpha.T[i][j] * s.dt)});
    if (r.delay.unbounded) res.warnings.push_back("arrival rate exceeds service rate: delay unbounded");
    if (r.delay.edge_warning) res.warnings.push_back("delay attained at the horizon edge; increase horizon");
    res.tables = {d, sh};
    return res;
}

inline Result carfollow_bench(const scenario::CarfollowSpec& s, const Overrides& o) {
    carfollow::Benchmark b = s.bench;
    if (o.iters) b.steps = *o.iters;
    Result res;
    Table t{"metrics.csv", {}, {"m", "lambda", "speed_var", "accel_var"}, {}};
    for (std::size_t m : s.m_values) {
        auto traj = carfollow::run_benchmark(b, {m, s.lambda});
        carfollow::TransientMetrics tm = carfollow::transient_metrics(traj);
        t.rows.push_back({fmt(m), fmt(s.lambda), fmt(tm.speed_variance), fmt(tm.accel_variance)});
        if (s.trajectories) {
            Table tr{"trajectory_m" + fmt(m) + ".csv", {}, {"t"}, {}};
            for (std::size_t n = 0; n < b.cars; ++n) tr.header.push_back("x_" + fmt(n + 1));
            for (std::size_t k = 0; k < traj.size(); ++k) {
                std::vector<std::string> row{fmt(k)};
                for (double x : traj[k]) row.push_back(fmt(x));
                tr.rows.push_back(std::move(row));
            }
            res.tables.push_back(std::move(tr));
        }
    }
    res.tables.insert(res.tables.begin(), t);
    return res;
}

}  // namespace detail

/// Runs the oracle families with the given sizes.
inline Result validate_suite(const scenario::ValidateSpec& s, std::uint64_t seed) {
    validate::LineOracle lo = validate::line_oracle(seed, s.lines);
    std::vector<validate::Family> fam{lo.spectral, lo.enumerated};
    for (auto c : {validate::RoadClass::free, validate::RoadClass::signalized, validate::RoadClass::chain,
                   validate::RoadClass::ring})
        fam.push_back(validate::soundness_sweep(c, seed, s.soundness_cases));
    fam.push_back(validate::dp_equivalence(seed, s.dp_lines));
    Result res;
    Table t{"validate.csv", {}, {"family", "passed", "total", "status"}, {}};
    for (auto& f : fam) {
        t.rows.push_back({"\"" + f.name + "\"", fmt(f.passed), fmt(f.total), f.ok() ? "pass" : "FAIL"});
        if (!f.ok()) {
            res.checks_passed = false;
            res.warnings.push_back(f.name + ": " + fmt(f.passed) + "/" + fmt(f.total));
        }
    }
    res.tables.push_back(t);
    return res;
}

inline Result run(const scenario::Scenario& sc, const Overrides& o = {}) {
    const std::uint64_t seed = o.seed.value_or(sc.seed);
    return std::visit(
        [&](const auto& p) -> Result {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, scenario::PhasesSpec>) return detail::phases(p);
            else if constexpr (std::is_same_v<T, scenario::JunctionSpec>) return detail::junction(p);
            else if constexpr (std::is_same_v<T, scenario::DemandMpSpec>) return detail::demand_mp(p);
            else if constexpr (std::is_same_v<T, scenario::SurfaceSpec>) return detail::surface(p, o);
            else if constexpr (std::is_same_v<T, scenario::RoadBoundsSpec>) return detail::road_bounds(p, o);
            else if constexpr (std::is_same_v<T, scenario::ItinerarySpec>) return detail::itinerary(p, o);
            else if constexpr (std::is_same_v<T, scenario::CarfollowSpec>) return detail::carfollow_bench(p, o);
            else return validate_suite(p, seed);
        },
        sc.payload);
}

}  // namespace tropnet::runner
