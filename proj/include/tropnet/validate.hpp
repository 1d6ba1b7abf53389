#pragma once

/**
 * @file validate.hpp
 * @brief Seeded cross-checks: closed-form headway against the spectral solver
 * and brute-force circuit enumeration, service-bound soundness against the
 * cell-transmission simulator, and the stabilized DP against its max-plus limit.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tropnet/curve.hpp"
#include "tropnet/maxplus.hpp"
#include "tropnet/metro_dp.hpp"
#include "tropnet/metro_line.hpp"
#include "tropnet/road.hpp"

namespace tropnet::validate {

using Rng = std::mt19937_64;

struct Family {
    std::string name;
    std::size_t passed = 0;
    std::size_t total = 0;

    bool ok() const { return passed == total; }
};

namespace detail {

inline double uniform(Rng& r, double a, double b) { return std::uniform_real_distribution<double>(a, b)(r); }
inline std::size_t index(Rng& r, std::size_t a, std::size_t b) {
    return std::uniform_int_distribution<std::size_t>(a, b)(r);
}

}  // namespace detail

/// Random line with n in [n_lo, n_hi] segments, half of them platforms, 0 < m < n.
inline metro::LineConfig random_line(Rng& r, std::size_t n_lo, std::size_t n_hi) {
    using detail::uniform;
    const std::size_t n = detail::index(r, std::max<std::size_t>(n_lo, 2), n_hi);
    metro::LineConfig cfg;
    for (std::size_t j = 0; j < n; ++j) {
        const bool plat = uniform(r, 0, 1) < 0.5;
        cfg.seg.push_back({uniform(r, 5, 120), plat ? uniform(r, 10, 40) : 0.0, uniform(r, 20, 90), 200.0, plat, 0});
    }
    const std::size_t m = detail::index(r, 1, n - 1);
    std::vector<std::size_t> pos(n);
    for (std::size_t j = 0; j < n; ++j) pos[j] = j;
    std::shuffle(pos.begin(), pos.end(), r);
    for (std::size_t i = 0; i < m; ++i) cfg.seg[pos[i]].train = 1;
    return cfg;
}

struct LineOracle {
    Family spectral{"headway closed form = max cycle ratio"};
    Family enumerated{"headway closed form = enumerated cycles (n <= 8)"};
    double worst = 0.0;
};

inline LineOracle line_oracle(std::uint64_t seed, std::size_t count = 200, std::size_t n_max = 40,
                              double tol = 1e-9) {
    Rng r(seed);
    LineOracle out;
    for (std::size_t c = 0; c < count; ++c) {
        metro::LineConfig cfg = random_line(r, 2, n_max);
        const double h = metro::headway_closed_form(cfg, cfg.m());
        maxplus::PrecedenceGraph g = maxplus::build_precedence_graph(metro::build_line_polymatrix(cfg));
        const double mu = maxplus::max_cycle_ratio(g).ratio;
        const double err = std::abs(h - mu) / std::max(1.0, std::abs(h));
        out.worst = std::max(out.worst, err);
        ++out.spectral.total;
        if (err <= tol) ++out.spectral.passed;
        if (cfg.n() <= 8) {
            double best = -inf;
            for (auto& cr : maxplus::enumerate_cycle_ratios(g)) best = std::max(best, cr.ratio);
            ++out.enumerated.total;
            if (std::abs(best - h) / std::max(1.0, std::abs(h)) <= tol) ++out.enumerated.passed;
        }
    }
    return out;
}

// ---------------------------------------------------------------- road soundness

enum class RoadClass { free, signalized, chain, ring };

inline const char* road_class_name(RoadClass c) {
    switch (c) {
        case RoadClass::free: return "free section";
        case RoadClass::signalized: return "signalized section";
        case RoadClass::chain: return "2-section chain";
        case RoadClass::ring: return "ring feedback";
    }
    return "?";
}

inline road::RoadSectionParams random_section(Rng& r) {
    using detail::uniform;
    road::RoadSectionParams p;
    p.length = uniform(r, 60, 300);
    p.v = uniform(r, 10, 25);
    p.w = uniform(r, 4, 8);
    p.q_max = uniform(r, 0.2, 0.6);
    p.n_max = p.length * (p.q_max / p.v + p.q_max / p.w) * uniform(r, 1.0, 2.0);
    p.n = uniform(r, 0, p.n_max);
    return p;
}

inline road::TrafficLightParams random_light(Rng& r) {
    const double cycle = std::round(detail::uniform(r, 40, 100));
    const double green = std::round(cycle * detail::uniform(r, 0.3, 0.7));
    return {cycle, green, cycle - green};
}

/// Nondecreasing flow from 0 with bursty increments in [0, peak] per step.
inline Curve random_flow(Rng& r, std::size_t H, double dt, double peak) {
    std::vector<double> v(H + 1, 0.0);
    bool on = true;
    for (std::size_t t = 1; t <= H; ++t) {
        if (detail::uniform(r, 0, 1) < 0.1) on = !on;
        v[t] = v[t - 1] + (on ? detail::uniform(r, 0, peak) : 0.0);
    }
    return Curve(v, 0.0, dt);
}

/// Largest violation of Y >= beta * U over both outputs (<= 0 when sound).
inline double bound_violation(const CurveMatrix& beta, const Curve& u_fw, const Curve& u_bw, const road::Flows& y) {
    std::vector<Curve> lb = matrix_apply(beta, {u_fw, u_bw});
    double worst = -inf;
    for (std::size_t t = 0; t <= y.fw.horizon(); ++t) {
        worst = std::max(worst, lb[0][t] - y.fw[t]);
        worst = std::max(worst, lb[1][t] - y.bw[t]);
    }
    return worst;
}

/// One random case of a class; returns the violation.
inline double soundness_case(Rng& r, RoadClass cls, std::size_t H, double dt) {
    road::RoadSectionParams p = random_section(r);
    const double peak = 2.0 * p.q_max * dt;
    Curve u_fw = random_flow(r, H, dt, peak), u_bw = random_flow(r, H, dt, peak);
    switch (cls) {
        case RoadClass::free:
            return bound_violation(road::section_service_matrix(p, H, dt), u_fw, u_bw,
                                   road::cell_transmission_simulate(p, u_fw, u_bw, dt));
        case RoadClass::signalized: {
            road::TrafficLightParams tl = random_light(r);
            return bound_violation(road::controlled_section_service(p, tl, H, dt), u_fw, u_bw,
                                   road::cell_transmission_simulate(p, u_fw, u_bw, dt, tl));
        }
        case RoadClass::chain: {
            road::RoadSectionParams p2 = random_section(r);
            CurveMatrix beta =
                road::concatenate(road::section_service_matrix(p, H, dt), road::section_service_matrix(p2, H, dt));
            return bound_violation(beta, u_fw, u_bw, road::simulate_chain({p, p2}, u_fw, u_bw, dt));
        }
        case RoadClass::ring:
            return bound_violation(road::feedback(road::section_service_matrix(p, H, dt)), u_fw, u_bw,
                                   road::simulate_ring(p, u_fw, u_bw, dt));
    }
    return inf;
}

inline Family soundness_sweep(RoadClass cls, std::uint64_t seed, std::size_t cases = 500, std::size_t H = 200,
                              double dt = 1.0, double tol = 1e-9) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(cls) + 1)));
    Family f{std::string("Y >= beta*U, ") + road_class_name(cls)};
    for (std::size_t c = 0; c < cases; ++c) {
        ++f.total;
        if (soundness_case(r, cls, H, dt) <= tol) ++f.passed;
    }
    return f;
}

// ---------------------------------------------------------------- metro DP

/// delta = 1, w-bar = h~: the stabilized system runs at the max-plus headway.
inline Family dp_equivalence(std::uint64_t seed, std::size_t count = 20, std::size_t K = 5000, double tol = 1e-6) {
    Rng r(seed);
    Family f{"stabilized DP with delta = 1 runs at h~"};
    for (std::size_t c = 0; c < count; ++c) {
        metro::LineConfig cfg = random_line(r, 3, 16);
        metro::ControlParams p;
        p.h_tilde = metro::headway_closed_form(cfg, cfg.m());
        p.w_max.assign(cfg.n(), p.h_tilde);
        p.delta.assign(cfg.n(), 1.0);
        p.theta.assign(cfg.n(), 0.0);
        metro::HeadwayEstimate e =
            metro::simulate_headway(cfg, metro::build_controlled(cfg, p), K, metro::initial_departures(cfg));
        ++f.total;
        if (std::abs(e.h - p.h_tilde) <= tol) ++f.passed;
    }
    return f;
}

inline std::vector<Family> run_all(std::uint64_t seed) {
    LineOracle lo = line_oracle(seed);
    std::vector<Family> out{lo.spectral, lo.enumerated};
    for (RoadClass c : {RoadClass::free, RoadClass::signalized, RoadClass::chain, RoadClass::ring})
        out.push_back(soundness_sweep(c, seed));
    out.push_back(dp_equivalence(seed));
    return out;
}

}  // namespace tropnet::validate
