#pragma once

/**
 * @file road.hpp
 * @brief Road traffic as min-plus linear servers: section service matrices,
 * signalized sections, concatenation, feedback, itinerary delay bounds and a
 * cell-transmission reference simulator.
 *
 * Flows are cumulative vehicle counts sampled every dt seconds. Index 0 is the
 * forward flow (demand), index 1 the backward flow (supply).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tropnet/common.hpp"
#include "tropnet/curve.hpp"

namespace tropnet::road {

struct RoadSectionParams {
    double length = 0.0;      ///< m
    double v = 0.0;           ///< free speed, m/s
    double w = 0.0;           ///< backward wave speed, m/s
    double q_max = 0.0;       ///< veh/s
    double n_max = 0.0;       ///< veh
    double n = 0.0;           ///< initial vehicles

    double n_free() const { return n_max - n; }
    double jam_density() const { return n_max / length; }

    void validate() const {
        if (length <= 0 || v <= 0 || w <= 0 || q_max <= 0) throw ConfigError("road section: nonpositive parameter");
        if (n < 0 || n > n_max) throw ConfigError("road section: initial occupancy outside [0, n_max]");
        if (jam_density() < q_max / v + q_max / w - 1e-12)
            throw ConfigError("road section: trapezoid inconsistent (jam density below q/v + q/w)");
    }
};

struct TrafficLightParams {
    double cycle = 0.0;  ///< s
    double green = 0.0;  ///< s
    double red = 0.0;    ///< s

    void validate() const {
        if (green < 0 || red < 0) throw ConfigError("traffic light: negative phase");
        if (std::abs(cycle - green - red) > 1e-9) throw ConfigError("traffic light: cycle != green + red");
    }
};

/// Latencies rounded up to whole steps; the same grid is used by bounds and simulator.
struct SectionGrid {
    std::size_t d = 1;   ///< forward latency, steps
    std::size_t dw = 1;  ///< backward latency, steps
    std::size_t r = 0;   ///< red time, steps
    double p = 0.0;      ///< vehicles served per forward latency
    double n = 0.0;
    double n_free = 0.0;
};

inline std::size_t steps_up(double seconds, double dt) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(seconds / dt - 1e-9)));
}

inline SectionGrid section_grid(const RoadSectionParams& p, double dt,
                                const std::optional<TrafficLightParams>& tl = std::nullopt) {
    p.validate();
    SectionGrid g;
    g.d = steps_up(p.length / p.v, dt);
    g.dw = steps_up(p.length / p.w, dt);
    g.p = p.q_max * static_cast<double>(g.d) * dt;
    g.n = p.n;
    g.n_free = p.n_free();
    if (tl) {
        tl->validate();
        if (tl->cycle <= 0) throw ConfigError("traffic light: nonpositive cycle");
        g.r = tl->red > 0 ? static_cast<std::size_t>(std::ceil(tl->red / dt - 1e-9)) : 0;
        g.p *= tl->green / tl->cycle;
    }
    return g;
}

namespace detail {

inline CurveMatrix section_matrix(const SectionGrid& g, std::size_t H, double dt) {
    using namespace curves;
    Curve a_star = subadditive_closure(gain_shift(g.p, g.d, H, dt));
    Curve b1 = gain_shift(g.n, g.d + g.r, H, dt);
    Curve c2 = gain_shift(g.n_free, g.dw, H, dt);
    CurveMatrix beta(2, 2, unit(H, dt));
    beta(0, 0) = curve_conv(a_star, b1);
    beta(0, 1) = a_star;
    beta(1, 0) = curve_conv(c2, beta(0, 0));
    beta(1, 1) = curve_conv(c2, a_star);
    return matrix_min(CurveMatrix::identity(2, H, dt), beta);
}

}  // namespace detail

inline CurveMatrix section_service_matrix(const RoadSectionParams& p, std::size_t H, double dt) {
    return detail::section_matrix(section_grid(p, dt), H, dt);
}

inline CurveMatrix controlled_section_service(const RoadSectionParams& p, const TrafficLightParams& tl, std::size_t H,
                                              double dt) {
    return detail::section_matrix(section_grid(p, dt, tl), H, dt);
}

/// Per-entry lower bounds q (t - T)^+ + offset with unrounded latencies, in steps.
inline std::vector<RateLatency> rate_latency_bounds(const RoadSectionParams& p, double dt) {
    p.validate();
    const double R = p.q_max * dt;
    const double tf = p.length / p.v / dt, tb = p.length / p.w / dt;
    return {{R, tf, p.n}, {R, tf, 0.0}, {R, tf + tb, p.n + p.n_free()}, {R, tb, p.n_free()}};
}

/// Service matrix of two systems connected in both directions.
inline CurveMatrix concatenate(const CurveMatrix& b1, const CurveMatrix& b2) {
    if (b1.rows() != 2 || b1.cols() != 2 || b2.rows() != 2 || b2.cols() != 2)
        throw ShapeError("concatenate: 2x2 matrices required");
    auto c = [](const Curve& x, const Curve& y) { return curve_conv(x, y); };
    Curve loop = subadditive_closure(c(b2(1, 0), b1(0, 1)));
    CurveMatrix out = b1;
    out(0, 0) = curve_min(c(b2(0, 0), b1(0, 0)), c(c(c(b2(0, 0), b1(0, 1)), loop), c(b2(1, 0), b1(0, 0))));
    out(0, 1) = curve_min(c(c(c(b2(0, 0), b1(0, 1)), loop), b2(1, 1)), b2(0, 1));
    out(1, 0) = curve_min(b1(1, 0), c(c(b1(1, 1), loop), c(b2(1, 0), b1(0, 0))));
    out(1, 1) = c(c(b1(1, 1), loop), b2(1, 1));
    return out;
}

/// beta* beta.
inline CurveMatrix feedback(const CurveMatrix& b) { return matrix_conv(matrix_closure(b), b); }

// ---------------------------------------------------------------- simulator

struct Flows {
    Curve fw;
    Curve bw;
};

namespace detail {

inline double clamp_at(const std::vector<double>& x, long long t) {
    return x[static_cast<std::size_t>(std::max(0LL, t))];
}

inline void check_causal(const Curve& u_fw, const Curve& u_bw) {
    if (u_fw[0] != 0.0 || u_bw[0] != 0.0) throw ConfigError("simulator: inputs must start at zero");
}

/// One section step at time t >= 1 given the inputs known up to t.
inline double section_q(const SectionGrid& g, const std::vector<double>& q, const std::vector<double>& ufw,
                        double ubw_t, long long t) {
    const long long d = static_cast<long long>(g.d), r = static_cast<long long>(g.r);
    return std::min({clamp_at(ufw, t - d - r) + g.n, clamp_at(q, t - d) + g.p, ubw_t});
}

inline Flows outputs(const SectionGrid& g, const std::vector<double>& q, double dt) {
    const std::size_t H = q.size() - 1;
    std::vector<double> yf(H + 1, 0.0), yb(H + 1, 0.0);
    for (std::size_t t = 1; t <= H; ++t) {
        yf[t] = q[t];
        yb[t] = clamp_at(q, static_cast<long long>(t) - static_cast<long long>(g.dw)) + g.n_free;
    }
    return {Curve(yf, 0.0, dt), Curve(yb, 0.0, dt)};
}

}  // namespace detail

/// Cell-transmission recursion on the section grid; signalized when tl is set.
inline Flows cell_transmission_simulate(const RoadSectionParams& p, const Curve& u_fw, const Curve& u_bw,
                                        double dt, const std::optional<TrafficLightParams>& tl = std::nullopt) {
    detail::check_causal(u_fw, u_bw);
    SectionGrid g = section_grid(p, dt, tl);
    const std::size_t H = std::min(u_fw.horizon(), u_bw.horizon());
    std::vector<double> q(H + 1, 0.0);
    for (std::size_t t = 1; t <= H; ++t)
        q[t] = detail::section_q(g, q, u_fw.samples(), u_bw[t], static_cast<long long>(t));
    return detail::outputs(g, q, dt);
}

/// Sections in series, simulated jointly; returns (downstream forward, upstream backward).
inline Flows simulate_chain(const std::vector<RoadSectionParams>& secs, const Curve& u_fw, const Curve& u_bw,
                            double dt) {
    detail::check_causal(u_fw, u_bw);
    if (secs.empty()) throw ConfigError("simulate_chain: no sections");
    const std::size_t k = secs.size();
    const std::size_t H = std::min(u_fw.horizon(), u_bw.horizon());
    std::vector<SectionGrid> g;
    for (auto& s : secs) g.push_back(section_grid(s, dt));
    std::vector<std::vector<double>> q(k, std::vector<double>(H + 1, 0.0));
    auto ybw = [&](std::size_t i, long long t) {
        return t <= 0 ? 0.0 : detail::clamp_at(q[i], t - static_cast<long long>(g[i].dw)) + g[i].n_free;
    };
    for (std::size_t t = 1; t <= H; ++t) {
        const auto tt = static_cast<long long>(t);
        for (std::size_t i = 0; i < k; ++i) {
            const std::vector<double>& uf = i == 0 ? u_fw.samples() : q[i - 1];
            double ub = i + 1 == k ? u_bw[t] : ybw(i + 1, tt);
            q[i][t] = detail::section_q(g[i], q[i], uf, ub, tt);
        }
    }
    std::vector<double> yf(H + 1, 0.0), yb(H + 1, 0.0);
    for (std::size_t t = 1; t <= H; ++t) {
        yf[t] = q[k - 1][t];
        yb[t] = ybw(0, static_cast<long long>(t));
    }
    return {Curve(yf, 0.0, dt), Curve(yb, 0.0, dt)};
}

/// Section whose outputs are fed back: inputs min(U_fw, Y_fw) and min(U_bw, Y_bw).
inline Flows simulate_ring(const RoadSectionParams& p, const Curve& u_fw, const Curve& u_bw, double dt) {
    detail::check_causal(u_fw, u_bw);
    SectionGrid g = section_grid(p, dt);
    const std::size_t H = std::min(u_fw.horizon(), u_bw.horizon());
    std::vector<double> q(H + 1, 0.0), in_fw(H + 1, 0.0);
    auto ybw = [&](long long t) {
        return t <= 0 ? 0.0 : detail::clamp_at(q, t - static_cast<long long>(g.dw)) + g.n_free;
    };
    for (std::size_t t = 1; t <= H; ++t) {
        const auto tt = static_cast<long long>(t);
        double ub = std::min(u_bw[t], ybw(tt));
        q[t] = detail::section_q(g, q, in_fw, ub, tt);
        in_fw[t] = std::min(u_fw[t], q[t]);
    }
    return detail::outputs(g, q, dt);
}

// ---------------------------------------------------------------- itinerary

struct ItinerarySection {
    RoadSectionParams road;
    std::optional<TrafficLightParams> light;
};

struct ItineraryResult {
    CurveMatrix beta;
    ArrivalMatrix alpha;
    MimoDelay delay;   ///< steps
    double d_fw = 0;   ///< s
    bool augmented = false;
};

inline CurveMatrix itinerary_service(const std::vector<ItinerarySection>& secs, std::size_t H, double dt) {
    if (secs.empty()) throw ConfigError("itinerary: no sections");
    auto service = [&](const ItinerarySection& s) {
        return s.light ? controlled_section_service(s.road, *s.light, H, dt) : section_service_matrix(s.road, H, dt);
    };
    CurveMatrix beta = service(secs.front());
    for (std::size_t i = 1; i < secs.size(); ++i) beta = concatenate(beta, service(secs[i]));
    return beta;
}

/// Forward delay bound. With augment, the initial vehicles and free spaces are
/// added to the forward and backward arrivals.
inline ItineraryResult itinerary_delay(const std::vector<ItinerarySection>& secs, const Curve& u_fw,
                                       const Curve& u_bw, bool augment) {
    const double dt = u_fw.dt();
    const std::size_t H = std::min(u_fw.horizon(), u_bw.horizon());
    ItineraryResult res;
    res.augmented = augment;
    res.beta = itinerary_service(secs, H, dt);
    double n = 0.0, nf = 0.0;
    if (augment)
        for (auto& s : secs) {
            n += s.road.n;
            nf += s.road.n_free();
        }
    auto shifted = [&](const Curve& u, double c) {
        std::vector<double> v = u.truncated(H).samples();
        for (double& x : v) x += c;
        return Curve(v, u.tail_rate(), dt);
    };
    res.alpha = arrival_matrix({shifted(u_fw, n), shifted(u_bw, nf)});
    res.delay = mimo_delay_bound(res.alpha.alpha, res.alpha.T, res.beta);
    res.d_fw = res.delay.d[0] * dt;
    return res;
}

/// Piecewise-linear cumulative flow through (time s, vehicles) breakpoints, constant rate after the last.
inline Curve piecewise_flow(const std::vector<std::pair<double, double>>& pts, double tail_rate, std::size_t H,
                            double dt) {
    std::vector<double> v(H + 1, 0.0);
    for (std::size_t t = 0; t <= H; ++t) {
        double s = static_cast<double>(t) * dt;
        double y;
        if (pts.empty()) {
            y = tail_rate * s;
        } else if (s <= pts.front().first) {
            y = pts.front().first > 0 ? pts.front().second * s / pts.front().first : pts.front().second;
        } else if (s >= pts.back().first) {
            y = pts.back().second + tail_rate * (s - pts.back().first);
        } else {
            std::size_t k = 1;
            while (pts[k].first < s) ++k;
            auto [t0, y0] = pts[k - 1];
            auto [t1, y1] = pts[k];
            y = y0 + (y1 - y0) * (s - t0) / (t1 - t0);
        }
        v[t] = y;
    }
    return Curve(v, tail_rate * dt, dt);
}

}  // namespace tropnet::road
