#pragma once

/**
 * @file carfollow.hpp
 * @brief Piecewise-linear min-max car-following with multi-anticipation, as a
 * min-max dynamic-programming system on a ring or an open road.
 *
 * Units: one step (0.5 s by default) and one metre. Car 1 is the front car;
 * the j-th leader of car n is car n - j.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tropnet/common.hpp"
#include "tropnet/dp.hpp"

namespace tropnet::carfollow {

/// One affine piece alpha y + beta per (u, w); beta = -inf marks an absent piece.
struct Piece {
    double alpha = 0.0;
    double beta = 0.0;
};

struct BehaviorLaw {
    std::vector<std::vector<Piece>> piece;  ///< [u][w]

    std::size_t n_u() const { return piece.size(); }
    std::size_t n_w() const {
        std::size_t k = 0;
        for (auto& r : piece) k = std::max(k, r.size());
        return k;
    }
    const Piece& at(std::size_t u, std::size_t w) const {
        static const Piece absent{0.0, -inf};
        return w < piece[u].size() ? piece[u][w] : absent;
    }
    bool stable() const {
        for (auto& r : piece)
            for (auto& p : r)
                if (p.alpha < 0 || p.alpha > 1) return false;
        return true;
    }
};

/// min(max(a (y - y0), 0), v_max).
inline BehaviorLaw saturating_law(double a, double y0, double v_max) {
    return {{{{a, -a * y0}, {0.0, 0.0}}, {{0.0, v_max}}}};
}

inline double speed_law(double y, const BehaviorLaw& law) {
    double best = inf;
    for (std::size_t u = 0; u < law.n_u(); ++u) {
        double inner = -inf;
        for (auto& p : law.piece[u]) inner = std::max(inner, p.alpha * y + p.beta);
        best = std::min(best, inner);
    }
    return best;
}

struct AnticipationConfig {
    std::size_t m = 1;    ///< leaders taken into account
    double lambda = 0.0;  ///< per-leader factor (1 + lambda)^(j-1)

    double factor(std::size_t j) const { return std::pow(1.0 + lambda, static_cast<double>(j - 1)); }
};

enum class RoadKind { ring, open };

struct Scenario {
    RoadKind kind = RoadKind::ring;
    std::size_t cars = 2;
    double gap = 0.0;       ///< ring: mean gap y-bar (m)
    double leader_v = 0.0;  ///< open: leader speed (m/step), overwritten per step by simulate
};

/// Actions are z = (j, u) with index (j - 1) * |U| + u, inner index w.
inline dp::DPDynamics build_dynamics(const Scenario& s, const AnticipationConfig& a, const BehaviorLaw& law) {
    if (s.cars < 2) throw ConfigError("car-following: at least two cars required");
    if (a.m < 1) throw ConfigError("car-following: m >= 1 required");
    const std::size_t nu = s.cars, U = law.n_u(), W = law.n_w();
    dp::DPDynamics d = dp::DPDynamics::make(nu, a.m * U, dp::Sense::minmax, W);
    for (std::size_t j = 1; j <= a.m; ++j) {
        const double f = a.factor(j);
        for (std::size_t u = 0; u < U; ++u)
            for (std::size_t w = 0; w < W; ++w) {
                const Piece& p = law.at(u, w);
                const double c = p.alpha * f / static_cast<double>(j);
                const double beta = std::isinf(p.beta) ? p.beta : f * p.beta;
                if (!std::isinf(p.beta) && (c < 0 || c > 1)) throw RangeError("car-following: alpha_j / j outside [0, 1]");
                dp::Action& act = d.action((j - 1) * U + u, w);
                for (std::size_t n = 0; n < nu; ++n) {
                    if (s.kind == RoadKind::open && n == 0) {
                        act.M[n] = {{0, 1.0}};
                        act.c[n] = std::isinf(p.beta) ? p.beta : s.leader_v;
                        continue;
                    }
                    if (s.kind == RoadKind::open && n < j) {
                        act.M[n] = {{n, 1.0}};
                        act.c[n] = std::isinf(p.beta) ? p.beta : inf;
                        continue;
                    }
                    const std::size_t lead = (n + nu - j % nu) % nu;
                    act.M[n] = {{n, 1.0 - c}, {lead, c}};
                    act.c[n] = beta;
                    if (s.kind == RoadKind::ring && n < j && !std::isinf(beta))
                        act.c[n] += c * static_cast<double>(nu) * s.gap *
                                    static_cast<double>((j - n + nu - 1) / nu);
                }
            }
    }
    return d;
}

/// Single-leader model written directly in matrix form.
inline dp::DPDynamics build_plain_dynamics(const Scenario& s, const BehaviorLaw& law) {
    const std::size_t nu = s.cars, U = law.n_u(), W = law.n_w();
    dp::DPDynamics d = dp::DPDynamics::make(nu, U, dp::Sense::minmax, W);
    for (std::size_t u = 0; u < U; ++u)
        for (std::size_t w = 0; w < W; ++w) {
            const Piece& p = law.at(u, w);
            dp::Action& act = d.action(u, w);
            for (std::size_t n = 0; n < nu; ++n) {
                if (s.kind == RoadKind::open && n == 0) {
                    act.M[0] = {{0, 1.0}};
                    act.c[0] = std::isinf(p.beta) ? p.beta : s.leader_v;
                    continue;
                }
                act.M[n] = {{n, 1.0 - p.alpha}, {(n + nu - 1) % nu, p.alpha}};
                act.c[n] = p.beta;
                if (s.kind == RoadKind::ring && n == 0 && !std::isinf(p.beta))
                    act.c[n] += p.alpha * static_cast<double>(nu) * s.gap;
            }
        }
    return d;
}

/// Uniform positions ((nu - 1) y, ..., y, 0).
inline std::vector<double> uniform_positions(std::size_t cars, double y) {
    std::vector<double> x(cars);
    for (std::size_t n = 0; n < cars; ++n) x[n] = static_cast<double>(cars - 1 - n) * y;
    return x;
}

struct Stationary {
    double v;
    std::vector<double> x;
    double residual;
};

/// Speed min_u max_w (alpha_1uw y + beta_1uw) with uniform spacing; residual of one step.
inline Stationary stationary_ring(const Scenario& s, const AnticipationConfig& a, const BehaviorLaw& law) {
    Stationary st{speed_law(s.gap, law), uniform_positions(s.cars, s.gap), 0.0};
    dp::DPDynamics d = build_dynamics(s, a, law);
    std::vector<double> next;
    dp::step(d, dp::triangular_order(d), st.x, next);
    for (std::size_t n = 0; n < s.cars; ++n) st.residual = std::max(st.residual, std::abs(next[n] - st.x[n] - st.v));
    return st;
}

/// Gap realizing leader speed v1: max_u min_w (v1 - beta) / alpha.
inline double stationary_open(double v1, const BehaviorLaw& law) {
    double best = -inf;
    for (std::size_t u = 0; u < law.n_u(); ++u) {
        double inner = inf;
        for (auto& p : law.piece[u]) {
            if (std::isinf(p.beta)) continue;
            double y;
            if (p.alpha > 0) y = (v1 - p.beta) / p.alpha;
            else y = v1 > p.beta ? inf : -inf;
            inner = std::min(inner, y);
        }
        best = std::max(best, inner);
    }
    if (std::isinf(best)) throw RangeError("stationary_open: leader speed not reachable by the law");
    return best;
}

/// Residual of one open-road step from uniform spacing y at leader speed v1,
/// and whether the nearest-leader terms attain the min for every follower.
inline std::pair<double, bool> open_residual(std::size_t cars, double y, double v1, const AnticipationConfig& a,
                                             const BehaviorLaw& law) {
    Scenario s{RoadKind::open, cars, 0.0, v1};
    dp::DPDynamics d = build_dynamics(s, a, law);
    std::vector<double> x = uniform_positions(cars, y), next;
    dp::step(d, dp::triangular_order(d), x, next);
    double res = 0.0;
    bool nearest = true;
    for (std::size_t n = 0; n < cars; ++n) {
        res = std::max(res, std::abs(next[n] - x[n] - v1));
        if (n == 0) continue;
        double first = inf;
        for (std::size_t u = 0; u < law.n_u(); ++u) {
            double inner = -inf;
            for (std::size_t w = 0; w < d.n_w; ++w) {
                const dp::Action& act = d.action(u, w);
                if (std::isinf(act.c[n])) {
                    inner = std::max(inner, act.c[n]);
                    continue;
                }
                double v = act.c[n];
                for (auto [col, coef] : act.M[n]) v += coef * x[col];
                inner = std::max(inner, v);
            }
            first = std::min(first, inner);
        }
        if (std::abs(first - next[n]) > 1e-9 * std::max(1.0, std::abs(first))) nearest = false;
    }
    return {res, nearest};
}

/// Open-road run with a time-varying leader speed.
inline std::vector<std::vector<double>> simulate_open(std::size_t cars, const std::vector<double>& x0,
                                                      const std::function<double(std::size_t)>& leader_v,
                                                      std::size_t steps, const AnticipationConfig& a,
                                                      const BehaviorLaw& law) {
    Scenario s{RoadKind::open, cars, 0.0, 0.0};
    dp::DPDynamics d = build_dynamics(s, a, law);
    std::vector<std::size_t> order = dp::triangular_order(d);
    std::vector<std::vector<double>> traj{x0};
    for (std::size_t t = 0; t < steps; ++t) {
        const double v = leader_v(t);
        for (auto& act : d.actions)
            if (!std::isinf(act.c[0])) act.c[0] = v;
        std::vector<double> next;
        dp::step(d, order, traj.back(), next);
        traj.push_back(std::move(next));
    }
    return traj;
}

inline std::vector<std::vector<double>> simulate_ring(const Scenario& s, const std::vector<double>& x0,
                                                      std::size_t steps, const AnticipationConfig& a,
                                                      const BehaviorLaw& law) {
    dp::DPDynamics d = build_dynamics(s, a, law);
    return dp::iterate(d, x0, steps).x;
}

struct TransientMetrics {
    double speed_variance = 0.0;
    double accel_variance = 0.0;
};

inline double variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

/// Cross-car variances of speed and acceleration per step, averaged over the run.
inline TransientMetrics transient_metrics(const std::vector<std::vector<double>>& traj) {
    TransientMetrics out;
    if (traj.size() < 3) return out;
    const std::size_t T = traj.size() - 1, nu = traj[0].size();
    std::vector<double> sp(nu), prev(nu);
    double sv = 0.0, av = 0.0;
    std::size_t ns = 0, na = 0;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < nu; ++n) sp[n] = traj[t + 1][n] - traj[t][n];
        sv += variance(sp);
        ++ns;
        if (t > 0) {
            std::vector<double> acc(nu);
            for (std::size_t n = 0; n < nu; ++n) acc[n] = sp[n] - prev[n];
            av += variance(acc);
            ++na;
        }
        prev = sp;
    }
    out.speed_variance = sv / static_cast<double>(ns);
    out.accel_variance = na ? av / static_cast<double>(na) : 0.0;
    return out;
}

struct Benchmark {
    std::size_t cars = 100;
    std::size_t steps = 1000;      ///< 500 s at 0.5 s per step
    double cruise = 7.5;           ///< m/step
    double slow = 2.5;             ///< m/step
    std::vector<std::pair<std::size_t, std::size_t>> slowdowns{{200, 300}, {600, 680}};
    BehaviorLaw law = saturating_law(0.5, 7.0, 7.5);

    double leader_speed(std::size_t t) const {
        for (auto [a, b] : slowdowns)
            if (t >= a && t < b) return slow;
        return cruise;
    }
};

inline std::vector<std::vector<double>> run_benchmark(const Benchmark& b, const AnticipationConfig& a) {
    const double y = stationary_open(b.cruise, b.law);
    return simulate_open(b.cars, uniform_positions(b.cars, y), [&](std::size_t t) { return b.leader_speed(t); },
                         b.steps, a, b.law);
}

}  // namespace tropnet::carfollow
