#pragma once

/**
 * @file metro_dp.hpp
 * @brief Demand-coupled train dynamics as dynamic-programming systems:
 * the uncontrolled model (dwell proportional to accumulated demand) and the
 * stabilized model with dwell cap and mixing coefficient.
 *
 * Each node j takes the max of three actions:
 *   0: d_{j-1}^{k-b_j} + r_j + w_j
 *   1: demand-dependent dwell term (duplicate of action 0 off-platform)
 *   2: d_{j+1}^{k-1+b_{j+1}} + s_{j+1}
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tropnet/common.hpp"
#include "tropnet/dp.hpp"
#include "tropnet/metro_line.hpp"

namespace tropnet::metro {

struct DemandProfile {
    std::vector<double> lambda;  ///< passengers / s per node
    std::vector<double> alpha;   ///< passengers / s per node
    double kappa = 500.0;        ///< passengers / train

    static DemandProfile uniform(const LineConfig& cfg, double lambda, double alpha, double kappa) {
        DemandProfile d;
        d.kappa = kappa;
        for (auto& s : cfg.seg) {
            d.lambda.push_back(s.platform ? lambda : 0.0);
            d.alpha.push_back(alpha);
        }
        return d;
    }
};

struct ControlParams {
    std::vector<double> w_max;  ///< w-bar per node
    std::vector<double> delta;  ///< mixing coefficient per node
    std::vector<double> theta;  ///< equivalent form of delta
    double h_tilde = 0.0;
};

namespace detail {

inline void check_line(const LineConfig& cfg) {
    if (cfg.m() == 0 || cfg.m() == cfg.n()) throw StructureError("degenerate line: m must satisfy 0 < m < n");
}

inline void add(dp::Action& a, std::size_t row, std::size_t col, double coef, bool implicit) {
    (implicit ? a.N[row] : a.M[row]).emplace_back(col, coef);
}

template <class Middle>
dp::DPDynamics build_line_dp(const LineConfig& cfg, Middle middle) {
    check_line(cfg);
    const std::size_t n = cfg.n();
    dp::DPDynamics d = dp::DPDynamics::make(n, 3, dp::Sense::max);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t prev = (j + n - 1) % n, next = (j + 1) % n;
        const bool fwd_implicit = cfg.seg[j].train == 0;
        const bool bwd_implicit = cfg.seg[next].train == 1;
        add(d.action(0), j, prev, 1.0, fwd_implicit);
        d.action(0).c[j] = cfg.travel(j);
        if (cfg.seg[j].platform) {
            middle(d.action(1), j, prev, fwd_implicit);
        } else {
            add(d.action(1), j, prev, 1.0, fwd_implicit);
            d.action(1).c[j] = cfg.travel(j);
        }
        add(d.action(2), j, next, 1.0, bwd_implicit);
        d.action(2).c[j] = cfg.seg[next].sep;
    }
    return d;
}

}  // namespace detail

/// Dwell grows with the time since the previous departure: coefficients (1 + x) and -x.
inline dp::DPDynamics build_uncontrolled(const LineConfig& cfg, const DemandProfile& dem) {
    if (dem.lambda.size() != cfg.n() || dem.alpha.size() != cfg.n()) throw ShapeError("demand profile size");
    return detail::build_line_dp(cfg, [&](dp::Action& a, std::size_t j, std::size_t prev, bool implicit) {
        const double x = dem.lambda[j] / dem.alpha[j];
        if (x >= 1) throw RangeError("demand exceeds upload rate");
        detail::add(a, j, prev, 1.0 + x, implicit);
        detail::add(a, j, j, -x, false);
        a.c[j] = (1.0 + x) * cfg.seg[j].run;
    });
}

/// Stabilized dwell: coefficients (1 - delta) and delta, constant (1 - delta) r + w-bar.
inline dp::DPDynamics build_controlled(const LineConfig& cfg, const ControlParams& p) {
    if (p.delta.size() != cfg.n() || p.w_max.size() != cfg.n()) throw ShapeError("control params size");
    for (double dl : p.delta)
        if (!(dl >= 0.0 && dl <= 1.0)) throw RangeError("delta outside [0, 1]");
    return detail::build_line_dp(cfg, [&](dp::Action& a, std::size_t j, std::size_t prev, bool implicit) {
        const double dl = p.delta[j];
        detail::add(a, j, prev, 1.0 - dl, implicit);
        detail::add(a, j, j, dl, false);
        a.c[j] = (1.0 - dl) * cfg.seg[j].run + p.w_max[j];
    });
}

inline ControlParams fix_params(const LineConfig& cfg, const DemandProfile& dem, std::size_t m) {
    ControlParams p;
    p.h_tilde = headway_closed_form(cfg, m);
    for (std::size_t j = 0; j < cfg.n(); ++j) {
        const double lt = std::min(dem.alpha[j], dem.kappa / p.h_tilde);
        const double lam = cfg.seg[j].platform ? dem.lambda[j] : 0.0;
        const double dl = lt / std::max(lam, lt);
        p.w_max.push_back(p.h_tilde);
        p.delta.push_back(dl);
        p.theta.push_back(dem.alpha[j] > lam ? dl * lam / (dem.alpha[j] - lam) : inf);
    }
    return p;
}

/// d^0 = 0 with an optional extra delay on one node.
inline std::vector<double> initial_departures(const LineConfig& cfg, std::size_t node = 0, double perturbation = 0.0) {
    std::vector<double> x(cfg.n(), 0.0);
    if (node < x.size()) x[node] += perturbation;
    return x;
}

struct HeadwayEstimate {
    double h = 0.0, w = 0.0, g = 0.0;
    double spread = 0.0;
    bool converged = true;
};

inline HeadwayEstimate simulate_headway(const LineConfig& cfg, const dp::DPDynamics& dyn, std::size_t K,
                                        const std::vector<double>& x0, double spread_tol = 0.5) {
    dp::Trajectory t = dp::iterate(dyn, x0, K);
    dp::Growth gr = dp::growth_rate(t);
    HeadwayEstimate e;
    e.h = gr.mu;
    e.spread = gr.spread;
    e.converged = gr.spread <= spread_tol;
    double r = 0.0;
    for (auto& s : cfg.seg) r += s.run;
    r /= static_cast<double>(cfg.n());
    const double frac = static_cast<double>(cfg.m()) / static_cast<double>(cfg.n());
    e.w = frac * e.h - r;
    e.g = r + (1.0 - frac) * e.h;
    return e;
}

struct SurfacePoint {
    std::size_t m;
    double lambda;
    double h, f, w, g;
    double h_tilde;
    bool converged;
};

/// Stabilized system on every (m, lambda) grid point.
inline std::vector<SurfacePoint> demand_phase_surface(const LineConfig& base, const std::vector<double>& lambdas,
                                                      double alpha, double kappa, std::size_t m_lo, std::size_t m_hi,
                                                      std::size_t K) {
    std::vector<SurfacePoint> out;
    for (std::size_t m = std::max<std::size_t>(m_lo, 1); m <= std::min(m_hi, base.n() - 1); ++m) {
        LineConfig cfg = with_trains(base, m);
        for (double lam : lambdas) {
            DemandProfile dem = DemandProfile::uniform(cfg, lam, alpha, kappa);
            ControlParams p = fix_params(cfg, dem, m);
            HeadwayEstimate e = simulate_headway(cfg, build_controlled(cfg, p), K, initial_departures(cfg));
            out.push_back({m, lam, e.h, 1.0 / e.h, e.w, e.g, p.h_tilde, e.converged});
        }
    }
    return out;
}

}  // namespace tropnet::metro
