#pragma once

/**
 * @file metro_line.hpp
 * @brief Max-plus analytics of a circular metro line: train-dynamics
 * polynomial matrix, closed-form headway, phase diagram, junction phases and
 * demand-dependent dwell/run laws.
 *
 * Segment j runs from node j-1 to node j (indices mod n). Departures obey
 *   d_j^k = max( t_j + d_{j-1}^{k-b_j},  s_{j+1} + d_{j+1}^{k-1+b_{j+1}} ).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "tropnet/common.hpp"
#include "tropnet/maxplus.hpp"

namespace tropnet::metro {

struct Segment {
    double run = 0.0;    ///< r_j, s
    double dwell = 0.0;  ///< minimum dwell at node j, s (0 off-platform)
    double sep = 0.0;    ///< minimum safe separation s_j, s
    double length = 0.0; ///< m
    bool platform = false;
    int train = 0;  ///< b_j
};

struct LineConfig {
    std::vector<Segment> seg;

    std::size_t n() const { return seg.size(); }
    std::size_t m() const {
        std::size_t c = 0;
        for (auto& s : seg) c += s.train ? 1 : 0;
        return c;
    }
    double travel(std::size_t j) const { return seg[j].run + seg[j].dwell; }
    double length() const {
        double L = 0.0;
        for (auto& s : seg) L += s.length;
        return L;
    }
    double sum_travel() const {
        double t = 0.0;
        for (std::size_t j = 0; j < n(); ++j) t += travel(j);
        return t;
    }
    double sum_sep() const {
        double s = 0.0;
        for (auto& x : seg) s += x.sep;
        return s;
    }
    double h_min() const {
        double h = 0.0;
        for (std::size_t j = 0; j < n(); ++j) h = std::max(h, travel(j) + seg[j].sep);
        return h;
    }
};

/// Places m trains as evenly as possible: b_j = 1 at j = floor(i n / m).
inline LineConfig with_trains(LineConfig cfg, std::size_t m) {
    const std::size_t n = cfg.n();
    if (m > n) throw RangeError("with_trains: more trains than segments");
    for (auto& s : cfg.seg) s.train = 0;
    for (std::size_t i = 0; i < m; ++i) cfg.seg[(i * n) / m].train = 1;
    return cfg;
}

// ---------------------------------------------------------------- physical line

struct PhysicalLine {
    std::vector<double> inter_station_m;
    double segment_m = 200.0;
    double cruise_speed = 22.0;
    double acceleration = 1.3;
    double deceleration = 0.85;
    double terminus_m = 205.0;
    double terminus_speed = 11.0;
    double min_dwell = 20.0;
    double min_sep = 30.0;
    bool symmetric_return = true;
};

/// Per-segment run times over one inter-station of length D under a
/// trapezoidal (or triangular) speed profile, split into round(D/seg) parts.
inline std::vector<double> kinematic_run_times(double D, double seg_len, double v, double acc, double dec) {
    const int k = std::max(1, static_cast<int>(std::lround(D / seg_len)));
    const double l = D / k;
    double xa = v * v / (2 * acc), xd = v * v / (2 * dec), vm = v;
    if (xa + xd > D) {
        vm = std::sqrt(2 * D / (1 / acc + 1 / dec));
        xa = vm * vm / (2 * acc);
        xd = vm * vm / (2 * dec);
    }
    const double ta = vm / acc, tc = (D - xa - xd) / vm, td = vm / dec;
    auto T = [&](double x) {
        if (x <= xa) return std::sqrt(2 * x / acc);
        if (x <= D - xd) return ta + (x - xa) / vm;
        return ta + tc + td - std::sqrt(std::max(0.0, 2 * (D - x) / dec));
    };
    std::vector<double> out;
    for (int i = 0; i < k; ++i) out.push_back(T((i + 1) * l) - T(i * l));
    return out;
}

/// Loop: forward inter-stations, terminus, return direction, terminus.
/// The last segment of each inter-station and each terminus segment end at a platform.
inline LineConfig build_line_config(const PhysicalLine& p) {
    LineConfig cfg;
    auto add_interstation = [&](double D) {
        auto runs = kinematic_run_times(D, p.segment_m, p.cruise_speed, p.acceleration, p.deceleration);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            bool plat = i + 1 == runs.size();
            cfg.seg.push_back({runs[i], plat ? p.min_dwell : 0.0, p.min_sep, D / runs.size(), plat, 0});
        }
    };
    auto add_terminus = [&] {
        cfg.seg.push_back({p.terminus_m / p.terminus_speed, p.min_dwell, p.min_sep, p.terminus_m, true, 0});
    };
    for (double D : p.inter_station_m) add_interstation(D);
    add_terminus();
    if (p.symmetric_return) {
        for (auto it = p.inter_station_m.rbegin(); it != p.inter_station_m.rend(); ++it) add_interstation(*it);
        add_terminus();
    }
    return cfg;
}

// ---------------------------------------------------------------- dynamics

inline maxplus::PolyMatrix build_line_polymatrix_weights(const LineConfig& cfg, const std::vector<double>& fwd) {
    const std::size_t n = cfg.n();
    const std::size_t m = cfg.m();
    if (m == 0 || m == n) throw StructureError("degenerate line: m must satisfy 0 < m < n");
    maxplus::PolyMatrix a(n, n);
    a.coeff_ref(1);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t prev = (j + n - 1) % n, next = (j + 1) % n;
        std::size_t lf = cfg.seg[j].train ? 1 : 0;
        std::size_t lb = cfg.seg[next].train ? 0 : 1;
        double& f = a.coeff_ref(lf)(j, prev);
        f = maxplus::oplus(f, fwd[j]);
        double& b = a.coeff_ref(lb)(j, next);
        b = maxplus::oplus(b, cfg.seg[next].sep);
    }
    return a;
}

inline maxplus::PolyMatrix build_line_polymatrix(const LineConfig& cfg) {
    std::vector<double> t(cfg.n());
    for (std::size_t j = 0; j < cfg.n(); ++j) t[j] = cfg.travel(j);
    return build_line_polymatrix_weights(cfg, t);
}

/// h = max{ sum t / m, max_j (t_j + s_j), sum s / (n - m) }.
inline double headway_closed_form(const LineConfig& cfg, std::size_t m) {
    const std::size_t n = cfg.n();
    if (m == 0 || m >= n) return inf;
    return std::max({cfg.sum_travel() / static_cast<double>(m), cfg.h_min(),
                     cfg.sum_sep() / static_cast<double>(n - m)});
}

enum class Phase { free_flow, max_frequency, congestion };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::free_flow: return "free-flow";
        case Phase::max_frequency: return "max-frequency";
        case Phase::congestion: return "congestion";
    }
    return "?";
}

struct PhasePoint {
    std::size_t m;
    double rho;  ///< trains / m
    double h;    ///< s
    double f;    ///< trains / s
    double w;    ///< s
    double g;    ///< s
    Phase phase;
};

struct DiagramParams {
    double L, tau, omega, rho_bar, h_min, f_max, v, w_prime, w_avg, r_avg, g_avg;
};

inline DiagramParams diagram_params(const LineConfig& cfg) {
    DiagramParams p{};
    const double n = static_cast<double>(cfg.n());
    p.L = cfg.length();
    p.tau = cfg.sum_travel() / p.L;
    p.omega = cfg.sum_sep() / p.L;
    p.rho_bar = n / p.L;
    p.h_min = cfg.h_min();
    p.f_max = 1.0 / p.h_min;
    p.v = 1.0 / p.tau;
    p.w_prime = 1.0 / p.omega;
    double w = 0, r = 0, g = 0;
    for (auto& s : cfg.seg) { w += s.dwell; r += s.run; g += s.run + s.sep; }
    p.w_avg = w / n;
    p.r_avg = r / n;
    p.g_avg = g / n;
    return p;
}

inline PhasePoint phase_point(const LineConfig& cfg, const DiagramParams& p, std::size_t m) {
    PhasePoint pt{};
    pt.m = m;
    pt.rho = static_cast<double>(m) / p.L;
    const double rho = pt.rho;
    const double cong = rho < p.rho_bar ? p.omega / (p.rho_bar - rho) : inf;
    const double free = rho > 0 ? p.tau / rho : inf;
    pt.h = std::max({free, p.h_min, cong});
    pt.f = std::min({p.v * rho, p.f_max, p.w_prime * (p.rho_bar - rho)});
    pt.f = std::max(0.0, pt.f);
    pt.w = std::max({p.w_avg, p.h_min / p.rho_bar * rho - p.r_avg, cong - p.g_avg});
    pt.g = std::max({free - p.w_avg, p.r_avg + p.h_min - p.h_min / p.rho_bar * rho, p.g_avg});
    if (rho <= p.f_max / p.v) pt.phase = Phase::free_flow;
    else if (rho <= p.rho_bar - p.f_max / p.w_prime) pt.phase = Phase::max_frequency;
    else pt.phase = Phase::congestion;
    (void)cfg;
    return pt;
}

inline std::vector<PhasePoint> phase_diagram(const LineConfig& cfg, std::size_t m_lo, std::size_t m_hi) {
    DiagramParams p = diagram_params(cfg);
    std::vector<PhasePoint> out;
    for (std::size_t m = std::max<std::size_t>(m_lo, 1); m <= std::min(m_hi, cfg.n() - 1); ++m)
        out.push_back(phase_point(cfg, p, m));
    return out;
}

/// Smallest m whose headway reaches h_min.
inline std::size_t optimal_trains(const LineConfig& cfg) {
    for (std::size_t m = 1; m < cfg.n(); ++m)
        if (headway_closed_form(cfg, m) <= cfg.h_min() * (1 + 1e-12)) return m;
    return 0;
}

// ---------------------------------------------------------------- junction

struct JunctionPart {
    std::size_t n = 0;  ///< segments
    std::size_t m = 0;  ///< trains
    double T = 0.0;     ///< sum of minimum travel times
    double S = 0.0;     ///< sum of minimum separations
    double max_ts = 0.0;
};

struct JunctionConfig {
    std::array<JunctionPart, 3> part;  ///< 0 central, 1 and 2 branches
};

enum class JunctionTerm { fw1, fw2, min, bw1, bw2, br1, br2, zero };

inline const char* junction_term_name(JunctionTerm t) {
    static const char* names[] = {"fw1", "fw2", "min", "bw1", "bw2", "br1", "br2", "zero"};
    return names[static_cast<int>(t)];
}

struct JunctionResult {
    double h0, h1, h2, f0;
    double h_fw, h_min, h_bw, h_br;
    JunctionTerm binding;
};

inline JunctionResult junction_headway(const JunctionConfig& c) {
    const auto& p = c.part;
    const double m = static_cast<double>(p[0].m + p[1].m + p[2].m);
    const double dm = static_cast<double>(p[2].m) - static_cast<double>(p[1].m);
    const double mb = static_cast<double>(p[0].n + p[1].n + p[2].n) - m;
    const double dmb = (static_cast<double>(p[2].n) - static_cast<double>(p[2].m)) -
                       (static_cast<double>(p[1].n) - static_cast<double>(p[1].m));
    auto q = [](double num, double den) { return den > 0 ? num / den : inf; };
    std::array<double, 7> term = {
        q(p[0].T + p[1].T, m - dm),
        q(p[0].T + p[2].T, m + dm),
        std::max({p[0].max_ts, p[1].max_ts / 2, p[2].max_ts / 2}),
        q(p[0].S + p[1].S, mb - dmb),
        q(p[0].S + p[2].S, mb + dmb),
        q(p[1].T + p[2].S, 2 * (static_cast<double>(p[2].n) - dm)),
        q(p[1].S + p[2].T, 2 * (static_cast<double>(p[1].n) + dm)),
    };
    JunctionResult r{};
    r.h_fw = std::max(term[0], term[1]);
    r.h_min = term[2];
    r.h_bw = std::max(term[3], term[4]);
    r.h_br = std::max(term[5], term[6]);
    r.h0 = std::max({r.h_fw, r.h_min, r.h_bw, r.h_br});
    r.h1 = r.h2 = 2 * r.h0;
    r.f0 = std::max(0.0, std::min({1 / r.h_fw, 1 / r.h_min, 1 / r.h_bw, 1 / r.h_br}));
    if (std::isinf(r.h0)) {
        r.binding = JunctionTerm::zero;
    } else {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < term.size(); ++k)
            if (term[k] > term[arg]) arg = k;
        r.binding = static_cast<JunctionTerm>(arg);
    }
    return r;
}

// ---------------------------------------------------------------- demand

struct PlatformDemand {
    double lambda_in = 0.0, lambda_out = 0.0;  ///< passengers / s
    double alpha_in = 1.0, alpha_out = 1.0;    ///< passengers / s
    double run_nominal = 0.0;                  ///< r~_j
    double run_min = 0.0;                      ///< r_j lower bound
    double g_max = 0.0;                        ///< upper bound on g_j

    double x() const { return lambda_out / alpha_out + lambda_in / alpha_in; }
    double X() const { return x() / (1 - x()); }
};

/// One entry per segment; non-platform entries carry only run times.
struct DemandConfig {
    std::vector<PlatformDemand> node;
};

struct DemandHeadway {
    double h;
    double f;
    bool conditions_ok;
    std::vector<double> h_bar;  ///< initial-headway bound per node
};

inline std::vector<double> demand_forward_weights(const LineConfig& cfg, const DemandConfig& d) {
    if (d.node.size() != cfg.n()) throw ShapeError("demand: one entry per segment required");
    std::vector<double> w(cfg.n());
    for (std::size_t j = 0; j < cfg.n(); ++j) {
        const auto& p = d.node[j];
        double X = 0.0;
        if (cfg.seg[j].platform) {
            if (p.x() >= 1) throw RangeError("demand saturates door capacity (x >= 1)");
            X = p.X();
        }
        w[j] = (cfg.seg[j].run + cfg.seg[j].sep) * X + p.run_nominal;
    }
    return w;
}

inline maxplus::PolyMatrix build_demand_polymatrix(const LineConfig& cfg, const DemandConfig& d) {
    return build_line_polymatrix_weights(cfg, demand_forward_weights(cfg, d));
}

inline DemandHeadway demand_dependent_headway(const LineConfig& cfg, const DemandConfig& d, std::size_t m) {
    const std::size_t n = cfg.n();
    if (m == 0 || m >= n) throw StructureError("degenerate line: m must satisfy 0 < m < n");
    std::vector<double> w = demand_forward_weights(cfg, d);
    double sum = 0.0, mx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sum += w[j];
        mx = std::max(mx, w[j] + cfg.seg[j].sep);
    }
    DemandHeadway r{};
    r.h = std::max({sum / static_cast<double>(m), mx, cfg.sum_sep() / static_cast<double>(n - m)});
    r.f = std::max(0.0, 1.0 / r.h);
    r.conditions_ok = true;
    r.h_bar.assign(n, inf);
    for (std::size_t j = 0; j < n; ++j) {
        if (!cfg.seg[j].platform) continue;
        const auto& p = d.node[j];
        double g_min = cfg.seg[j].run + cfg.seg[j].sep;
        double dg = p.g_max - g_min;
        double dr = p.run_nominal - p.run_min;
        if (dr < p.X() * dg - 1e-12) r.conditions_ok = false;
        r.h_bar[j] = p.g_max / (1 - p.x());
    }
    return r;
}

struct DwellRunParams {
    double w_max;    ///< w-bar
    double run_min;  ///< r lower bound
    double run_nom;  ///< r~
    double h_low;    ///< h lower bound
};

struct DwellRun {
    double w, r, t;
};

inline DwellRun dwell_run_laws(double h, double x, const DwellRunParams& p) {
    DwellRun o{};
    o.w = std::min(x * h, p.w_max);
    o.r = std::max(p.run_min, p.run_nom - x * (h - p.h_low));
    o.t = o.r + o.w;
    return o;
}

}  // namespace tropnet::metro
