#pragma once

/**
 * @file curve.hpp
 * @brief Min-plus cumulative curves on a uniform time grid with an affine tail,
 * curve matrices, and the network-calculus bound calculators.
 *
 * A curve stores f(0..H) plus a tail rate r: f(t) = f(H) + r (t - H) for t > H.
 * All times are in grid steps; dt (seconds per step) only travels along for
 * unit checks and reporting.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tropnet/common.hpp"

namespace tropnet {

class Curve {
public:
    Curve() = default;
    Curve(std::vector<double> samples, double tail_rate, double dt = 1.0)
        : s_(std::move(samples)), tail_(tail_rate), dt_(dt) {
        if (s_.empty()) throw ShapeError("curve: at least one sample required");
    }

    std::size_t horizon() const { return s_.size() - 1; }
    double tail_rate() const { return tail_; }
    double dt() const { return dt_; }
    const std::vector<double>& samples() const { return s_; }
    double operator[](std::size_t t) const { return s_[t]; }

    /// Value at any t >= 0 using the affine tail beyond the horizon; 0 for t < 0.
    double at(long long t) const {
        if (t < 0) return 0.0;
        const auto H = static_cast<long long>(horizon());
        if (t <= H) return s_[static_cast<std::size_t>(t)];
        double last = s_.back();
        if (std::isinf(last) || std::isinf(tail_)) return inf;
        return last + tail_ * static_cast<double>(t - H);
    }

    bool divergent() const { return divergent_; }
    void set_divergent(bool d) { divergent_ = d; }

    bool is_nondecreasing(double tol = 1e-12) const {
        for (std::size_t t = 1; t < s_.size(); ++t)
            if (s_[t] < s_[t - 1] - tol) return false;
        return true;
    }

    Curve truncated(std::size_t H) const {
        std::vector<double> v(H + 1);
        for (std::size_t t = 0; t <= H; ++t) v[t] = at(static_cast<long long>(t));
        Curve c(std::move(v), tail_, dt_);
        c.divergent_ = divergent_;
        return c;
    }

    bool operator==(const Curve& o) const { return s_ == o.s_ && tail_ == o.tail_ && dt_ == o.dt_; }

private:
    std::vector<double> s_{0.0};
    double tail_ = 0.0;
    double dt_ = 1.0;
    bool divergent_ = false;
};

namespace curves {

/// g^p: p at t = 0, +inf afterwards.
inline Curve gain(double p, std::size_t H, double dt = 1.0) {
    std::vector<double> v(H + 1, inf);
    v[0] = p;
    return Curve(std::move(v), inf, dt);
}

/// d^T: 0 for t <= T, +inf afterwards.
inline Curve shift(std::size_t T, std::size_t H, double dt = 1.0) {
    std::vector<double> v(H + 1, inf);
    for (std::size_t t = 0; t <= std::min(T, H); ++t) v[t] = 0.0;
    return Curve(std::move(v), T >= H ? 0.0 : inf, dt);
}

/// g^p d^T.
inline Curve gain_shift(double p, std::size_t T, std::size_t H, double dt = 1.0) {
    std::vector<double> v(H + 1, inf);
    for (std::size_t t = 0; t <= std::min(T, H); ++t) v[t] = p;
    return Curve(std::move(v), T >= H ? 0.0 : inf, dt);
}

/// Neutral element of convolution.
inline Curve unit(std::size_t H, double dt = 1.0) { return gain(0.0, H, dt); }

/// Neutral element of min: +inf everywhere.
inline Curve top(std::size_t H, double dt = 1.0) { return Curve(std::vector<double>(H + 1, inf), inf, dt); }

inline Curve zero(std::size_t H, double dt = 1.0) { return Curve(std::vector<double>(H + 1, 0.0), 0.0, dt); }

/// Lambda(r, s)(t) = r t + s.
inline Curve affine(double r, double s, std::size_t H, double dt = 1.0) {
    std::vector<double> v(H + 1);
    for (std::size_t t = 0; t <= H; ++t) v[t] = r * static_cast<double>(t) + s;
    return Curve(std::move(v), r, dt);
}

/// lambda(R, T)(t) = R (t - T)^+, T in (possibly fractional) steps.
inline Curve rate_latency(double R, double T, std::size_t H, double dt = 1.0) {
    std::vector<double> v(H + 1);
    for (std::size_t t = 0; t <= H; ++t) v[t] = R * std::max(0.0, static_cast<double>(t) - T);
    return Curve(std::move(v), R, dt);
}

}  // namespace curves

namespace detail {

inline void check_dt(const Curve& f, const Curve& g) {
    if (std::abs(f.dt() - g.dt()) > 1e-12 * std::max(1.0, std::abs(f.dt())))
        throw UnitError("curves have different time steps");
}

/// +inf - +inf is taken as +inf.
inline double sub(double a, double b) {
    if (std::isinf(a) && a > 0) return inf;
    if (std::isinf(b) && b > 0) return -inf;
    return a - b;
}

}  // namespace detail

inline Curve curve_min(const Curve& f, const Curve& g) {
    detail::check_dt(f, g);
    std::size_t H = std::min(f.horizon(), g.horizon());
    std::vector<double> v(H + 1);
    for (std::size_t t = 0; t <= H; ++t) v[t] = std::min(f[t], g[t]);
    double tail = std::min(f.tail_rate(), g.tail_rate());
    // the tail must continue from the smaller endpoint
    if (f[H] < g[H]) tail = f.tail_rate();
    else if (g[H] < f[H]) tail = g.tail_rate();
    return Curve(std::move(v), tail, f.dt());
}

/// (f * g)(t) = min_{0<=s<=t} f(s) + g(t - s).
inline Curve curve_conv(const Curve& f, const Curve& g) {
    detail::check_dt(f, g);
    std::size_t H = std::min(f.horizon(), g.horizon());
    std::vector<double> v(H + 1, inf);
    const double* fs = f.samples().data();
    const double* gs = g.samples().data();
    for (std::size_t t = 0; t <= H; ++t) {
        double m = inf;
        for (std::size_t s = 0; s <= t; ++s) {
            double x = fs[s] + gs[t - s];
            if (x < m) m = x;
        }
        v[t] = m;
    }
    return Curve(std::move(v), std::min(f.tail_rate(), g.tail_rate()), f.dt());
}

/// (f / g)(t) = sup_{s>=0} f(t+s) - g(s); all-+inf and flagged when f outgrows g.
inline Curve curve_deconv(const Curve& f, const Curve& g) {
    detail::check_dt(f, g);
    std::size_t H = std::min(f.horizon(), g.horizon());
    if (f.tail_rate() > g.tail_rate()) {
        Curve c = curves::top(H, f.dt());
        c.set_divergent(true);
        return c;
    }
    const long long S = static_cast<long long>(std::max(f.horizon(), g.horizon()));
    std::vector<double> v(H + 1, -inf);
    for (std::size_t t = 0; t <= H; ++t) {
        double m = -inf;
        for (long long s = 0; s <= S; ++s) {
            double x = detail::sub(f.at(static_cast<long long>(t) + s), g.at(s));
            if (x > m) m = x;
        }
        v[t] = m;
    }
    return Curve(std::move(v), f.tail_rate(), f.dt());
}

/// inf_{s>=0} f(t+s) - g(s), clamped at 0 from below.
inline Curve curve_maxdeconv(const Curve& f, const Curve& g) {
    detail::check_dt(f, g);
    std::size_t H = std::min(f.horizon(), g.horizon());
    const long long S = static_cast<long long>(std::max(f.horizon(), g.horizon()));
    std::vector<double> v(H + 1);
    for (std::size_t t = 0; t <= H; ++t) {
        double m = inf;
        for (long long s = 0; s <= S; ++s) {
            double gv = g.at(s);
            if (std::isinf(gv)) break;
            m = std::min(m, f.at(static_cast<long long>(t) + s) - gv);
        }
        v[t] = std::max(0.0, m);
    }
    Curve c(std::move(v), std::min(f.tail_rate(), g.tail_rate()), f.dt());
    if (f.tail_rate() < g.tail_rate()) c.set_divergent(true);
    return c;
}

/// f* = min_k f^k by iterated squaring; tail = inf_t f(t)/t (asymptotic rate of the closure).
inline Curve subadditive_closure(const Curve& f) {
    if (f[0] < 0) throw ConvergenceError("closure: f(0) < 0");
    const std::size_t H = f.horizon();
    Curve g = curve_min(curves::unit(H, f.dt()), f);
    for (std::size_t it = 0; it < 64; ++it) {
        Curve next = curve_min(g, curve_conv(g, g));
        if (next.samples() == g.samples()) break;
        g = std::move(next);
    }
    double rate = f.tail_rate();
    for (std::size_t t = 1; t <= H; ++t) rate = std::min(rate, f[t] / static_cast<double>(t));
    return Curve(g.samples(), rate, f.dt());
}

struct BoundResult {
    double backlog = 0.0;
    double delay = 0.0;  ///< steps
    Curve output;
    bool unbounded = false;
    bool edge_warning = false;  ///< sup attained at the horizon edge
};

/// inf{h >= 0 : beta(s + h) >= a}, scanning the grid then the tail; +inf if never.
inline double first_reach(const Curve& beta, long long s, double a) {
    if (std::isinf(a)) return inf;
    const long long H = static_cast<long long>(beta.horizon());
    for (long long t = s; t <= H; ++t)
        if (beta[static_cast<std::size_t>(t)] >= a) return static_cast<double>(t - s);
    double last = beta.samples().back();
    double r = beta.tail_rate();
    if (std::isinf(r) || std::isinf(last)) return static_cast<double>(std::max(H + 1, s) - s);
    if (r <= 0) return inf;
    long long t = std::max(H + 1, s);
    double need = std::ceil((a - last) / r - 1e-12);
    t = std::max(t, H + static_cast<long long>(need));
    return static_cast<double>(t - s);
}

/// Horizontal deviation sup_s inf{h : beta(s+h) >= alpha(s)} over s in [0, H_alpha].
inline double horizontal_deviation(const Curve& alpha, const Curve& beta, bool* edge = nullptr) {
    double d = 0.0;
    std::size_t arg = 0;
    for (std::size_t s = 0; s <= alpha.horizon(); ++s) {
        double h = first_reach(beta, static_cast<long long>(s), alpha[s]);
        if (h > d) { d = h; arg = s; }
    }
    if (edge) *edge = alpha.horizon() > 0 && arg == alpha.horizon();
    return d;
}

inline double vertical_deviation(const Curve& alpha, const Curve& beta, bool* edge = nullptr) {
    double b = 0.0;
    std::size_t arg = 0;
    std::size_t H = std::min(alpha.horizon(), beta.horizon());
    for (std::size_t s = 0; s <= H; ++s) {
        double x = detail::sub(alpha[s], beta[s]);
        if (x > b) { b = x; arg = s; }
    }
    if (edge) *edge = H > 0 && arg == H;
    return b;
}

inline BoundResult bound_calculators(const Curve& alpha, const Curve& beta) {
    detail::check_dt(alpha, beta);
    BoundResult r;
    if (alpha.tail_rate() > beta.tail_rate()) {
        r.unbounded = true;
        r.backlog = inf;
        r.delay = inf;
        r.output = curves::top(alpha.horizon(), alpha.dt());
        r.output.set_divergent(true);
        return r;
    }
    bool e1 = false, e2 = false;
    r.backlog = vertical_deviation(alpha, beta, &e1);
    r.delay = horizontal_deviation(alpha, beta, &e2);
    r.output = curve_deconv(alpha, beta);
    r.edge_warning = e1 || e2;
    return r;
}

struct ArrivalCurves {
    Curve alpha_max;
    Curve alpha_min;
};

inline ArrivalCurves estimate_arrival_curves(const Curve& U) {
    return {curve_deconv(U, U), curve_maxdeconv(U, U)};
}

/// Rate-latency fit below a curve: rate = tail rate, offset = value at the first
/// positive step, latency = smallest T with offset + R (t - T)^+ <= f(t) for t >= 1.
struct RateLatency {
    double rate;     ///< per step
    double latency;  ///< steps
    double offset;
};

inline RateLatency extract_rate_latency(const Curve& f) {
    RateLatency rl{f.tail_rate(), 0.0, f.horizon() >= 1 ? f[1] : f[0]};
    if (rl.rate <= 0 || std::isinf(rl.rate)) return rl;
    for (std::size_t t = 1; t <= f.horizon(); ++t)
        rl.latency = std::max(rl.latency, static_cast<double>(t) - (f[t] - rl.offset) / rl.rate);
    rl.latency = std::max(0.0, rl.latency);
    return rl;
}

// ---------------------------------------------------------------- matrices

class CurveMatrix {
public:
    CurveMatrix() = default;
    CurveMatrix(std::size_t rows, std::size_t cols, const Curve& fill)
        : r_(rows), c_(cols), e_(rows * cols, fill) {}

    static CurveMatrix identity(std::size_t n, std::size_t H, double dt = 1.0) {
        CurveMatrix m(n, n, curves::top(H, dt));
        for (std::size_t i = 0; i < n; ++i) m(i, i) = curves::unit(H, dt);
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    Curve& operator()(std::size_t i, std::size_t j) { return e_[i * c_ + j]; }
    const Curve& operator()(std::size_t i, std::size_t j) const { return e_[i * c_ + j]; }

    std::size_t horizon() const {
        std::size_t H = std::numeric_limits<std::size_t>::max();
        for (auto& c : e_) H = std::min(H, c.horizon());
        return H;
    }
    double dt() const { return e_.empty() ? 1.0 : e_.front().dt(); }

    bool same_samples(const CurveMatrix& o) const {
        if (r_ != o.r_ || c_ != o.c_) return false;
        for (std::size_t k = 0; k < e_.size(); ++k)
            if (e_[k].samples() != o.e_[k].samples()) return false;
        return true;
    }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<Curve> e_;
};

inline CurveMatrix matrix_min(const CurveMatrix& a, const CurveMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matrix_min: dimension mismatch");
    CurveMatrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = curve_min(a(i, j), b(i, j));
    return out;
}

inline CurveMatrix matrix_conv(const CurveMatrix& a, const CurveMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matrix_conv: inner dimension mismatch");
    std::size_t H = std::min(a.horizon(), b.horizon());
    CurveMatrix out(a.rows(), b.cols(), curves::top(H, a.dt()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) = curve_min(out(i, j), curve_conv(a(i, k), b(k, j)));
    return out;
}

/// (beta * U)_i = min_j beta_ij * U_j.
inline std::vector<Curve> matrix_apply(const CurveMatrix& a, const std::vector<Curve>& u) {
    if (a.cols() != u.size()) throw ShapeError("matrix_apply: dimension mismatch");
    std::vector<Curve> y;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Curve acc = curves::top(std::min(a.horizon(), u[0].horizon()), a.dt());
        for (std::size_t j = 0; j < a.cols(); ++j) acc = curve_min(acc, curve_conv(a(i, j), u[j]));
        y.push_back(acc);
    }
    return y;
}

/// F* = I + F + F^2 + ... by iterated squaring. Entry tails use the secant
/// over the second half of the horizon.
inline CurveMatrix matrix_closure(const CurveMatrix& f) {
    if (f.rows() != f.cols()) throw ShapeError("matrix_closure: square matrix required");
    for (std::size_t i = 0; i < f.rows(); ++i)
        if (f(i, i)[0] < 0) throw ConvergenceError("matrix_closure: negative diagonal at t = 0");
    const std::size_t H = f.horizon();
    CurveMatrix g = matrix_min(CurveMatrix::identity(f.rows(), H, f.dt()), f);
    for (std::size_t it = 0; it < 64; ++it) {
        CurveMatrix next = matrix_min(g, matrix_conv(g, g));
        if (next.same_samples(g)) break;
        g = std::move(next);
    }
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const Curve& c = g(i, j);
            double tail = f(i, j).tail_rate();
            std::size_t h0 = H / 2;
            if (H > 0 && !std::isinf(c[H]) && !std::isinf(c[h0]) && H > h0)
                tail = std::min(tail, (c[H] - c[h0]) / static_cast<double>(H - h0));
            g(i, j) = Curve(c.samples(), std::isinf(c[H]) ? inf : tail, c.dt());
        }
    return g;
}

// ---------------------------------------------------------------- MIMO

using TimeShiftMatrix = std::vector<std::vector<double>>;

/// inf{s >= 0 : Ui(t + s) >= Uj(t)} maximised over t in [0, H].
inline double max_lag(const Curve& ui, const Curve& uj) {
    double best = 0.0;
    const long long H = static_cast<long long>(uj.horizon());
    for (long long t = 0; t <= H; ++t) {
        double target = uj.at(t);
        double lag = first_reach(ui, t, target);
        best = std::max(best, lag);
    }
    return best;
}

inline TimeShiftMatrix time_shift_matrix(const std::vector<Curve>& flows, double rel_tol = 1e-6) {
    const std::size_t n = flows.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double ri = flows[i].tail_rate(), rj = flows[j].tail_rate();
            if (std::abs(ri - rj) > rel_tol * std::max({1e-12, std::abs(ri), std::abs(rj)}))
                throw RangeError("time_shift_matrix: flows have different asymptotic rates");
        }
    TimeShiftMatrix T(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) T[i][j] = max_lag(flows[i], flows[j]);
    return T;
}

struct ArrivalMatrix {
    CurveMatrix alpha;
    TimeShiftMatrix T;
};

/// alpha_ii = Ui / Ui, alpha_ij = d^{T_ij} * (Ui / Uj).
inline ArrivalMatrix arrival_matrix(const std::vector<Curve>& flows) {
    const std::size_t n = flows.size();
    TimeShiftMatrix T = time_shift_matrix(flows);
    std::size_t H = flows[0].horizon();
    for (auto& f : flows) H = std::min(H, f.horizon());
    CurveMatrix a(n, n, curves::zero(H, flows[0].dt()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Curve d = curve_deconv(flows[i], flows[j]);
            if (i == j) {
                a(i, j) = d;
            } else {
                auto Tij = static_cast<std::size_t>(std::llround(T[i][j]));
                a(i, j) = curve_conv(curves::shift(Tij, d.horizon(), d.dt()), d);
                a(i, j) = Curve(a(i, j).samples(), d.tail_rate(), d.dt());
            }
        }
    return {a, T};
}

struct MimoDelay {
    std::vector<double> d;                   ///< per flow, steps
    std::vector<std::vector<double>> parts;  ///< T_ij + hdev(alpha_ij, beta_ij), steps
    bool unbounded = false;
    bool edge_warning = false;
};

inline MimoDelay mimo_delay_bound(const CurveMatrix& alpha, const TimeShiftMatrix& T, const CurveMatrix& beta) {
    const std::size_t n = alpha.rows();
    if (beta.rows() != n || beta.cols() != n || alpha.cols() != n) throw ShapeError("mimo_delay_bound: dimension mismatch");
    MimoDelay out;
    out.d.assign(n, 0.0);
    out.parts.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double part;
            if (alpha(i, j).tail_rate() > beta(i, j).tail_rate() + 1e-12) {
                part = inf;
                out.unbounded = true;
            } else {
                bool edge = false;
                part = T[i][j] + horizontal_deviation(alpha(i, j), beta(i, j), &edge);
                out.edge_warning = out.edge_warning || edge;
            }
            out.parts[i][j] = part;
            out.d[i] = std::max(out.d[i], part);
        }
    return out;
}

}  // namespace tropnet
