#pragma once

/**
 * @file dp.hpp
 * @brief Additive, 1-homogeneous monotone dynamic-programming systems
 * x^k_i = opt_u ( [M^u x^{k-1}]_i + [N^u x^k]_i + c^u_i ) and min-max games,
 * with structural checks, triangular iteration and growth-rate estimation.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tropnet/common.hpp"
#include "tropnet/maxplus.hpp"

namespace tropnet::dp {

enum class Sense { max, min, minmax };

/// Sparse row: (column, coefficient).
using Row = std::vector<std::pair<std::size_t, double>>;

/// One action (or (u, w) pair for games): explicit rows, implicit rows, rewards.
struct Action {
    std::vector<Row> M;
    std::vector<Row> N;
    std::vector<double> c;
};

/// Actions are indexed u * n_w + w; for max/min senses n_w = 1.
struct DPDynamics {
    std::size_t n = 0;
    std::size_t n_u = 0;
    std::size_t n_w = 1;
    Sense sense = Sense::max;
    std::vector<Action> actions;

    Action& action(std::size_t u, std::size_t w = 0) { return actions[u * n_w + w]; }
    const Action& action(std::size_t u, std::size_t w = 0) const { return actions[u * n_w + w]; }

    static DPDynamics make(std::size_t n, std::size_t n_u, Sense sense, std::size_t n_w = 1) {
        DPDynamics d;
        d.n = n;
        d.n_u = n_u;
        d.n_w = sense == Sense::minmax ? n_w : 1;
        d.sense = sense;
        d.actions.assign(d.n_u * d.n_w, Action{std::vector<Row>(n), std::vector<Row>(n), std::vector<double>(n, 0.0)});
        return d;
    }
};

struct Structure {
    bool substochastic = true;
    bool homogeneous_monotone = true;
};

/// Nonnegative coefficients and unit row sums on every row whose reward is finite.
inline Structure check_structure(const DPDynamics& d, double tol = 1e-9) {
    Structure s;
    for (const Action& a : d.actions)
        for (std::size_t i = 0; i < d.n; ++i) {
            if (std::isinf(a.c[i])) continue;
            double sum = 0.0;
            for (auto [j, v] : a.M[i]) { if (v < 0) s.substochastic = false; sum += v; }
            for (auto [j, v] : a.N[i]) { if (v < 0) s.substochastic = false; sum += v; }
            if (std::abs(sum - 1.0) > tol) s.substochastic = false;
        }
    s.homogeneous_monotone = s.substochastic;
    return s;
}

/// Order in which components can be updated so implicit terms are already known.
inline std::vector<std::size_t> triangular_order(const DPDynamics& d) {
    std::vector<std::vector<std::size_t>> succ(d.n);
    std::vector<std::size_t> indeg(d.n, 0);
    std::vector<std::vector<bool>> seen(d.n);
    for (const Action& a : d.actions)
        for (std::size_t i = 0; i < d.n; ++i)
            for (auto [j, v] : a.N[i]) {
                if (v == 0.0) continue;
                if (i == j) throw StructureError("fully implicit system: self-dependency");
                if (seen[j].empty()) seen[j].assign(d.n, false);
                if (seen[j][i]) continue;
                seen[j][i] = true;
                succ[j].push_back(i);
                ++indeg[i];
            }
    std::vector<std::size_t> order, ready;
    for (std::size_t i = d.n; i-- > 0;)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::size_t v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (std::size_t w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (order.size() != d.n) throw StructureError("fully implicit system: implicit graph is cyclic");
    return order;
}

struct Trajectory {
    std::vector<std::vector<double>> x;           ///< x^0..x^K
    std::vector<std::vector<std::size_t>> label;  ///< chosen action index per step (u * n_w + w); empty for k = 0
};

namespace detail {

inline double row_value(const Row& r, const std::vector<double>& x) {
    double s = 0.0;
    for (auto [j, v] : r) s += v * x[j];
    return s;
}

}  // namespace detail

/// One step; `prev` is x^{k-1}, `cur` is filled in triangular order.
inline void step(const DPDynamics& d, const std::vector<std::size_t>& order, const std::vector<double>& prev,
                 std::vector<double>& cur, std::vector<std::size_t>* labels = nullptr) {
    cur.assign(d.n, 0.0);
    if (labels) labels->assign(d.n, 0);
    for (std::size_t i : order) {
        auto value = [&](std::size_t k) {
            const Action& a = d.actions[k];
            double c = a.c[i];
            if (std::isinf(c)) return c;
            return detail::row_value(a.M[i], prev) + detail::row_value(a.N[i], cur) + c;
        };
        double best = 0.0;
        std::size_t arg = 0;
        if (d.sense == Sense::minmax) {
            best = inf;
            for (std::size_t u = 0; u < d.n_u; ++u) {
                double inner = -inf;
                std::size_t warg = 0;
                for (std::size_t w = 0; w < d.n_w; ++w) {
                    double v = value(u * d.n_w + w);
                    if (v > inner) { inner = v; warg = w; }
                }
                if (inner < best) { best = inner; arg = u * d.n_w + warg; }
            }
        } else {
            const bool mx = d.sense == Sense::max;
            best = mx ? -inf : inf;
            for (std::size_t u = 0; u < d.n_u; ++u) {
                double v = value(u);
                if (mx ? v > best : v < best) { best = v; arg = u; }
            }
        }
        cur[i] = best;
        if (labels) (*labels)[i] = arg;
    }
}

inline Trajectory iterate(const DPDynamics& d, const std::vector<double>& x0, std::size_t K) {
    if (x0.size() != d.n) throw ShapeError("iterate: initial vector size");
    if (K < 1) throw ShapeError("iterate: K >= 1 required");
    std::vector<std::size_t> order = triangular_order(d);
    Trajectory t;
    t.x.reserve(K + 1);
    t.x.push_back(x0);
    t.label.reserve(K + 1);
    t.label.emplace_back();
    for (std::size_t k = 1; k <= K; ++k) {
        std::vector<double> cur;
        std::vector<std::size_t> lab;
        step(d, order, t.x.back(), cur, &lab);
        t.x.push_back(std::move(cur));
        t.label.push_back(std::move(lab));
    }
    return t;
}

struct Growth {
    double mu = 0.0;
    double spread = 0.0;
};

/// Mean and spread over components of (x^K_i - x^{K/2}_i) / (K - K/2).
inline Growth growth_rate(const std::vector<std::vector<double>>& x) {
    if (x.size() < 2) return {};
    const std::size_t K = x.size() - 1;
    const std::size_t h = K / 2;
    const double span = static_cast<double>(K - h);
    Growth g;
    double lo = inf, hi = -inf, sum = 0.0;
    for (std::size_t i = 0; i < x[K].size(); ++i) {
        double r = (x[K][i] - x[h][i]) / span;
        sum += r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    g.mu = sum / static_cast<double>(x[K].size());
    g.spread = hi - lo;
    return g;
}

inline Growth growth_rate(const Trajectory& t) { return growth_rate(t.x); }

/// Arc i -> j whenever some (M^u + N^u)_{ji} > 0.
inline maxplus::PrecedenceGraph map_graph(const DPDynamics& d) {
    maxplus::PrecedenceGraph g;
    g.n = d.n;
    std::vector<std::vector<bool>> seen(d.n, std::vector<bool>(d.n, false));
    for (const Action& a : d.actions)
        for (std::size_t j = 0; j < d.n; ++j) {
            if (std::isinf(a.c[j])) continue;
            for (const Row* r : {&a.M[j], &a.N[j]})
                for (auto [i, v] : *r)
                    if (v > 0 && !seen[i][j]) {
                        seen[i][j] = true;
                        g.arcs.push_back({i, j, 1, 0.0});
                    }
        }
    return g;
}

inline bool is_strongly_connected(const maxplus::PrecedenceGraph& g) { return maxplus::is_strongly_connected(g); }

}  // namespace tropnet::dp
