#pragma once

/**
 * @file maxplus.hpp
 * @brief Max-plus scalars, matrices, polynomial matrices in the back-shift
 * operator, precedence graphs and cycle-ratio spectral tools.
 *
 * Conventions: a polynomial matrix A(g) = A_0 + g A_1 + ... acts on event
 * vectors by x^k_j = max_l max_i (A_l)_{ji} + x^{k-l}_i. An entry
 * (A_l)_{ji} != eps yields the arc i -> j with duration l.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tropnet/errors.hpp"

namespace tropnet::maxplus {

inline constexpr double eps = -std::numeric_limits<double>::infinity();
inline constexpr double unit = 0.0;

inline bool is_eps(double a) { return a == eps; }

inline double oplus(double a, double b) { return a < b ? b : a; }

inline double otimes(double a, double b) {
    if (is_eps(a) || is_eps(b)) return eps;
    return a + b;
}

/// x^{(x)l}: l-fold tropical power.
inline double power(double x, std::size_t l) {
    if (l == 0) return unit;
    if (is_eps(x)) return eps;
    return static_cast<double>(l) * x;
}

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = eps)
        : r_(rows), c_(cols), a_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        r_ = rows.size();
        c_ = r_ ? rows.begin()->size() : 0;
        for (auto& row : rows) {
            if (row.size() != c_) throw ShapeError("ragged matrix literal");
            a_.insert(a_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = unit;
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    bool all_eps() const {
        return std::all_of(a_.begin(), a_.end(), [](double v) { return is_eps(v); });
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<double> a_;
};

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("add: dimension mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = oplus(a(i, j), b(i, j));
    return out;
}

inline Matrix mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("mul: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (is_eps(aik)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = oplus(out(i, j), otimes(aik, b(k, j)));
        }
    return out;
}

enum class Op { add, mul };

inline Matrix matrix_op(const Matrix& a, const Matrix& b, Op op) {
    return op == Op::add ? add(a, b) : mul(a, b);
}

/// Scalar shift: every finite entry plus c.
inline Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = otimes(a(i, j), c);
    return out;
}

inline std::vector<double> apply(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw ShapeError("apply: dimension mismatch");
    std::vector<double> y(a.rows(), eps);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] = oplus(y[i], otimes(a(i, j), x[j]));
    return y;
}

/// Kleene star A* = I + A + A^2 + ...; throws when a circuit has positive weight.
inline Matrix star(const Matrix& a, double tol = 1e-9) {
    if (a.rows() != a.cols()) throw ShapeError("star: square matrix required");
    const std::size_t n = a.rows();
    Matrix s = a;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!is_eps(a(i, j))) scale = std::max(scale, std::abs(a(i, j)));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            double sik = s(i, k);
            if (is_eps(sik)) continue;
            for (std::size_t j = 0; j < n; ++j) s(i, j) = oplus(s(i, j), otimes(sik, s(k, j)));
        }
    for (std::size_t i = 0; i < n; ++i) {
        if (s(i, i) > tol * scale * static_cast<double>(n))
            throw UnboundedError("star: circuit of positive weight");
        s(i, i) = unit;
    }
    return s;
}

/// Polynomial matrix in the back-shift operator; coefficient l multiplies g^l.
class PolyMatrix {
public:
    PolyMatrix() = default;
    PolyMatrix(std::size_t rows, std::size_t cols) : r_(rows), c_(cols) {}
    explicit PolyMatrix(std::vector<Matrix> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) return;
        r_ = coeffs_[0].rows();
        c_ = coeffs_[0].cols();
        for (auto& m : coeffs_)
            if (m.rows() != r_ || m.cols() != c_) throw ShapeError("poly: coefficient shapes differ");
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    std::size_t size() const { return r_; }
    std::size_t stored_terms() const { return coeffs_.size(); }

    /// Largest l with A_l != eps-matrix (0 for the eps polynomial).
    std::size_t degree() const {
        for (std::size_t l = coeffs_.size(); l-- > 0;)
            if (!coeffs_[l].all_eps()) return l;
        return 0;
    }

    Matrix coeff(std::size_t l) const {
        if (l < coeffs_.size()) return coeffs_[l];
        return Matrix(r_, c_);
    }

    Matrix& coeff_ref(std::size_t l) {
        while (coeffs_.size() <= l) coeffs_.emplace_back(r_, c_);
        return coeffs_[l];
    }

    void set(std::size_t l, std::size_t i, std::size_t j, double v) { coeff_ref(l)(i, j) = v; }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<Matrix> coeffs_;
};

inline PolyMatrix add(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("poly add: dimension mismatch");
    PolyMatrix out(a.rows(), a.cols());
    std::size_t terms = std::max(a.stored_terms(), b.stored_terms());
    for (std::size_t l = 0; l < terms; ++l) out.coeff_ref(l) = add(a.coeff(l), b.coeff(l));
    return out;
}

inline PolyMatrix mul(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("poly mul: inner dimension mismatch");
    PolyMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.stored_terms(); ++i)
        for (std::size_t j = 0; j < b.stored_terms(); ++j) {
            Matrix& c = out.coeff_ref(i + j);
            c = add(c, mul(a.coeff(i), b.coeff(j)));
        }
    return out;
}

/// (+)_l A_l (x) x^{(x)l}.
inline Matrix poly_evaluate(const PolyMatrix& a, double x) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t l = 0; l < a.stored_terms(); ++l) out = add(out, scale(a.coeff(l), power(x, l)));
    return out;
}

struct Arc {
    std::size_t from;
    std::size_t to;
    std::size_t duration;
    double weight;
};

struct PrecedenceGraph {
    std::size_t n = 0;
    std::vector<Arc> arcs;
};

inline PrecedenceGraph build_precedence_graph(const PolyMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("precedence graph: square polynomial matrix required");
    PrecedenceGraph g;
    g.n = a.rows();
    for (std::size_t l = 0; l < a.stored_terms(); ++l) {
        const Matrix m = a.coeff(l);
        for (std::size_t j = 0; j < g.n; ++j)
            for (std::size_t i = 0; i < g.n; ++i)
                if (!is_eps(m(j, i))) g.arcs.push_back({i, j, l, m(j, i)});
    }
    return g;
}

/// Strongly connected component index per node (Tarjan).
inline std::vector<std::size_t> scc_ids(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                        std::size_t* count = nullptr) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [u, v] : edges) adj[u].push_back(v);
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next = 0, ncomp = 0;
    // iterative Tarjan to survive long rings
    struct Frame { std::size_t v, child; };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != none) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.child < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.child++];
                if (index[w] == none) {
                    index[w] = low[w] = next++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                std::size_t v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
                if (low[v] == index[v]) {
                    std::size_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                    } while (w != v);
                    ++ncomp;
                }
            }
        }
    }
    if (count) *count = ncomp;
    return comp;
}

inline bool is_strongly_connected(const PrecedenceGraph& g) {
    if (g.n == 0) return false;
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (auto& a : g.arcs) e.emplace_back(a.from, a.to);
    std::size_t count = 0;
    scc_ids(g.n, e, &count);
    if (count != 1) return false;
    if (g.n == 1) return !g.arcs.empty();
    return true;
}

inline bool is_irreducible(const PolyMatrix& a) { return is_strongly_connected(build_precedence_graph(a)); }

struct CycleRatio {
    double ratio;
    std::vector<std::size_t> cycle;
};

namespace detail {

inline double graph_scale(const PrecedenceGraph& g) {
    double s = 1.0;
    for (auto& a : g.arcs) s = std::max(s, std::abs(a.weight));
    return s;
}

/// Longest-path Bellman-Ford on w - mu*d from a virtual source; true if a positive circuit exists.
inline bool has_positive_cycle(const PrecedenceGraph& g, double mu, double tol, std::vector<double>* dist_out = nullptr,
                               std::vector<std::size_t>* pred_out = nullptr, std::size_t* witness = nullptr) {
    std::vector<double> dist(g.n, 0.0);
    std::vector<std::size_t> pred(g.n, std::numeric_limits<std::size_t>::max());
    std::size_t last = std::numeric_limits<std::size_t>::max();
    for (std::size_t it = 0; it <= g.n; ++it) {
        last = std::numeric_limits<std::size_t>::max();
        for (std::size_t k = 0; k < g.arcs.size(); ++k) {
            const Arc& a = g.arcs[k];
            double cand = dist[a.from] + a.weight - mu * static_cast<double>(a.duration);
            if (cand > dist[a.to] + tol) {
                dist[a.to] = cand;
                pred[a.to] = k;
                last = a.to;
            }
        }
        if (last == std::numeric_limits<std::size_t>::max()) break;
    }
    if (dist_out) *dist_out = dist;
    if (pred_out) *pred_out = pred;
    if (witness) *witness = last;
    return last != std::numeric_limits<std::size_t>::max();
}

inline void check_zero_duration(const PrecedenceGraph& g, double tol) {
    PrecedenceGraph z;
    z.n = g.n;
    for (auto& a : g.arcs)
        if (a.duration == 0) z.arcs.push_back(a);
    if (has_positive_cycle(z, 0.0, tol)) throw UnboundedError("positive-weight circuit of zero duration");
}

}  // namespace detail

/// All elementary circuits with their weight/duration ratios (brute force).
inline std::vector<CycleRatio> enumerate_cycle_ratios(const PrecedenceGraph& g, std::size_t max_nodes = 10) {
    if (g.n > max_nodes) throw SizeError("enumerate_cycle_ratios: graph too large");
    std::vector<std::vector<std::size_t>> out_arcs(g.n);
    for (std::size_t k = 0; k < g.arcs.size(); ++k) out_arcs[g.arcs[k].from].push_back(k);
    std::vector<CycleRatio> result;
    std::vector<std::size_t> path;
    std::vector<bool> used(g.n, false);
    std::function<void(std::size_t, std::size_t, double, std::size_t)> dfs =
        [&](std::size_t start, std::size_t v, double w, std::size_t d) {
            for (std::size_t k : out_arcs[v]) {
                const Arc& a = g.arcs[k];
                if (a.to == start) {
                    std::size_t dd = d + a.duration;
                    if (dd > 0) result.push_back({(w + a.weight) / static_cast<double>(dd), path});
                } else if (a.to > start && !used[a.to]) {
                    used[a.to] = true;
                    path.push_back(a.to);
                    dfs(start, a.to, w + a.weight, d + a.duration);
                    path.pop_back();
                    used[a.to] = false;
                }
            }
        };
    for (std::size_t s = 0; s < g.n; ++s) {
        path = {s};
        used.assign(g.n, false);
        used[s] = true;
        dfs(s, s, 0.0, 0);
    }
    return result;
}

/// Maximum over elementary circuits of W(c)/D(c); critical circuit is the
/// lexicographically smallest node sequence among maximizers.
inline CycleRatio max_cycle_ratio(const PrecedenceGraph& g, double tol = 1e-9) {
    if (!is_strongly_connected(g)) throw StructureError("max_cycle_ratio: graph not strongly connected");
    const double scale = detail::graph_scale(g);
    const double bf_tol = 1e-13 * scale;
    detail::check_zero_duration(g, bf_tol);

    double total = 1.0;
    for (auto& a : g.arcs) total += std::abs(a.weight);
    double lo = -total, hi = total;
    if (detail::has_positive_cycle(g, hi, bf_tol)) throw StructureError("max_cycle_ratio: no circuit of positive duration");
    if (!detail::has_positive_cycle(g, lo, bf_tol)) throw StructureError("max_cycle_ratio: no circuit of positive duration");
    for (int it = 0; it < 200 && hi - lo > 1e-3 * tol * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (detail::has_positive_cycle(g, mid, bf_tol)) lo = mid; else hi = mid;
    }

    std::vector<double> dist;
    detail::has_positive_cycle(g, hi, bf_tol, &dist);
    const double tight_tol = tol * scale * static_cast<double>(std::max<std::size_t>(g.n, 1));
    // best tight arc per ordered node pair
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> tight(g.n);
    for (std::size_t k = 0; k < g.arcs.size(); ++k) {
        const Arc& a = g.arcs[k];
        double slack = dist[a.from] + a.weight - hi * static_cast<double>(a.duration) - dist[a.to];
        if (slack >= -tight_tol) tight[a.from].push_back({a.to, k});
    }
    for (auto& t : tight) {
        std::sort(t.begin(), t.end(), [&](auto x, auto y) {
            if (x.first != y.first) return x.first < y.first;
            double rx = g.arcs[x.second].weight - hi * static_cast<double>(g.arcs[x.second].duration);
            double ry = g.arcs[y.second].weight - hi * static_cast<double>(g.arcs[y.second].duration);
            return rx > ry;
        });
    }

    std::vector<std::size_t> path, arcs_on_path;
    std::vector<bool> used(g.n, false);
    CycleRatio best{eps, {}};
    std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t v) -> bool {
        std::size_t prev_to = std::numeric_limits<std::size_t>::max();
        for (auto [to, k] : tight[v]) {
            if (to == prev_to) continue;  // parallel arcs: best already tried
            prev_to = to;
            if (to == start) {
                double w = g.arcs[k].weight;
                std::size_t d = g.arcs[k].duration;
                for (std::size_t q : arcs_on_path) { w += g.arcs[q].weight; d += g.arcs[q].duration; }
                if (d == 0) continue;
                best = {w / static_cast<double>(d), path};
                return true;
            }
            if (to < start || used[to]) continue;
            used[to] = true;
            path.push_back(to);
            arcs_on_path.push_back(k);
            if (dfs(start, to)) return true;
            path.pop_back();
            arcs_on_path.pop_back();
            used[to] = false;
        }
        return false;
    };
    for (std::size_t s = 0; s < g.n; ++s) {
        path = {s};
        arcs_on_path.clear();
        used.assign(g.n, false);
        used[s] = true;
        if (dfs(s, s)) break;
    }
    if (best.cycle.empty() || best.ratio < hi - 1e3 * tight_tol)
        throw ConvergenceError("max_cycle_ratio: critical circuit extraction failed");
    return best;
}

/// Column of (A(-mu))* at the first critical node; satisfies A(-mu) v = v.
inline std::vector<double> generalized_eigenvector(const PolyMatrix& a, double mu, double tol = 1e-6) {
    if (!is_irreducible(a)) throw StructureError("generalized_eigenvector: matrix not irreducible");
    const std::size_t n = a.rows();
    Matrix b = poly_evaluate(a, -mu);
    Matrix s;
    try {
        s = star(b, 1e-9);
    } catch (const UnboundedError&) {
        throw ConvergenceError("generalized_eigenvector: mu below the generalized eigenvalue");
    }
    Matrix plus = mul(b, s);
    std::size_t crit = n;
    double best = eps;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(plus(i, i)) <= 1e-9 * std::max(1.0, std::abs(mu))) { crit = i; break; }
        best = oplus(best, plus(i, i));
    }
    if (crit == n) throw ConvergenceError("generalized_eigenvector: no critical node for given mu");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = s(i, crit);
        if (is_eps(v[i])) throw ConvergenceError("generalized_eigenvector: eigenvector not finite");
    }
    std::vector<double> bv = maxplus::apply(b, v);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(bv[i] - v[i]));
    if (res > tol) throw ConvergenceError("generalized_eigenvector: residual " + std::to_string(res));
    return v;
}

/// Topological order of the duration-0 part; throws on a cycle.
inline std::vector<std::size_t> implicit_order(const Matrix& a0) {
    const std::size_t n = a0.rows();
    std::vector<std::size_t> indeg(n, 0);
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (!is_eps(a0(j, i))) {
                if (i == j) throw StructureError("implicit self-dependency");
                succ[i].push_back(j);
                ++indeg[j];
            }
    std::vector<std::size_t> order, ready;
    for (std::size_t i = n; i-- > 0;)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::size_t v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (std::size_t w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (order.size() != n) throw StructureError("cyclic duration-0 dependency");
    return order;
}

/// Iterates x^k = A(g) x^k for k = 1..K; returns x^0..x^K.
/// history holds x^{1-p}..x^0 (p = degree); shorter histories are padded with eps.
inline std::vector<std::vector<double>> simulate_maxplus(const PolyMatrix& a, std::vector<std::vector<double>> history,
                                                         std::size_t K) {
    const std::size_t n = a.rows();
    const std::size_t p = a.degree();
    if (history.empty()) throw ShapeError("simulate_maxplus: empty history");
    for (auto& h : history)
        if (h.size() != n) throw ShapeError("simulate_maxplus: history vector size");
    if (history.size() < p) throw ShapeError("simulate_maxplus: history shorter than degree");
    std::vector<std::size_t> order = implicit_order(a.coeff(0));
    std::vector<Matrix> coeffs;
    for (std::size_t l = 0; l <= p; ++l) coeffs.push_back(a.coeff(l));

    std::vector<std::vector<double>> traj = history;
    const std::size_t offset = history.size() - 1;
    for (std::size_t k = 1; k <= K; ++k) {
        std::vector<double> x(n, eps);
        const std::size_t cur = traj.size();
        for (std::size_t j : order) {
            double v = eps;
            for (std::size_t l = 1; l <= p; ++l) {
                const auto& prev = traj[cur - l];
                for (std::size_t i = 0; i < n; ++i) v = oplus(v, otimes(coeffs[l](j, i), prev[i]));
            }
            for (std::size_t i = 0; i < n; ++i) v = oplus(v, otimes(coeffs[0](j, i), x[i]));
            x[j] = v;
        }
        traj.push_back(std::move(x));
    }
    traj.erase(traj.begin(), traj.begin() + static_cast<std::ptrdiff_t>(offset));
    return traj;
}

}  // namespace tropnet::maxplus
