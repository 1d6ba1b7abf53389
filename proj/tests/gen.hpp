#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "tropnet/maxplus.hpp"
#include "tropnet/metro_line.hpp"

namespace testgen {

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double a, double b) { return std::uniform_real_distribution<double>(a, b)(r); }
inline std::size_t index(Rng& r, std::size_t a, std::size_t b) {
    return std::uniform_int_distribution<std::size_t>(a, b)(r);
}

/// Integer-valued entries keep max-plus identities exact; eps with probability p_eps.
inline tropnet::maxplus::Matrix matrix(Rng& r, std::size_t rows, std::size_t cols, double p_eps = 0.2) {
    tropnet::maxplus::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = uniform(r, 0, 1) < p_eps ? tropnet::maxplus::eps : static_cast<double>(index(r, 0, 40)) - 20;
    return m;
}

inline tropnet::maxplus::PolyMatrix poly(Rng& r, std::size_t n, std::size_t degree, double p_eps = 0.3) {
    std::vector<tropnet::maxplus::Matrix> c;
    for (std::size_t l = 0; l <= degree; ++l) c.push_back(matrix(r, n, n, p_eps));
    return tropnet::maxplus::PolyMatrix(c);
}

/// Random line with n segments and 0 < m < n trains placed at random.
inline tropnet::metro::LineConfig line(Rng& r, std::size_t n_lo, std::size_t n_hi) {
    std::size_t n = index(r, n_lo, n_hi);
    tropnet::metro::LineConfig cfg;
    for (std::size_t j = 0; j < n; ++j) {
        bool plat = uniform(r, 0, 1) < 0.5;
        double run = uniform(r, 1, 100);
        double dwell = plat ? uniform(r, 1, 100) : 0.0;
        cfg.seg.push_back({run, dwell, uniform(r, 1, 100), 200.0, plat, 0});
    }
    std::size_t m = index(r, 1, n - 1);
    std::vector<std::size_t> pos(n);
    for (std::size_t j = 0; j < n; ++j) pos[j] = j;
    std::shuffle(pos.begin(), pos.end(), r);
    for (std::size_t i = 0; i < m; ++i) cfg.seg[pos[i]].train = 1;
    return cfg;
}

}  // namespace testgen
