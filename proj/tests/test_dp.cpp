#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "tropnet/carfollow.hpp"
#include "tropnet/dp.hpp"
#include "tropnet/maxplus.hpp"
#include "tropnet/metro_dp.hpp"

using namespace tropnet;
using namespace tropnet::dp;

namespace {

/// x_i = max_j (A_ij + x_j) written with one action per column.
DPDynamics from_maxplus(const maxplus::Matrix& a) {
    DPDynamics d = DPDynamics::make(a.rows(), a.cols(), Sense::max);
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) {
            d.action(j).M[i] = {{j, 1.0}};
            d.action(j).c[i] = a(i, j);
        }
    return d;
}

/// Random substochastic max system with two actions.
DPDynamics random_stochastic(testgen::Rng& r, std::size_t n, Sense sense = Sense::max, std::size_t nw = 1) {
    DPDynamics d = DPDynamics::make(n, 2, sense, nw);
    for (auto& a : d.actions)
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j1 = testgen::index(r, 0, n - 1), j2 = testgen::index(r, 0, n - 1);
            double w = testgen::uniform(r, 0, 1);
            a.M[i] = {{j1, w}, {j2, 1.0 - w}};
            a.c[i] = testgen::uniform(r, -10, 10);
        }
    return d;
}

std::vector<double> random_vec(testgen::Rng& r, std::size_t n, double lo = -50, double hi = 50) {
    std::vector<double> x(n);
    for (double& v : x) v = testgen::uniform(r, lo, hi);
    return x;
}

std::vector<double> one_step(const DPDynamics& d, const std::vector<double>& x) {
    std::vector<double> out;
    step(d, triangular_order(d), x, out);
    return out;
}

metro::LineConfig small_line() {
    metro::LineConfig cfg;
    for (std::size_t j = 0; j < 8; ++j) cfg.seg.push_back({40.0 + j, j % 2 ? 20.0 : 0.0, 30.0, 200.0, j % 2 == 1, 0});
    return metro::with_trains(cfg, 3);
}

}  // namespace

TEST(Structure, IdentityIsSubstochastic) {
    DPDynamics d = DPDynamics::make(3, 1, Sense::max);
    for (std::size_t i = 0; i < 3; ++i) d.action(0).M[i] = {{i, 1.0}};
    Structure s = check_structure(d);
    EXPECT_TRUE(s.substochastic);
    EXPECT_TRUE(s.homogeneous_monotone);
}

TEST(Structure, MetroControlledIsSubstochastic) {
    metro::LineConfig cfg = small_line();
    auto dem = metro::DemandProfile::uniform(cfg, 2.0, 30.0, 500.0);
    auto p = metro::fix_params(cfg, dem, cfg.m());
    EXPECT_TRUE(check_structure(metro::build_controlled(cfg, p)).substochastic);
}

TEST(Structure, MetroUncontrolledIsNot) {
    metro::LineConfig cfg = small_line();
    auto dem = metro::DemandProfile::uniform(cfg, 2.0, 30.0, 500.0);
    Structure s = check_structure(metro::build_uncontrolled(cfg, dem));
    EXPECT_FALSE(s.substochastic);
    EXPECT_FALSE(s.homogeneous_monotone);
}

TEST(Triangular, NoImplicitPartGivesNaturalOrder) {
    DPDynamics d = DPDynamics::make(4, 1, Sense::max);
    auto o = triangular_order(d);
    EXPECT_EQ(o, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Triangular, OrderRespectsImplicitDependencies) {
    testgen::Rng r(11);
    for (int k = 0; k < 50; ++k) {
        metro::LineConfig cfg = testgen::line(r, 3, 15);
        auto dem = metro::DemandProfile::uniform(cfg, 1.0, 30.0, 500.0);
        DPDynamics d = metro::build_uncontrolled(cfg, dem);
        auto o = triangular_order(d);
        std::vector<std::size_t> pos(d.n);
        for (std::size_t i = 0; i < o.size(); ++i) pos[o[i]] = i;
        for (auto& a : d.actions)
            for (std::size_t i = 0; i < d.n; ++i)
                for (auto [j, v] : a.N[i]) EXPECT_LT(pos[j], pos[i]);
    }
}

TEST(Triangular, CyclicImplicitGraphRejected) {
    DPDynamics d = DPDynamics::make(3, 1, Sense::max);
    for (std::size_t i = 0; i < 3; ++i) d.action(0).N[i] = {{(i + 2) % 3, 1.0}};
    EXPECT_THROW(triangular_order(d), StructureError);
    EXPECT_THROW(iterate(d, {0, 0, 0}, 3), StructureError);
}

TEST(Triangular, EmptyLineRejected) {
    metro::LineConfig cfg = small_line();
    cfg = metro::with_trains(cfg, 0);
    auto dem = metro::DemandProfile::uniform(cfg, 1.0, 30.0, 500.0);
    EXPECT_THROW(metro::build_uncontrolled(cfg, dem), StructureError);
}

TEST(Iterate, ScalarLinearGrowth) {
    DPDynamics d = DPDynamics::make(1, 1, Sense::max);
    d.action(0).M[0] = {{0, 1.0}};
    d.action(0).c[0] = 1.5;
    Trajectory t = iterate(d, {2.0}, 20);
    ASSERT_EQ(t.x.size(), 21u);
    EXPECT_DOUBLE_EQ(t.x[20][0], 2.0 + 20 * 1.5);
    EXPECT_THROW(iterate(d, {0.0}, 0), ShapeError);
    EXPECT_THROW(iterate(d, {0.0, 1.0}, 3), ShapeError);
}

TEST(Iterate, MinMaxPayoffTable) {
    // payoff c^{uw}: u0 -> {3, 5}, u1 -> {4, 2}; min_u max_w = min(5, 4) = 4
    DPDynamics d = DPDynamics::make(1, 2, Sense::minmax, 2);
    const double c[2][2] = {{3, 5}, {4, 2}};
    for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t w = 0; w < 2; ++w) {
            d.action(u, w).M[0] = {{0, 1.0}};
            d.action(u, w).c[0] = c[u][w];
        }
    Trajectory t = iterate(d, {0.0}, 5);
    EXPECT_DOUBLE_EQ(t.x[5][0], 20.0);
    EXPECT_EQ(t.label[1][0], 1u * 2 + 0);
}

TEST(Iterate, TiesPickLowestLabel) {
    DPDynamics d = DPDynamics::make(1, 3, Sense::max);
    for (std::size_t u = 0; u < 3; ++u) {
        d.action(u).M[0] = {{0, 1.0}};
        d.action(u).c[0] = u == 0 ? 1.0 : 2.0;
    }
    EXPECT_EQ(iterate(d, {0.0}, 1).label[1][0], 1u);
    DPDynamics g = DPDynamics::make(1, 2, Sense::minmax, 2);
    for (auto& a : g.actions) {
        a.M[0] = {{0, 1.0}};
        a.c[0] = 1.0;
    }
    EXPECT_EQ(iterate(g, {0.0}, 1).label[1][0], 0u);
}

TEST(Iterate, DeterministicReplay) {
    testgen::Rng r(12);
    DPDynamics d = random_stochastic(r, 6, Sense::minmax, 2);
    auto x0 = random_vec(r, 6);
    Trajectory a = iterate(d, x0, 100), b = iterate(d, x0, 100);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.label, b.label);
}

TEST(Iterate, NoDemandMetroMatchesMaxPlusLine) {
    testgen::Rng r(13);
    for (int k = 0; k < 30; ++k) {
        metro::LineConfig cfg = testgen::line(r, 3, 12);
        auto dem = metro::DemandProfile::uniform(cfg, 0.0, 30.0, 500.0);
        DPDynamics d = metro::build_uncontrolled(cfg, dem);
        std::vector<double> x0(cfg.n(), 0.0);
        Trajectory t = iterate(d, x0, 60);
        auto ref = maxplus::simulate_maxplus(metro::build_line_polymatrix(cfg), {x0}, 60);
        for (std::size_t s = 0; s <= 60; ++s)
            for (std::size_t j = 0; j < cfg.n(); ++j) ASSERT_NEAR(t.x[s][j], ref[s][j], 1e-9);
    }
}

TEST(Growth, LinearTrajectory) {
    std::vector<std::vector<double>> x;
    for (int k = 0; k <= 10; ++k) x.push_back({2.0 * k, 2.0 * k + 1});
    Growth g = growth_rate(x);
    EXPECT_DOUBLE_EQ(g.mu, 2.0);
    EXPECT_DOUBLE_EQ(g.spread, 0.0);
}

TEST(Growth, MaxPlusSpecialCaseMatchesCycleRatio) {
    testgen::Rng r(14);
    const std::size_t K = 400;
    int cases = 0;
    std::size_t bad = 0;
    for (int k = 0; k < 400 && cases < 100; ++k) {
        maxplus::Matrix a = testgen::matrix(r, 5, 5, 0.5);
        maxplus::PolyMatrix p({maxplus::Matrix(5, 5), a});
        if (!maxplus::is_irreducible(p)) continue;
        ++cases;
        double mu = maxplus::max_cycle_ratio(maxplus::build_precedence_graph(p)).ratio;
        double cmax = 0;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                if (!maxplus::is_eps(a(i, j))) cmax = std::max(cmax, std::abs(a(i, j)));
        Growth g = growth_rate(iterate(from_maxplus(a), std::vector<double>(5, 0.0), K));
        if (std::abs(g.mu - mu) > 2 * cmax / static_cast<double>(K)) ++bad;
    }
    ASSERT_GE(cases, 50);
    EXPECT_EQ(bad, 0u);
}

TEST(Growth, UncontrolledMetroDoesNotSettle) {
    metro::LineConfig cfg = metro::with_trains(small_line(), 2);
    auto dem = metro::DemandProfile::uniform(cfg, 15.0, 30.0, 500.0);
    auto x0 = metro::initial_departures(cfg, 1, 5.0);
    auto e200 = metro::simulate_headway(cfg, metro::build_uncontrolled(cfg, dem), 200, x0);
    auto e800 = metro::simulate_headway(cfg, metro::build_uncontrolled(cfg, dem), 800, x0);
    EXPECT_FALSE(e800.converged);
    EXPECT_GT(e800.spread, e200.spread);
    EXPECT_GT(e800.h, e200.h);
}

TEST(Growth, SpreadShrinksForConnectedStochasticSystems) {
    testgen::Rng r(15);
    int checked = 0;
    for (int k = 0; k < 200 && checked < 20; ++k) {
        DPDynamics d = random_stochastic(r, 5);
        if (!dp::is_strongly_connected(map_graph(d))) continue;
        ++checked;
        auto x0 = random_vec(r, 5);
        Growth a = growth_rate(iterate(d, x0, 500)), b = growth_rate(iterate(d, x0, 2000));
        EXPECT_LE(b.spread, a.spread / 2 + 1e-9);
    }
    EXPECT_GE(checked, 10);
}

TEST(MapGraph, DiagonalGivesSelfLoops) {
    DPDynamics d = DPDynamics::make(3, 1, Sense::max);
    for (std::size_t i = 0; i < 3; ++i) d.action(0).M[i] = {{i, 1.0}};
    auto g = map_graph(d);
    EXPECT_EQ(g.arcs.size(), 3u);
    for (auto& a : g.arcs) EXPECT_EQ(a.from, a.to);
    EXPECT_FALSE(dp::is_strongly_connected(g));
}

TEST(MapGraph, MetroIsStronglyConnected) {
    testgen::Rng r(16);
    for (int k = 0; k < 30; ++k) {
        metro::LineConfig cfg = testgen::line(r, 3, 20);
        auto dem = metro::DemandProfile::uniform(cfg, 1.0, 30.0, 500.0);
        auto p = metro::fix_params(cfg, dem, cfg.m());
        EXPECT_TRUE(dp::is_strongly_connected(map_graph(metro::build_controlled(cfg, p))));
    }
}

TEST(MapGraph, RingCarFollowingIsStronglyConnected) {
    using namespace tropnet::carfollow;
    for (std::size_t m : {1u, 3u, 5u}) {
        Scenario s{RoadKind::ring, 12, 10.0, 0.0};
        DPDynamics d = build_dynamics(s, {m, 0.0}, saturating_law(0.5, 7.0, 7.5));
        EXPECT_TRUE(dp::is_strongly_connected(map_graph(d)));
    }
}

TEST(Properties, HomogeneityMonotonicityNonexpansiveness) {
    testgen::Rng r(17);
    for (int k = 0; k < 500; ++k) {
        Sense s = k % 3 == 0 ? Sense::max : k % 3 == 1 ? Sense::min : Sense::minmax;
        DPDynamics d = random_stochastic(r, 6, s, 2);
        auto x = random_vec(r, 6), y = random_vec(r, 6);
        double c = testgen::uniform(r, -20, 20);
        auto fx = one_step(d, x);
        std::vector<double> xc = x;
        for (double& v : xc) v += c;
        auto fxc = one_step(d, xc);
        for (std::size_t i = 0; i < 6; ++i) ASSERT_NEAR(fxc[i], fx[i] + c, 1e-9);
        std::vector<double> hi = x;
        for (std::size_t i = 0; i < 6; ++i) hi[i] = std::max(x[i], y[i]);
        auto fhi = one_step(d, hi);
        for (std::size_t i = 0; i < 6; ++i) ASSERT_LE(fx[i], fhi[i] + 1e-9);
        auto fy = one_step(d, y);
        double dx = 0, df = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            dx = std::max(dx, std::abs(x[i] - y[i]));
            df = std::max(df, std::abs(fx[i] - fy[i]));
        }
        ASSERT_LE(df, dx + 1e-9);
    }
}
