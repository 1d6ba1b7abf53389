#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gen.hpp"
#include "tropnet/maxplus.hpp"
#include "tropnet/metro_line.hpp"

using namespace tropnet;
using namespace tropnet::metro;

namespace {

LineConfig two_segment() {
    LineConfig cfg;
    cfg.seg.push_back({2.0, 0.0, 1.0, 200.0, false, 1});
    cfg.seg.push_back({2.0, 0.0, 1.0, 200.0, false, 0});
    return cfg;
}

PhysicalLine line14() {
    PhysicalLine p;
    p.inter_station_m = {618, 712, 1359, 2499, 624, 970, 947, 713};
    return p;
}

double spectral(const maxplus::PolyMatrix& a) {
    return maxplus::max_cycle_ratio(maxplus::build_precedence_graph(a)).ratio;
}

DemandConfig demand_for(const LineConfig& cfg, double lambda, double alpha) {
    DemandConfig d;
    for (auto& s : cfg.seg) {
        PlatformDemand p;
        p.run_nominal = s.run + s.dwell;
        p.run_min = s.run;
        if (s.platform) {
            p.lambda_in = p.lambda_out = lambda;
            p.alpha_in = p.alpha_out = alpha;
            p.g_max = s.run + s.sep + 20.0;
        }
        d.node.push_back(p);
    }
    return d;
}

JunctionConfig junction(std::size_t m0, std::size_t m1, std::size_t m2) {
    JunctionConfig c;
    c.part[0] = {20, m0, 20 * 60.0, 20 * 30.0, 90.0};
    c.part[1] = {10, m1, 10 * 60.0, 10 * 30.0, 90.0};
    c.part[2] = {10, m2, 10 * 60.0, 10 * 30.0, 90.0};
    return c;
}

}  // namespace

TEST(LinePolyMatrix, TwoSegmentLine) {
    maxplus::PolyMatrix a = build_line_polymatrix(two_segment());
    EXPECT_EQ(a.rows(), 2u);
    EXPECT_EQ(a.degree(), 1u);
    std::size_t entries = 0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            bool any = false;
            for (std::size_t l = 0; l <= a.degree(); ++l) any = any || !maxplus::is_eps(a.coeff(l)(i, j));
            entries += any ? 1 : 0;
        }
    EXPECT_EQ(entries, 2u);
    EXPECT_NEAR(spectral(a), 4.0, 1e-9);
}

TEST(LinePolyMatrix, DegenerateLinesRejected) {
    LineConfig cfg = two_segment();
    EXPECT_THROW(build_line_polymatrix(with_trains(cfg, 2)), StructureError);
    EXPECT_THROW(build_line_polymatrix(with_trains(cfg, 0)), StructureError);
    EXPECT_TRUE(std::isinf(headway_closed_form(cfg, 0)));
    EXPECT_TRUE(std::isinf(headway_closed_form(cfg, 2)));
}

TEST(LinePolyMatrix, DoubleRingStructure) {
    testgen::Rng r(21);
    for (int k = 0; k < 20; ++k) {
        LineConfig cfg = testgen::line(r, 3, 20);
        auto g = maxplus::build_precedence_graph(build_line_polymatrix(cfg));
        EXPECT_EQ(g.arcs.size(), 2 * cfg.n());
        std::size_t fw = 0, bw = 0;
        for (auto& a : g.arcs) {
            if (a.to == (a.from + 1) % cfg.n()) ++fw;
            if (a.from == (a.to + 1) % cfg.n()) ++bw;
        }
        EXPECT_EQ(fw, cfg.n());
        EXPECT_EQ(bw, cfg.n());
        EXPECT_TRUE(maxplus::is_irreducible(build_line_polymatrix(cfg)));
    }
}

TEST(Headway, TwoSegmentClosedForm) { EXPECT_DOUBLE_EQ(headway_closed_form(two_segment(), 1), 4.0); }

TEST(Headway, ClosedFormMatchesSpectralSolver) {
    testgen::Rng r(22);
    for (int k = 0; k < 200; ++k) {
        LineConfig cfg = testgen::line(r, 2, 40);
        ASSERT_NEAR(headway_closed_form(cfg, cfg.m()), spectral(build_line_polymatrix(cfg)), 1e-9);
    }
}

TEST(Headway, PlateauAtMinimumHeadway) {
    LineConfig cfg = build_line_config(line14());
    const std::size_t m0 = optimal_trains(cfg);
    for (std::size_t m = m0; m < cfg.n() && headway_closed_form(cfg, m) <= cfg.h_min() + 1e-12; ++m)
        EXPECT_DOUBLE_EQ(headway_closed_form(cfg, m), cfg.h_min());
}

TEST(Headway, SimulationGrowthMatchesClosedForm) {
    testgen::Rng r(23);
    const std::size_t K = 400;
    std::size_t bad = 0;
    for (int k = 0; k < 100; ++k) {
        LineConfig cfg = testgen::line(r, 2, 20);
        auto x = maxplus::simulate_maxplus(build_line_polymatrix(cfg), {std::vector<double>(cfg.n(), 0.0)}, K);
        double wmax = 0;
        for (std::size_t j = 0; j < cfg.n(); ++j) wmax = std::max({wmax, cfg.travel(j), cfg.seg[j].sep});
        const double h = headway_closed_form(cfg, cfg.m());
        for (std::size_t j = 0; j < cfg.n(); ++j)
            if (std::abs(x[K][j] / static_cast<double>(K) - h) > 2 * wmax / static_cast<double>(K)) {
                ++bad;
                break;
            }
    }
    EXPECT_EQ(bad, 0u);
}

TEST(Headway, SimulationGrowthWithinEigenvectorSpan) {
    testgen::Rng r(23);
    const std::size_t K = 400;
    for (int k = 0; k < 100; ++k) {
        LineConfig cfg = testgen::line(r, 2, 20);
        maxplus::PolyMatrix a = build_line_polymatrix(cfg);
        auto x = maxplus::simulate_maxplus(a, {std::vector<double>(cfg.n(), 0.0)}, K);
        const double h = headway_closed_form(cfg, cfg.m());
        auto v = maxplus::generalized_eigenvector(a, h);
        const double span = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
        for (std::size_t j = 0; j < cfg.n(); ++j)
            ASSERT_LE(std::abs(x[K][j] / static_cast<double>(K) - h), span / static_cast<double>(K) + 1e-9);
    }
}

TEST(Line14, ReconstructedLineShape) {
    LineConfig cfg = build_line_config(line14());
    EXPECT_EQ(cfg.n(), 88u);
    std::size_t plat = 0;
    for (auto& s : cfg.seg) plat += s.platform ? 1 : 0;
    EXPECT_EQ(plat, 18u);
    EXPECT_NEAR(cfg.length(), 2 * (618 + 712 + 1359 + 2499 + 624 + 970 + 947 + 713) + 2 * 205.0, 1e-6);
}

TEST(Line14, CapacityAndOptimalTrains) {
    LineConfig cfg = build_line_config(line14());
    EXPECT_NEAR(headway_closed_form(cfg, 21), 72.0, 1.0);
    EXPECT_EQ(optimal_trains(cfg), 21u);
    EXPECT_NEAR(3600.0 / cfg.h_min(), 50.0, 1.0);
    EXPECT_NEAR(spectral(build_line_polymatrix(with_trains(cfg, 21))), headway_closed_form(cfg, 21), 1e-9);
}

TEST(Kinematics, RunTimesAddUpToProfile) {
    auto t = kinematic_run_times(2499, 200, 22, 1.3, 0.85);
    EXPECT_EQ(t.size(), 12u);
    double sum = 0;
    for (double x : t) sum += x;
    const double expect = 22 / 1.3 + 22 / 0.85 + (2499 - 22 * 22 / 2.6 - 22 * 22 / 1.7) / 22;
    EXPECT_NEAR(sum, expect, 1e-9);
    auto s = kinematic_run_times(100, 200, 22, 1.3, 0.85);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s[0], std::sqrt(2 * 100 / (1 / 1.3 + 1 / 0.85)) * (1 / 1.3 + 1 / 0.85), 1e-9);
}

TEST(PhaseDiagram, InvariantsOnEveryPoint) {
    testgen::Rng r(24);
    for (int k = 0; k < 30; ++k) {
        LineConfig cfg = testgen::line(r, 3, 30);
        DiagramParams p = diagram_params(cfg);
        for (const PhasePoint& pt : phase_diagram(cfg, 1, cfg.n() - 1)) {
            ASSERT_NEAR(pt.h * pt.f, 1.0, 1e-12);
            ASSERT_NEAR(pt.w + pt.g, pt.h, 1e-9 * pt.h);
            ASSERT_NEAR(pt.h, headway_closed_form(cfg, pt.m), 1e-9 * pt.h);
            const double rho = pt.rho;
            ASSERT_NEAR(pt.f, std::min({rho / p.tau, 1 / p.h_min, (p.rho_bar - rho) / p.omega}), 1e-12);
        }
    }
}

TEST(PhaseDiagram, FreeFlowBranchIsLinear) {
    LineConfig cfg = build_line_config(line14());
    auto pts = phase_diagram(cfg, 1, 3);
    DiagramParams p = diagram_params(cfg);
    for (auto& pt : pts) {
        EXPECT_NEAR(pt.f, p.v * pt.rho, 1e-15);
        EXPECT_EQ(pt.phase, Phase::free_flow);
    }
}

TEST(PhaseDiagram, PhasesAppearInOrder) {
    LineConfig cfg = build_line_config(line14());
    auto pts = phase_diagram(cfg, 1, cfg.n() - 1);
    std::set<Phase> seen;
    int last = 0;
    for (auto& pt : pts) {
        EXPECT_GE(static_cast<int>(pt.phase), last);
        last = static_cast<int>(pt.phase);
        seen.insert(pt.phase);
    }
    EXPECT_EQ(seen.size(), 3u);
    EXPECT_STREQ(phase_name(Phase::max_frequency), "max-frequency");
}

TEST(Junction, BranchHeadwaysDouble) {
    for (std::size_t m0 = 0; m0 <= 20; m0 += 4)
        for (std::size_t m1 = 0; m1 <= 10; m1 += 3)
            for (std::size_t m2 = 0; m2 <= 10; m2 += 5) {
                JunctionResult r = junction_headway(junction(m0, m1, m2));
                if (std::isinf(r.h0)) continue;
                EXPECT_DOUBLE_EQ(r.h1, 2 * r.h0);
                EXPECT_DOUBLE_EQ(r.h2, 2 * r.h0);
                EXPECT_NEAR(r.f0, 1 / r.h0, 1e-15);
            }
}

TEST(Junction, SymmetricBranchesCollapse) {
    JunctionResult r = junction_headway(junction(4, 3, 3));
    EXPECT_DOUBLE_EQ(r.h_fw, (20 * 60.0 + 10 * 60.0) / 10.0);
}

TEST(Junction, EightBindingRegions) {
    std::set<JunctionTerm> seen;
    for (std::size_t m0 = 0; m0 <= 20; ++m0)
        for (std::size_t m1 = 0; m1 <= 10; ++m1)
            for (std::size_t m2 = 0; m2 <= 10; ++m2) seen.insert(junction_headway(junction(m0, m1, m2)).binding);
    EXPECT_EQ(seen.size(), 8u);
}

TEST(Junction, TrapezoidAlongZeroImbalance) {
    for (std::size_t k : {2u, 5u}) {
        std::vector<double> h;
        for (std::size_t m0 = 0; m0 <= 20; ++m0) h.push_back(junction_headway(junction(m0, k, k)).h0);
        std::size_t i = 0;
        while (i + 1 < h.size() && h[i + 1] <= h[i]) ++i;
        for (; i + 1 < h.size(); ++i) EXPECT_GE(h[i + 1], h[i]);
    }
}

TEST(Demand, NoDemandCollapsesToBaseModel) {
    testgen::Rng r(25);
    for (int k = 0; k < 50; ++k) {
        LineConfig cfg = testgen::line(r, 3, 20);
        DemandConfig d = demand_for(cfg, 0.0, 10.0);
        EXPECT_NEAR(demand_dependent_headway(cfg, d, cfg.m()).h, headway_closed_form(cfg, cfg.m()), 1e-9);
    }
}

TEST(Demand, HeadwayNondecreasingInDemand) {
    LineConfig cfg = with_trains(build_line_config(line14()), 21);
    double prev = 0;
    for (double lam = 0; lam < 4.9; lam += 0.25) {
        double h = demand_dependent_headway(cfg, demand_for(cfg, lam, 10.0), 21).h;
        EXPECT_GE(h, prev);
        prev = h;
    }
}

TEST(Demand, ClosedFormMatchesSpectralSolver) {
    testgen::Rng r(26);
    for (int k = 0; k < 100; ++k) {
        LineConfig cfg = testgen::line(r, 3, 30);
        DemandConfig d = demand_for(cfg, testgen::uniform(r, 0, 2.4), 5.0);
        ASSERT_NEAR(demand_dependent_headway(cfg, d, cfg.m()).h, spectral(build_demand_polymatrix(cfg, d)), 1e-9);
    }
}

TEST(Demand, SaturationRejected) {
    LineConfig cfg = with_trains(build_line_config(line14()), 21);
    EXPECT_THROW(demand_dependent_headway(cfg, demand_for(cfg, 5.0, 10.0), 21), RangeError);
}

TEST(Demand, MarginCondition) {
    LineConfig cfg = with_trains(build_line_config(line14()), 21);
    DemandConfig d = demand_for(cfg, 1.0, 10.0);
    EXPECT_TRUE(demand_dependent_headway(cfg, d, 21).conditions_ok);
    for (auto& p : d.node) p.run_min = p.run_nominal;
    EXPECT_FALSE(demand_dependent_headway(cfg, d, 21).conditions_ok);
}

TEST(DwellRun, ZeroDemand) {
    DwellRun o = dwell_run_laws(100, 0.0, {40, 30, 50, 60});
    EXPECT_EQ(o.w, 0);
    EXPECT_EQ(o.r, 50);
    EXPECT_EQ(o.t, 50);
}

TEST(DwellRun, CapBinds) {
    DwellRun o = dwell_run_laws(200, 0.5, {40, 30, 50, 60});
    EXPECT_EQ(o.w, 40);
}

TEST(DwellRun, TravelTimeIndependentOfHeadwayUnderMargin) {
    const double x = 0.2, g = 60, rn = 50;
    const double h_low = g / (1 - x);
    const DwellRunParams p{100, 20, rn, h_low};
    for (double h = h_low; h <= h_low + 100; h += 1.0) {
        DwellRun o = dwell_run_laws(h, x, p);
        EXPECT_NEAR(o.t, rn + x / (1 - x) * g, 1e-9);
    }
}
