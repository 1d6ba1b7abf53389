#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "tropnet/runner.hpp"
#include "tropnet/scenario.hpp"

using namespace tropnet;

namespace {

const std::string kDir = TROPNET_SCENARIO_DIR;

scenario::Scenario bundled(const std::string& name) { return scenario::load(kDir + "/" + name + ".scenario"); }

const runner::Table& table(const runner::Result& r, const std::string& file) {
    for (auto& t : r.tables)
        if (t.file == file) return t;
    throw std::runtime_error("missing table " + file);
}

std::size_t column(const runner::Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    throw std::runtime_error("missing column " + name);
}

}  // namespace

TEST(ScenarioFiles, OneBundledFilePerKind) {
    std::set<std::string> seen;
    for (auto& e : std::filesystem::directory_iterator(kDir))
        if (e.path().extension() == ".scenario") seen.insert(scenario::load(e.path()).kind);
    for (auto& k : scenario::kinds()) EXPECT_TRUE(seen.count(k)) << k;
}

TEST(ScenarioFiles, MalformedFileIsASchemaError) {
    EXPECT_THROW(scenario::load(std::filesystem::path(kDir).parent_path() / "tests/data/malformed.scenario"),
                 SchemaError);
}

TEST(ScenarioFiles, SchemaErrorsNameTheKey) {
    auto msg = [](const std::string& text) {
        try {
            scenario::parse(text);
        } catch (const SchemaError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(msg(R"({"kind": "nope"})").find("$.kind"), std::string::npos);
    EXPECT_NE(msg(R"({"kind": "metro-phases"})").find("$.line"), std::string::npos);
    EXPECT_NE(msg(R"({"kind": "metro-phases", "line": {"inter_station_m": [1], "speed": 3}})").find("speed"),
              std::string::npos);
    EXPECT_NE(msg(R"({"kind": "road-bounds", "section": {"length": "x"}})").find("$.section.length"),
              std::string::npos);
    EXPECT_NE(msg("{not json").find("not valid JSON"), std::string::npos);
    EXPECT_NE(msg(R"({"kind": "validate", "extra": 1})").find("extra"), std::string::npos);
    EXPECT_NE(msg(R"({"kind": "road-bounds", "section": {"length": 200, "v": 28, "w": 7, "q_max": 0.5,
                     "n_max": 20, "n": 30}})")
                  .find("occupancy"),
              std::string::npos);
}

TEST(Runner, Line14PhaseRow) {
    runner::Result r = runner::run(bundled("line14"));
    const runner::Table& t = table(r, "phases.csv");
    const std::size_t cm = column(t, "m"), ch = column(t, "h_s");
    bool found = false;
    for (auto& row : t.rows)
        if (row[cm] == "21") {
            EXPECT_NEAR(std::stod(row[ch]), 72.0, 1.0);
            found = true;
        }
    EXPECT_TRUE(found);
    EXPECT_EQ(table(r, "summary.csv").rows[0][column(table(r, "summary.csv"), "m_opt")], "21");
}

TEST(Runner, ReferenceSectionRateLatencyTable) {
    runner::Result r = runner::run(bundled("reference-section"));
    const runner::Table& t = table(r, "rate_latency.csv");
    ASSERT_EQ(t.rows.size(), 4u);
    const std::size_t ce = column(t, "entry"), cr = column(t, "rate_veh_per_s"), cl = column(t, "latency_s"),
                      co = column(t, "offset_veh");
    std::map<std::string, std::pair<double, double>> ref = {{"11", {7.14, 10}}, {"21", {35.71, 20}}, {"22", {28.57, 10}}};
    for (auto& row : t.rows) {
        EXPECT_NEAR(std::stod(row[cr]), 0.5, 0.01);
        auto it = ref.find(row[ce]);
        if (it == ref.end()) continue;
        EXPECT_LE(std::abs(std::stod(row[cl]) - it->second.first), 5.0);
        EXPECT_NEAR(std::stod(row[co]), it->second.second, 0.01);
    }
}

TEST(Runner, JunctionHasEightRegions) {
    runner::Result r = runner::run(bundled("junction"));
    EXPECT_EQ(table(r, "regions.csv").rows.size(), 8u);
}

TEST(Runner, OutputsAreDeterministic) {
    for (std::string name : {"line14", "junction", "reference-section", "demand-mp"}) {
        scenario::Scenario sc = bundled(name);
        runner::Result a = runner::run(sc), b = runner::run(sc);
        ASSERT_EQ(a.tables.size(), b.tables.size());
        for (std::size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(a.tables[i].csv(), b.tables[i].csv()) << name;
    }
    scenario::ValidateSpec small{10, 20, 2};
    EXPECT_EQ(runner::validate_suite(small, 9).tables[0].csv(), runner::validate_suite(small, 9).tables[0].csv());
}

TEST(Runner, EveryTableHasAHeader) {
    for (std::string name : {"line14", "junction", "reference-section", "demand-mp", "itinerary"})
        for (auto& t : runner::run(bundled(name)).tables) {
            EXPECT_FALSE(t.header.empty());
            for (auto& row : t.rows) EXPECT_EQ(row.size(), t.header.size()) << t.file;
        }
}

TEST(Runner, HorizonOverrideApplies) {
    runner::Overrides o;
    o.horizon = 30;
    runner::Result r = runner::run(bundled("reference-section"), o);
    EXPECT_EQ(table(r, "service.csv").rows.size(), 31u);
}

TEST(Runner, NonConvergenceIsReported) {
    scenario::Scenario sc = bundled("dp-surface");
    auto& s = std::get<scenario::SurfaceSpec>(sc.payload);
    s.m_lo = s.m_hi = 21;
    s.lambdas = {10};
    runner::Overrides o;
    o.iters = 4;
    runner::Result r = runner::run(sc, o);
    EXPECT_FALSE(r.converged);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Runner, SmallValidationPasses) {
    runner::Result r = runner::validate_suite({20, 20, 2}, 5);
    EXPECT_TRUE(r.checks_passed);
    EXPECT_EQ(r.tables[0].rows.size(), 7u);
}

TEST(Format, InfinityAndIntegers) {
    EXPECT_EQ(runner::fmt(inf), "inf");
    EXPECT_EQ(runner::fmt(-inf), "-inf");
    EXPECT_EQ(runner::fmt(-0.0), "0");
    EXPECT_EQ(runner::fmt(72.5), "72.5");
    EXPECT_EQ(runner::fmt(std::size_t{21}), "21");
}
