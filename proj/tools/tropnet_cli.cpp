#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tropnet/runner.hpp"
#include "tropnet/scenario.hpp"

#ifndef TROPNET_SCENARIO_DIR
#define TROPNET_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tropnet;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, check_failed = 1, usage = 2, no_convergence = 3, module_error = 4 };

std::string sha256(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void write_file(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
    if (!f) throw Error("cannot write " + p.string());
}

struct Flags {
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon, iters;
    bool quiet = false;

    runner::Overrides overrides() const { return {seed, horizon, iters}; }
};

int emit(const runner::Result& res, const fs::path& dir, const json& meta, double wall, bool quiet) {
    fs::create_directories(dir);
    json m = meta;
    m["tool"] = {{"name", "tropnet"}, {"version", kVersion}, {"compiler", __VERSION__}};
    m["wall_time_s"] = wall;
    m["artifacts"] = json::array();
    for (auto& t : res.tables) {
        std::string text = t.csv();
        write_file(dir / t.file, text);
        m["artifacts"].push_back({{"file", t.file}, {"sha256", sha256(text)}, {"rows", t.rows.size()}});
    }
    m["warnings"] = res.warnings;
    m["converged"] = res.converged;
    m["checks_passed"] = res.checks_passed;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    for (auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (!quiet) {
        for (auto& t : res.tables) std::cout << (dir / t.file).string() << " (" << t.rows.size() << " rows)\n";
        std::cout << (dir / "manifest.json").string() << "\n";
    }
    if (!res.converged) return no_convergence;
    if (!res.checks_passed) return check_failed;
    return ok;
}

int cmd_run(const std::string& file, const Flags& f) {
    scenario::Scenario sc;
    std::string text;
    try {
        text = scenario::read_file(file);
        sc = scenario::parse(text, file);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return usage;
    }
    const fs::path dir = f.out.empty() ? fs::path("out") / sc.name : fs::path(f.out);
    auto t0 = std::chrono::steady_clock::now();
    runner::Result res;
    try {
        res = runner::run(sc, f.overrides());
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return no_convergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return module_error;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta = {{"scenario", file}, {"name", sc.name}, {"kind", sc.kind}, {"input_sha256", sha256(text)},
                 {"seed", f.seed.value_or(sc.seed)}};
    if (f.horizon) meta["horizon_override"] = *f.horizon;
    if (f.iters) meta["iters_override"] = *f.iters;
    return emit(res, dir, meta, wall, f.quiet);
}

int cmd_validate(const Flags& f) {
    const std::uint64_t seed = f.seed.value_or(1);
    auto t0 = std::chrono::steady_clock::now();
    runner::Result res = runner::validate_suite({}, seed);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& row : res.tables[0].rows)
        std::cout << row[3] << "  " << row[1] << "/" << row[2] << "  " << row[0] << "\n";
    if (!f.out.empty()) return emit(res, f.out, {{"kind", "validate"}, {"seed", seed}}, wall, f.quiet);
    return res.checks_passed ? ok : check_failed;
}

int cmd_list(const std::string& dir) {
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
        for (auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".scenario") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (auto& p : files) {
        try {
            scenario::Scenario s = scenario::load(p);
            std::printf("%-20s %-18s %s\n", s.name.c_str(), s.kind.c_str(), p.string().c_str());
        } catch (const SchemaError& e) {
            std::printf("%-20s %-18s %s\n", p.stem().string().c_str(), "(invalid)", e.what());
        }
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-plus and min-plus analyses of metro lines, road networks and car-following"};
    app.require_subcommand(1);
    Flags f;
    std::string file, dir = TROPNET_SCENARIO_DIR;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--out", f.out, "output directory");
        c->add_option("--seed", f.seed, "seed for randomized checks");
        c->add_flag("--quiet", f.quiet, "print nothing on success");
    };
    CLI::App* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("file", file, "scenario file")->required();
    add_common(run);
    run->add_option("--horizon", f.horizon, "horizon in steps (road kinds)");
    run->add_option("--iters", f.iters, "iterations K (DP surface) or steps (car-following)");
    CLI::App* val = app.add_subcommand("validate", "run the cross-solver oracle suite");
    add_common(val);
    CLI::App* list = app.add_subcommand("list-scenarios", "list bundled scenarios");
    list->add_option("--dir", dir, "scenario directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }
    try {
        if (*run) return cmd_run(file, f);
        if (*val) return cmd_validate(f);
        if (*list) return cmd_list(dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return module_error;
    }
    return usage;
}
