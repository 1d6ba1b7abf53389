// Headway and frequency of a 9-station loop as the fleet grows.

#include <cstdio>

#include "tropnet/metro_line.hpp"

using namespace tropnet;

int main() {
    metro::PhysicalLine p;
    p.inter_station_m = {618, 712, 1359, 2499, 624, 970, 947, 713};
    metro::LineConfig cfg = metro::build_line_config(p);
    std::printf("segments %zu, length %.0f m\n", cfg.n(), cfg.length());
    std::printf("%4s %10s %10s  %s\n", "m", "h (s)", "f (1/h)", "phase");
    for (auto& pt : metro::phase_diagram(cfg, 1, cfg.n() - 1))
        if (pt.m % 4 == 1 || pt.m == metro::optimal_trains(cfg))
            std::printf("%4zu %10.2f %10.2f  %s\n", pt.m, pt.h, pt.f * 3600, metro::phase_name(pt.phase));
    std::printf("optimal fleet: %zu trains\n", metro::optimal_trains(cfg));
}
