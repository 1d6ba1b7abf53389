// Service curves of one road section, free and signalized.

#include <cstdio>

#include "tropnet/road.hpp"

using namespace tropnet;

int main() {
    const double dt = 5.0;
    road::RoadSectionParams p{200, 28, 7, 0.5, 20, 10};
    CurveMatrix free = road::section_service_matrix(p, 60, dt);
    CurveMatrix sig = road::controlled_section_service(p, {60, 30, 30}, 60, dt);
    const char* name[2] = {"fw", "bw"};
    std::printf("%-6s %10s %12s %10s %12s\n", "entry", "rate/s", "latency s", "offset", "red latency");
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            RateLatency a = extract_rate_latency(free(i, j)), b = extract_rate_latency(sig(i, j));
            std::printf("%s-%s  %10.3f %12.1f %10.1f %12.1f\n", name[i], name[j], a.rate / dt, a.latency * dt,
                        a.offset, b.latency * dt);
        }
    Curve arrivals = curves::affine(0.4 * dt, 2, 60, dt);
    BoundResult r = bound_calculators(arrivals, free(0, 1));
    std::printf("arrivals 0.4 veh/s, burst 2: delay <= %.1f s, backlog <= %.1f veh\n", r.delay * dt, r.backlog);
}
