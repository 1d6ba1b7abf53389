// Speed variance of a 100-car platoon behind a leader that slows down twice.

#include <cstdio>

#include "tropnet/carfollow.hpp"

using namespace tropnet;

int main() {
    carfollow::Benchmark b;
    std::printf("%6s %16s %16s\n", "leaders", "speed variance", "accel variance");
    for (std::size_t m : {1u, 2u, 5u, 10u, 20u}) {
        auto t = carfollow::transient_metrics(carfollow::run_benchmark(b, {m, 0.0}));
        std::printf("%6zu %16.4f %16.4f\n", m, t.speed_variance, t.accel_variance);
    }
    carfollow::Scenario ring{carfollow::RoadKind::ring, 20, 12.0, 0.0};
    auto st = carfollow::stationary_ring(ring, {5, 0.0}, b.law);
    std::printf("ring of 20 at gap 12 m: stationary speed %.3f m/step\n", st.v);
}
