// Timing comparison of the OpenMP kernels against their serial references.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "expanse/flow_zoo.hpp"
#include "expanse/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace expanse;

namespace {

template <typename F>
double time_ms(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "match" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    std::printf("%-28s %13s %13s\n", "kernel", "serial", "parallel");

    {  // pointwise functional reduction over a large sphere mesh
        const auto mesh = mesh_points(Space::unit_sphere(), 2'000'000);
        const auto& f = zoo::get("sphere_ns");
        auto fun = [&](const Vec& p) {
            const double d = std::min(euclid(p, Vec(0, 0, 1)), euclid(p, Vec(0, 0, -1)));
            const double s = f.field.value(p).norm();
            return s > 0 ? d / s : -std::numeric_limits<double>::infinity();
        };
        kernels::Extremum rs, rp;
        const double ts = time_ms([&] { rs = kernels::max_over_serial(mesh, fun); });
        const double tp = time_ms([&] { rp = kernels::max_over(mesh, fun); });
        row("speed-ratio max, 2M pts", ts, tp, rs.value == rp.value && rs.index == rp.index);
    }

    {  // exact pairwise diameter
        std::mt19937_64 rng(5u);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<Vec> pts;
        for (int i = 0; i < 4000; ++i) pts.emplace_back(u(rng), u(rng));
        const Space plane = Space::plane(2);
        kernels::PairExtremum rs, rp;
        const double ts =
            time_ms([&] { rs = kernels::max_pairwise_distance_serial(plane, pts); });
        const double tp = time_ms([&] { rp = kernels::max_pairwise_distance(plane, pts); });
        row("pairwise diameter, 4k pts", ts, tp,
            rs.value == rp.value && rs.i == rp.i && rs.j == rp.j);
    }

    {  // per-point orbit integration (displacement floor)
        const auto& ann = zoo::get("annulus_periodic");
        const auto mesh = mesh_points(ann.space, 20000);
        double xs = 0, xp = 0;
        const double ts = time_ms([&] { xs = xi_estimate_serial(ann, 0.1, mesh); });
        const double tp = time_ms([&] { xp = xi_estimate(ann, 0.1, mesh); });
        row("displacement floor, 20k", ts, tp, xs == xp);
    }
    return 0;
}
