// Times the OpenMP kernels against the serial reference at a few layer sizes
// and checks they agree. Build target: gocollab_bench.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gocollab/nn/kernels.hpp"
#include "gocollab/rng.hpp"

using namespace gocollab;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ConvCase {
    int h, w, c_in, c_out, k;
};

void fill_random(std::vector<double>& v, Rng& rng) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
}

void bench_conv(const ConvCase& cc, int reps) {
    Rng rng(42);
    std::vector<double> x(static_cast<std::size_t>(cc.h) * cc.w * cc.c_in);
    std::vector<double> w(static_cast<std::size_t>(cc.k) * cc.k * cc.c_in * cc.c_out);
    std::vector<double> b(static_cast<std::size_t>(cc.c_out));
    std::vector<double> out_par(static_cast<std::size_t>(cc.h) * cc.w * cc.c_out);
    std::vector<double> out_ref(out_par.size());
    fill_random(x, rng);
    fill_random(w, rng);
    fill_random(b, rng);

    const double flops = 2.0 * cc.h * cc.w * cc.c_in * cc.c_out * cc.k * cc.k * reps;

    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i)
        nn::kernels::ref::conv2d_forward(x.data(), cc.h, cc.w, cc.c_in, w.data(), cc.k,
                                         cc.c_out, b.data(), out_ref.data());
    const double t_ref = seconds_since(t0);

    t0 = Clock::now();
    for (int i = 0; i < reps; ++i)
        nn::kernels::conv2d_forward(x.data(), cc.h, cc.w, cc.c_in, w.data(), cc.k, cc.c_out,
                                    b.data(), out_par.data());
    const double t_par = seconds_since(t0);

    double max_diff = 0.0;
    for (std::size_t i = 0; i < out_par.size(); ++i)
        max_diff = std::max(max_diff, std::abs(out_par[i] - out_ref[i]));

    std::printf("conv %2dx%-2d cin=%-3d cout=%-3d k=%d | ref %7.2f ms (%5.2f GF/s) | omp %7.2f ms (%5.2f GF/s) | x%.2f | maxdiff %.1e\n",
                cc.h, cc.w, cc.c_in, cc.c_out, cc.k, 1e3 * t_ref, flops / t_ref * 1e-9,
                1e3 * t_par, flops / t_par * 1e-9, t_ref / t_par, max_diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled\n");
#endif
    bench_conv({9, 9, 32, 32, 3}, 2000);
    bench_conv({9, 9, 2, 32, 3}, 2000);
    bench_conv({7, 7, 16, 16, 3}, 2000);
    bench_conv({19, 19, 64, 64, 3}, 200);
    bench_conv({32, 32, 64, 64, 3}, 100);
    return 0;
}
