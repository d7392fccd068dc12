#include "gocollab/nn/kernels.hpp"

#include <vector>

// Parallelization is over independent output elements only: no atomics, no
// cross-thread reductions, so every value is accumulated in a fixed serial
// order and results do not depend on the thread count.

namespace gocollab::nn::kernels {

namespace {
// below this many multiply-adds the fork/join overhead dominates
constexpr long kParGrain = 32768;
}

void conv2d_forward(const double* x, int h, int w, int c_in,
                    const double* wts, int k, int c_out, const double* bias,
                    double* out) {
    const int pad = k / 2;
    const long work = static_cast<long>(h) * w * c_in * c_out * k * k;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int r = 0; r < h; ++r) {
        std::vector<double> acc(static_cast<std::size_t>(c_out));
        for (int c = 0; c < w; ++c) {
            for (int co = 0; co < c_out; ++co) acc[co] = bias ? bias[co] : 0.0;
            const int kr0 = pad - r > 0 ? pad - r : 0;
            const int kr1 = k < h + pad - r ? k : h + pad - r;
            const int kc0 = pad - c > 0 ? pad - c : 0;
            const int kc1 = k < w + pad - c ? k : w + pad - c;
            for (int kr = kr0; kr < kr1; ++kr) {
                const int ir = r + kr - pad;
                for (int kc = kc0; kc < kc1; ++kc) {
                    const int ic = c + kc - pad;
                    const double* xp = x + (static_cast<std::size_t>(ir) * w + ic) * c_in;
                    const double* wp = wts + (static_cast<std::size_t>(kr) * k + kc) * c_in * c_out;
                    for (int ci = 0; ci < c_in; ++ci) {
                        const double xv = xp[ci];
                        const double* wrow = wp + static_cast<std::size_t>(ci) * c_out;
                        for (int co = 0; co < c_out; ++co) acc[co] += xv * wrow[co];
                    }
                }
            }
            double* op = out + (static_cast<std::size_t>(r) * w + c) * c_out;
            for (int co = 0; co < c_out; ++co) op[co] = acc[co];
        }
    }
}

void conv2d_input_grad(const double* dy, int h, int w, int c_out,
                       const double* wts, int k, int c_in, double* dx) {
    const int pad = k / 2;
    const long work = static_cast<long>(h) * w * c_in * c_out * k * k;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int r = 0; r < h; ++r) {
        std::vector<double> acc(static_cast<std::size_t>(c_in));
        for (int c = 0; c < w; ++c) {
            for (int ci = 0; ci < c_in; ++ci) acc[ci] = 0.0;
            for (int kr = 0; kr < k; ++kr) {
                const int orow = r - (kr - pad);
                if (orow < 0 || orow >= h) continue;
                for (int kc = 0; kc < k; ++kc) {
                    const int ocol = c - (kc - pad);
                    if (ocol < 0 || ocol >= w) continue;
                    const double* dyp = dy + (static_cast<std::size_t>(orow) * w + ocol) * c_out;
                    const double* wp = wts + (static_cast<std::size_t>(kr) * k + kc) * c_in * c_out;
                    for (int ci = 0; ci < c_in; ++ci) {
                        const double* wrow = wp + static_cast<std::size_t>(ci) * c_out;
                        double s = 0.0;
                        for (int co = 0; co < c_out; ++co) s += dyp[co] * wrow[co];
                        acc[ci] += s;
                    }
                }
            }
            double* dxp = dx + (static_cast<std::size_t>(r) * w + c) * c_in;
            for (int ci = 0; ci < c_in; ++ci) dxp[ci] = acc[ci];
        }
    }
}

void conv2d_weight_grad(const double* x, int h, int w, int c_in,
                        const double* dy, int c_out, int k,
                        double* dw, double* db) {
    const int pad = k / 2;
    const int slots = k * k * c_in;
    const long work = static_cast<long>(h) * w * c_in * c_out * k * k;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int slot = 0; slot < slots; ++slot) {
        const int kr = slot / (k * c_in);
        const int kc = (slot / c_in) % k;
        const int ci = slot % c_in;
        std::vector<double> acc(static_cast<std::size_t>(c_out), 0.0);
        for (int r = 0; r < h; ++r) {
            const int ir = r + kr - pad;
            if (ir < 0 || ir >= h) continue;
            for (int c = 0; c < w; ++c) {
                const int ic = c + kc - pad;
                if (ic < 0 || ic >= w) continue;
                const double xv = x[(static_cast<std::size_t>(ir) * w + ic) * c_in + ci];
                const double* dyp = dy + (static_cast<std::size_t>(r) * w + c) * c_out;
                for (int co = 0; co < c_out; ++co) acc[co] += xv * dyp[co];
            }
        }
        double* dwp = dw + static_cast<std::size_t>(slot) * c_out;
        for (int co = 0; co < c_out; ++co) dwp[co] = acc[co];
    }
    if (db) {
        for (int co = 0; co < c_out; ++co) db[co] = 0.0;
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double* dyp = dy + (static_cast<std::size_t>(r) * w + c) * c_out;
                for (int co = 0; co < c_out; ++co) db[co] += dyp[co];
            }
        }
    }
}

void fc_forward(const double* x, int n_in, const double* wts,
                const double* bias, int n_out, double* out) {
    const long work = static_cast<long>(n_in) * n_out;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int o = 0; o < n_out; ++o) {
        const double* wrow = wts + static_cast<std::size_t>(o) * n_in;
        double acc = bias ? bias[o] : 0.0;
        for (int i = 0; i < n_in; ++i) acc += wrow[i] * x[i];
        out[o] = acc;
    }
}

void fc_input_grad(const double* dy, int n_out, const double* wts, int n_in,
                   double* dx) {
    const long work = static_cast<long>(n_in) * n_out;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int i = 0; i < n_in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < n_out; ++o) acc += dy[o] * wts[static_cast<std::size_t>(o) * n_in + i];
        dx[i] = acc;
    }
}

void fc_weight_grad(const double* x, int n_in, const double* dy, int n_out,
                    double* dw, double* db) {
    const long work = static_cast<long>(n_in) * n_out;
#pragma omp parallel for schedule(static) if (work > kParGrain)
    for (int o = 0; o < n_out; ++o) {
        const double d = dy[o];
        double* dwrow = dw + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) dwrow[i] = d * x[i];
        if (db) db[o] = d;
    }
}

}  // namespace gocollab::nn::kernels
