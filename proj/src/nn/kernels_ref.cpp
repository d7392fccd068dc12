#include "gocollab/nn/kernels.hpp"

// Textbook loops, no tiling, no pragmas. Kept as the correctness oracle for
// the parallel kernels.

namespace gocollab::nn::kernels::ref {

void conv2d_forward(const double* x, int h, int w, int c_in,
                    const double* wts, int k, int c_out, const double* bias,
                    double* out) {
    const int pad = k / 2;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            for (int co = 0; co < c_out; ++co) {
                double acc = bias ? bias[co] : 0.0;
                for (int kr = 0; kr < k; ++kr) {
                    for (int kc = 0; kc < k; ++kc) {
                        const int ir = r + kr - pad;
                        const int ic = c + kc - pad;
                        if (ir < 0 || ir >= h || ic < 0 || ic >= w) continue;
                        for (int ci = 0; ci < c_in; ++ci) {
                            acc += x[(static_cast<std::size_t>(ir) * w + ic) * c_in + ci] *
                                   wts[((static_cast<std::size_t>(kr) * k + kc) * c_in + ci) * c_out + co];
                        }
                    }
                }
                out[(static_cast<std::size_t>(r) * w + c) * c_out + co] = acc;
            }
        }
    }
}

void conv2d_input_grad(const double* dy, int h, int w, int c_out,
                       const double* wts, int k, int c_in, double* dx) {
    const int pad = k / 2;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            for (int ci = 0; ci < c_in; ++ci) {
                double acc = 0.0;
                for (int kr = 0; kr < k; ++kr) {
                    for (int kc = 0; kc < k; ++kc) {
                        const int orow = r - (kr - pad);
                        const int ocol = c - (kc - pad);
                        if (orow < 0 || orow >= h || ocol < 0 || ocol >= w) continue;
                        for (int co = 0; co < c_out; ++co) {
                            acc += dy[(static_cast<std::size_t>(orow) * w + ocol) * c_out + co] *
                                   wts[((static_cast<std::size_t>(kr) * k + kc) * c_in + ci) * c_out + co];
                        }
                    }
                }
                dx[(static_cast<std::size_t>(r) * w + c) * c_in + ci] = acc;
            }
        }
    }
}

void conv2d_weight_grad(const double* x, int h, int w, int c_in,
                        const double* dy, int c_out, int k,
                        double* dw, double* db) {
    const int pad = k / 2;
    for (int kr = 0; kr < k; ++kr) {
        for (int kc = 0; kc < k; ++kc) {
            for (int ci = 0; ci < c_in; ++ci) {
                for (int co = 0; co < c_out; ++co) {
                    double acc = 0.0;
                    for (int r = 0; r < h; ++r) {
                        for (int c = 0; c < w; ++c) {
                            const int ir = r + kr - pad;
                            const int ic = c + kc - pad;
                            if (ir < 0 || ir >= h || ic < 0 || ic >= w) continue;
                            acc += x[(static_cast<std::size_t>(ir) * w + ic) * c_in + ci] *
                                   dy[(static_cast<std::size_t>(r) * w + c) * c_out + co];
                        }
                    }
                    dw[((static_cast<std::size_t>(kr) * k + kc) * c_in + ci) * c_out + co] = acc;
                }
            }
        }
    }
    if (db) {
        for (int co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c)
                    acc += dy[(static_cast<std::size_t>(r) * w + c) * c_out + co];
            db[co] = acc;
        }
    }
}

void fc_forward(const double* x, int n_in, const double* wts,
                const double* bias, int n_out, double* out) {
    for (int o = 0; o < n_out; ++o) {
        double acc = bias ? bias[o] : 0.0;
        for (int i = 0; i < n_in; ++i) acc += wts[static_cast<std::size_t>(o) * n_in + i] * x[i];
        out[o] = acc;
    }
}

void fc_input_grad(const double* dy, int n_out, const double* wts, int n_in,
                   double* dx) {
    for (int i = 0; i < n_in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < n_out; ++o) acc += dy[o] * wts[static_cast<std::size_t>(o) * n_in + i];
        dx[i] = acc;
    }
}

void fc_weight_grad(const double* x, int n_in, const double* dy, int n_out,
                    double* dw, double* db) {
    for (int o = 0; o < n_out; ++o) {
        for (int i = 0; i < n_in; ++i) dw[static_cast<std::size_t>(o) * n_in + i] = dy[o] * x[i];
        if (db) db[o] = dy[o];
    }
}

}  // namespace gocollab::nn::kernels::ref
