#pragma once

#include <cstddef>

// Dense compute kernels for stride-1 "same" (zero-padded) convolutions and
// fully-connected layers. Activations are (h, w, c) row-major, conv weights
// (k, k, c_in, c_out), fc weights (n_out, n_in).
//
// The kernels in gocollab::nn::kernels are OpenMP-parallel and are what the
// engine runs. Each output element is accumulated serially by exactly one
// thread, so results are bit-identical for any thread count. The ::ref
// namespace holds plain serial implementations kept as the test oracle;
// bench/ compares the two.

namespace gocollab::nn::kernels {

void conv2d_forward(const double* x, int h, int w, int c_in,
                    const double* wts, int k, int c_out, const double* bias,
                    double* out);

// dx(r,c,ci) = sum_{dr,dc,co} dy(r-dr, c-dc, co) * w(dr+p, dc+p, ci, co).
// Also the workhorse for contribution propagation through a conv layer.
void conv2d_input_grad(const double* dy, int h, int w, int c_out,
                       const double* wts, int k, int c_in, double* dx);

void conv2d_weight_grad(const double* x, int h, int w, int c_in,
                        const double* dy, int c_out, int k,
                        double* dw, double* db);

void fc_forward(const double* x, int n_in, const double* wts,
                const double* bias, int n_out, double* out);

void fc_input_grad(const double* dy, int n_out, const double* wts, int n_in,
                   double* dx);

void fc_weight_grad(const double* x, int n_in, const double* dy, int n_out,
                    double* dw, double* db);

namespace ref {

void conv2d_forward(const double* x, int h, int w, int c_in,
                    const double* wts, int k, int c_out, const double* bias,
                    double* out);

void conv2d_input_grad(const double* dy, int h, int w, int c_out,
                       const double* wts, int k, int c_in, double* dx);

void conv2d_weight_grad(const double* x, int h, int w, int c_in,
                        const double* dy, int c_out, int k,
                        double* dw, double* db);

void fc_forward(const double* x, int n_in, const double* wts,
                const double* bias, int n_out, double* out);

void fc_input_grad(const double* dy, int n_out, const double* wts, int n_in,
                   double* dx);

void fc_weight_grad(const double* x, int n_in, const double* dy, int n_out,
                    double* dw, double* db);

}  // namespace ref

}  // namespace gocollab::nn::kernels
