#pragma once

#include <iosfwd>
#include <vector>

#include "gocollab/nn/net.hpp"

namespace gocollab::contrib {

// Per-unit share of the scalar output attributed to each activation of one
// layer. This is the second backward pass: a positive unit's contribution is
// split across its inputs in proportion to the signed products x_j * w_j;
// non-positive units distribute nothing.
struct ContributionMap {
    int layer = 0;   // x^(layer); 0 is the network input
    Tensor values;   // same shape as x^(layer)
};

// Flow bookkeeping per propagation step, dumped as CSV for audits.
struct LayerFlow {
    int layer = 0;            // boundary the step produced (input side)
    double sum_in = 0.0;      // mass arriving at the step's output side
    double sum_out = 0.0;     // mass passed to the input side
    double bias_absorbed = 0.0;
};

struct PropagationDiag {
    std::vector<LayerFlow> steps;
};

void write_flow_csv(const PropagationDiag& diag, std::ostream& os);

// C = 1 at the scalar value (pre-sigmoid when the net ends in sigmoid).
// Rejects vector-output networks.
ContributionMap init_output_contribution(const nn::NetworkSpec& net,
                                         const nn::ForwardTrace& trace);

// One linear unit o = sum_j x_j w_j + b shared by fc and conv (conv is the
// same rule through the sparse weight matrix):
//   C_{o_i -> x_j} = C_{o_i} * x_j w_j / (o_i + max(-b, 0))   if o_i > 0
//   C_{o_i -> x_j} = 0                                         otherwise
// For b >= 0 the residual C_{o_i} * b / o_i is absorbed by the bias and is
// reported through `bias_absorbed`.
Tensor propagate_linear_fc(const Tensor& c_out, const Tensor& weight, const Tensor& bias,
                           const Tensor& x, const Tensor& o, double* bias_absorbed = nullptr);

Tensor propagate_linear_conv(const Tensor& c_out, const Tensor& weight, const Tensor& bias,
                             const Tensor& x, const Tensor& o, int kernel,
                             double* bias_absorbed = nullptr);

// Pass-through where the pre-activation is positive, zero elsewhere.
Tensor propagate_relu(const Tensor& c_out, const Tensor& pre_activation);

// Maxpool routes each contribution to its argmax source (ties were resolved
// to the first element in scan order during the forward pass); avgpool splits
// equally across the window.
Tensor propagate_maxpool(const Tensor& c_out, const std::vector<int>& argmax,
                         const nn::Shape& in_shape);
Tensor propagate_avgpool(const Tensor& c_out, int window, const nn::Shape& in_shape);

// A unit fed from two paths accumulates both streams.
Tensor propagate_skip(const Tensor& a, const Tensor& b);

// Chains the per-layer rules from the scalar output down to x^(target_layer).
// Batch-norm layers are folded into their convs first; `target_layer` must be
// a surviving activation boundary (a conv index that was folded into its
// batch-norm resolves to the folded output).
ContributionMap propagate_to_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                                   const nn::ForwardTrace& trace, int target_layer,
                                   PropagationDiag* diag = nullptr);

// Same chaining, but starting from an arbitrary map seeded at its boundary
// (used for the masked collaboration maps).
ContributionMap propagate_map_to_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                                       const nn::ForwardTrace& trace, ContributionMap seed,
                                       int target_layer, PropagationDiag* diag = nullptr);

}  // namespace gocollab::contrib
