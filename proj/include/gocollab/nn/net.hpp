#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gocollab/rng.hpp"
#include "gocollab/tensor.hpp"

namespace gocollab::nn {

enum class LayerKind {
    Conv,         // stride-1, zero-padded "same", odd kernel
    Fc,
    BatchNorm,    // per-channel (gamma, sigma, mu, beta): y = gamma*(x-mu)/sigma + beta
    Relu,
    MaxPool,      // non-overlapping window, spatial dims must divide
    AvgPool,
    ResidualAdd,  // output = previous layer output + output of layer `source` (0 = input)
    Sigmoid,      // final layer only
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
    LayerKind kind{};
    int kernel = 0;        // Conv
    int out_channels = 0;  // Conv
    int out_dim = 0;       // Fc
    int window = 0;        // MaxPool / AvgPool
    int source = -1;       // ResidualAdd; layer index, 0 means network input

    static LayerSpec conv(int kernel, int out_channels);
    static LayerSpec fc(int out_dim);
    static LayerSpec batchnorm();
    static LayerSpec relu();
    static LayerSpec maxpool(int window);
    static LayerSpec avgpool(int window);
    static LayerSpec residual_add(int source);
    static LayerSpec sigmoid();
};

struct Shape {
    int rank = 0;
    int h = 0, w = 0, c = 0;  // rank 3
    int len = 0;              // rank 1
    static Shape grid(int h, int w, int c) { return {3, h, w, c, 0}; }
    static Shape vec(int n) { return {1, 0, 0, 0, n}; }
    std::size_t count() const {
        return rank == 3 ? static_cast<std::size_t>(h) * w * c : static_cast<std::size_t>(len);
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    int input_h = 0, input_w = 0, input_c = 0;
    bool scalar_output = false;

    int layer_count() const { return static_cast<int>(layers.size()); }
    Shape input_shape() const { return Shape::grid(input_h, input_w, input_c); }

    // Output shape of each layer; index l holds the shape of x^(l), l >= 1.
    // Index 0 is the input shape. Throws ConfigError on inconsistent chains.
    std::vector<Shape> shapes() const;

    // 1-based ordinal among Conv layers -> layer index (1-based, i.e. x^(l)).
    int conv_ordinal_to_layer(int ordinal) const;
    int conv_count() const;

    // Layer whose output carries the scalar value: the final Fc when the net
    // ends in Sigmoid, otherwise the last layer. 1-based.
    int value_layer() const;

    void validate() const;
};

// Residual value-network family used throughout: conv stem, `blocks` residual
// blocks of two 3x3 convs with batch-norm, global average pooling and a final
// fc. `out_dim` > 1 builds a vector head (used by the gating net).
NetworkSpec make_residual_net(int h, int w, int in_channels, int channels,
                              int blocks, int out_dim, bool final_sigmoid);

struct LayerParams {
    Tensor weight;  // Conv: (k, k, c_in, c_out); Fc: (n_out, n_in)
    Tensor bias;    // (c_out) / (n_out)
    Tensor gamma, sigma, mu, beta;  // BatchNorm, each (c)
    bool empty() const { return weight.empty() && gamma.empty(); }
};

struct Parameters {
    std::vector<LayerParams> layers;  // aligned with NetworkSpec::layers
    bool same_shapes(const Parameters& other) const;
};

Parameters init_params(const NetworkSpec& net, Rng& rng);

struct ForwardTrace {
    Tensor input;                             // x^(0)
    std::vector<Tensor> outputs;              // outputs[l-1] = x^(l)
    std::vector<std::vector<int>> pool_argmax;  // per layer; filled for MaxPool

    const Tensor& x(int l) const { return l == 0 ? input : outputs[static_cast<std::size_t>(l - 1)]; }
    int layer_count() const { return static_cast<int>(outputs.size()); }

    // pre-sigmoid scalar (scalar-output nets)
    double output() const;
    // value of the actual final layer (post-sigmoid when one is present)
    double final_value() const;

private:
    friend ForwardTrace forward_prefix(const NetworkSpec&, const Parameters&, const Tensor&, int);
    int value_layer_ = 0;
};

ForwardTrace forward(const NetworkSpec& net, const Parameters& params, const Tensor& input);

// Forward through the first `up_to_layer` layers only (1-based); the trace
// holds that many outputs. Used by batch-norm calibration.
ForwardTrace forward_prefix(const NetworkSpec& net, const Parameters& params,
                            const Tensor& input, int up_to_layer);

struct Gradients {
    std::vector<LayerParams> layers;  // same shapes as Parameters for trainable tensors
    Tensor d_input;
};

// Seeds d(scalar value) at the value layer (pre-sigmoid) and back-propagates.
Gradients backward_gradients(const NetworkSpec& net, const Parameters& params,
                             const ForwardTrace& trace, double d_output);

// General form: seeds an arbitrary cotangent at the final layer's output.
Gradients backward_gradients(const NetworkSpec& net, const Parameters& params,
                             const ForwardTrace& trace, const Tensor& d_final);

// Fold batch-norm into the preceding linear map:
//   w_j <- gamma*w_j/sigma,  b <- gamma*(b - mu)/sigma + beta.
// Throws on sigma <= 0.
void absorb_batchnorm(Tensor& weight, Tensor& bias, const Tensor& gamma,
                      const Tensor& sigma, const Tensor& mu, const Tensor& beta);

// View of the network with every conv+batchnorm pair fused into one linear
// unit. Boundaries are the layer indices whose activations survive fusion;
// a fused unit's output boundary is the batch-norm's layer index.
struct FoldedUnit {
    LayerKind kind{};
    int in_boundary = 0;   // x^(l) consumed
    int out_boundary = 0;  // x^(l) produced
    int spec_layer = 0;    // index of the underlying layer (conv index for fused pairs)
    Tensor weight, bias;   // Conv / Fc (folded where applicable)
    int kernel = 0, window = 0;
    int skip_boundary = -1;  // ResidualAdd
};

struct FoldedNetwork {
    std::vector<FoldedUnit> units;
    bool is_boundary(int layer) const;
    // Fused output boundary for a conv layer index (the bn index when fused).
    int boundary_for(int layer) const;
};

FoldedNetwork fold_network(const NetworkSpec& net, const Parameters& params);

}  // namespace gocollab::nn
