#include "gocollab/nn/net.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

#include "gocollab/errors.hpp"
#include "gocollab/nn/kernels.hpp"

namespace gocollab::nn {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::Fc: return "fc";
        case LayerKind::BatchNorm: return "batchnorm";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::AvgPool: return "avgpool";
        case LayerKind::ResidualAdd: return "residual_add";
        case LayerKind::Sigmoid: return "sigmoid";
    }
    return "?";
}

LayerSpec LayerSpec::conv(int kernel, int out_channels) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.kernel = kernel;
    s.out_channels = out_channels;
    return s;
}
LayerSpec LayerSpec::fc(int out_dim) {
    LayerSpec s;
    s.kind = LayerKind::Fc;
    s.out_dim = out_dim;
    return s;
}
LayerSpec LayerSpec::batchnorm() { return LayerSpec{LayerKind::BatchNorm}; }
LayerSpec LayerSpec::relu() { return LayerSpec{LayerKind::Relu}; }
LayerSpec LayerSpec::maxpool(int window) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.window = window;
    return s;
}
LayerSpec LayerSpec::avgpool(int window) {
    LayerSpec s;
    s.kind = LayerKind::AvgPool;
    s.window = window;
    return s;
}
LayerSpec LayerSpec::residual_add(int source) {
    LayerSpec s;
    s.kind = LayerKind::ResidualAdd;
    s.source = source;
    return s;
}
LayerSpec LayerSpec::sigmoid() { return LayerSpec{LayerKind::Sigmoid}; }

std::string Shape::str() const {
    std::ostringstream os;
    if (rank == 3)
        os << "(" << h << "," << w << "," << c << ")";
    else
        os << "(" << len << ")";
    return os.str();
}

std::vector<Shape> NetworkSpec::shapes() const {
    std::vector<Shape> out;
    out.reserve(layers.size() + 1);
    out.push_back(input_shape());
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const LayerSpec& ls = layers[li];
        const Shape& in = out.back();
        const int layer_no = static_cast<int>(li) + 1;
        auto fail = [&](const std::string& msg) {
            throw ConfigError("layer " + std::to_string(layer_no) + " (" +
                              layer_kind_name(ls.kind) + "): " + msg);
        };
        switch (ls.kind) {
            case LayerKind::Conv: {
                if (in.rank != 3) fail("conv requires a rank-3 input");
                if (ls.kernel <= 0 || ls.kernel % 2 == 0) fail("kernel must be odd and positive");
                if (ls.out_channels <= 0) fail("out_channels must be positive");
                out.push_back(Shape::grid(in.h, in.w, ls.out_channels));
                break;
            }
            case LayerKind::Fc: {
                if (ls.out_dim <= 0) fail("out_dim must be positive");
                out.push_back(Shape::vec(ls.out_dim));
                break;
            }
            case LayerKind::BatchNorm: {
                if (in.rank != 3) fail("batchnorm requires a rank-3 input");
                out.push_back(in);
                break;
            }
            case LayerKind::Relu: {
                out.push_back(in);
                break;
            }
            case LayerKind::MaxPool:
            case LayerKind::AvgPool: {
                if (in.rank != 3) fail("pooling requires a rank-3 input");
                if (ls.window <= 0) fail("window must be positive");
                if (in.h % ls.window != 0 || in.w % ls.window != 0)
                    fail("spatial dims " + in.str() + " not divisible by window " +
                         std::to_string(ls.window));
                out.push_back(Shape::grid(in.h / ls.window, in.w / ls.window, in.c));
                break;
            }
            case LayerKind::ResidualAdd: {
                if (ls.source < 0 || ls.source >= layer_no)
                    fail("source must name an earlier layer");
                if (!(out[static_cast<std::size_t>(ls.source)] == in))
                    fail("source shape " + out[static_cast<std::size_t>(ls.source)].str() +
                         " does not match " + in.str());
                out.push_back(in);
                break;
            }
            case LayerKind::Sigmoid: {
                if (layer_no != static_cast<int>(layers.size()))
                    fail("sigmoid may appear only as the final layer");
                if (in.rank != 1 || in.len != 1) fail("sigmoid head requires a scalar input");
                out.push_back(in);
                break;
            }
        }
    }
    return out;
}

int NetworkSpec::conv_count() const {
    int n = 0;
    for (const auto& l : layers)
        if (l.kind == LayerKind::Conv) ++n;
    return n;
}

int NetworkSpec::conv_ordinal_to_layer(int ordinal) const {
    int n = 0;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        if (layers[li].kind == LayerKind::Conv && ++n == ordinal)
            return static_cast<int>(li) + 1;
    }
    throw ConfigError("network has fewer than " + std::to_string(ordinal) + " conv layers");
}

int NetworkSpec::value_layer() const {
    int n = layer_count();
    if (n == 0) throw ConfigError("empty network");
    if (layers.back().kind == LayerKind::Sigmoid) return n - 1;
    return n;
}

void NetworkSpec::validate() const {
    const auto ss = shapes();
    if (scalar_output) {
        const int vl = value_layer();
        if (layers[static_cast<std::size_t>(vl - 1)].kind != LayerKind::Fc ||
            !(ss[static_cast<std::size_t>(vl)] == Shape::vec(1)))
            throw ConfigError("scalar-output network must end in fc(1), optionally + sigmoid");
    }
}

NetworkSpec make_residual_net(int h, int w, int in_channels, int channels,
                              int blocks, int out_dim, bool final_sigmoid) {
    NetworkSpec net;
    net.input_h = h;
    net.input_w = w;
    net.input_c = in_channels;
    net.layers.push_back(LayerSpec::conv(3, channels));
    net.layers.push_back(LayerSpec::batchnorm());
    net.layers.push_back(LayerSpec::relu());
    int block_in = static_cast<int>(net.layers.size());  // x^(block_in) feeds the block
    for (int b = 0; b < blocks; ++b) {
        net.layers.push_back(LayerSpec::conv(3, channels));
        net.layers.push_back(LayerSpec::batchnorm());
        net.layers.push_back(LayerSpec::relu());
        net.layers.push_back(LayerSpec::conv(3, channels));
        net.layers.push_back(LayerSpec::batchnorm());
        net.layers.push_back(LayerSpec::residual_add(block_in));
        net.layers.push_back(LayerSpec::relu());
        block_in = static_cast<int>(net.layers.size());
    }
    net.layers.push_back(LayerSpec::avgpool(h));  // global average over the board
    net.layers.push_back(LayerSpec::fc(out_dim));
    if (final_sigmoid) net.layers.push_back(LayerSpec::sigmoid());
    net.scalar_output = (out_dim == 1);
    net.validate();
    return net;
}

bool Parameters::same_shapes(const Parameters& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& a = layers[i];
        const auto& b = other.layers[i];
        if (a.weight.shape() != b.weight.shape() || a.bias.shape() != b.bias.shape() ||
            a.gamma.shape() != b.gamma.shape())
            return false;
    }
    return true;
}

Parameters init_params(const NetworkSpec& net, Rng& rng) {
    const auto ss = net.shapes();
    Parameters p;
    p.layers.resize(net.layers.size());
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& ls = net.layers[li];
        const Shape& in = ss[li];
        LayerParams& lp = p.layers[li];
        switch (ls.kind) {
            case LayerKind::Conv: {
                const int fan_in = ls.kernel * ls.kernel * in.c;
                const double std_dev = std::sqrt(2.0 / fan_in);
                lp.weight = Tensor::zeros({ls.kernel, ls.kernel, in.c, ls.out_channels});
                for (double& v : lp.weight.flat()) v = rng.normal(0.0, std_dev);
                lp.bias = Tensor::zeros1(ls.out_channels);
                break;
            }
            case LayerKind::Fc: {
                const int n_in = static_cast<int>(in.count());
                const double std_dev = std::sqrt(2.0 / n_in);
                lp.weight = Tensor::zeros({ls.out_dim, n_in});
                for (double& v : lp.weight.flat()) v = rng.normal(0.0, std_dev);
                lp.bias = Tensor::zeros1(ls.out_dim);
                break;
            }
            case LayerKind::BatchNorm: {
                lp.gamma = Tensor::zeros1(in.c);
                lp.gamma.fill(1.0);
                lp.sigma = Tensor::zeros1(in.c);
                lp.sigma.fill(1.0);
                lp.mu = Tensor::zeros1(in.c);
                lp.beta = Tensor::zeros1(in.c);
                break;
            }
            default:
                break;
        }
    }
    return p;
}

namespace {

void check_params_match(const NetworkSpec& net, const Parameters& params,
                        const std::vector<Shape>& ss) {
    if (params.layers.size() != net.layers.size())
        throw ConfigError("parameter layer count does not match network");
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& ls = net.layers[li];
        const LayerParams& lp = params.layers[li];
        const Shape& in = ss[li];
        switch (ls.kind) {
            case LayerKind::Conv:
                if (lp.weight.shape() != std::vector<int>{ls.kernel, ls.kernel, in.c, ls.out_channels} ||
                    lp.bias.shape() != std::vector<int>{ls.out_channels})
                    throw ConfigError("conv parameter shape mismatch at layer " + std::to_string(li + 1));
                break;
            case LayerKind::Fc:
                if (lp.weight.shape() != std::vector<int>{ls.out_dim, static_cast<int>(in.count())} ||
                    lp.bias.shape() != std::vector<int>{ls.out_dim})
                    throw ConfigError("fc parameter shape mismatch at layer " + std::to_string(li + 1));
                break;
            case LayerKind::BatchNorm:
                if (lp.gamma.shape() != std::vector<int>{in.c} || lp.sigma.shape() != std::vector<int>{in.c} ||
                    lp.mu.shape() != std::vector<int>{in.c} || lp.beta.shape() != std::vector<int>{in.c})
                    throw ConfigError("batchnorm parameter shape mismatch at layer " + std::to_string(li + 1));
                break;
            default:
                break;
        }
    }
}

Tensor make_for_shape(const Shape& s) {
    return s.rank == 3 ? Tensor::zeros3(s.h, s.w, s.c) : Tensor::zeros1(s.len);
}

}  // namespace

double ForwardTrace::output() const {
    const Tensor& t = x(value_layer_);
    if (t.rank() != 1 || t.length() != 1)
        throw ConfigError("output() requires a scalar-output network");
    return t.at(0);
}

double ForwardTrace::final_value() const {
    const Tensor& t = outputs.back();
    if (t.rank() != 1 || t.length() != 1)
        throw ConfigError("final_value() requires a scalar head");
    return t.at(0);
}

ForwardTrace forward(const NetworkSpec& net, const Parameters& params, const Tensor& input) {
    return forward_prefix(net, params, input, net.layer_count());
}

ForwardTrace forward_prefix(const NetworkSpec& net, const Parameters& params,
                            const Tensor& input, int up_to_layer) {
    const auto ss = net.shapes();
    check_params_match(net, params, ss);
    if (input.rank() != 3 || input.height() != net.input_h || input.width() != net.input_w ||
        input.channels() != net.input_c)
        throw ConfigError("input shape does not match network input " + ss[0].str());
    if (up_to_layer < 1 || up_to_layer > net.layer_count())
        throw ConfigError("forward_prefix: layer out of range");

    ForwardTrace tr;
    tr.input = input;
    tr.outputs.reserve(static_cast<std::size_t>(up_to_layer));
    tr.pool_argmax.resize(static_cast<std::size_t>(up_to_layer));
    tr.value_layer_ = net.value_layer();

    for (std::size_t li = 0; li < static_cast<std::size_t>(up_to_layer); ++li) {
        const LayerSpec& ls = net.layers[li];
        const LayerParams& lp = params.layers[li];
        const Tensor& in = tr.x(static_cast<int>(li));
        Tensor out = make_for_shape(ss[li + 1]);
        switch (ls.kind) {
            case LayerKind::Conv:
                kernels::conv2d_forward(in.data(), in.height(), in.width(), in.channels(),
                                        lp.weight.data(), ls.kernel, ls.out_channels,
                                        lp.bias.data(), out.data());
                break;
            case LayerKind::Fc:
                kernels::fc_forward(in.data(), static_cast<int>(in.size()), lp.weight.data(),
                                    lp.bias.data(), ls.out_dim, out.data());
                break;
            case LayerKind::BatchNorm: {
                const int c = in.channels();
                const std::size_t spatial = in.size() / static_cast<std::size_t>(c);
                for (int ch = 0; ch < c; ++ch) {
                    const double s = lp.sigma.at(ch);
                    if (!(s > 0.0)) throw ConfigError("batchnorm sigma must be positive");
                }
                const double* ip = in.data();
                double* op = out.data();
                for (std::size_t i = 0; i < spatial; ++i) {
                    for (int ch = 0; ch < c; ++ch) {
                        const std::size_t idx = i * static_cast<std::size_t>(c) + ch;
                        op[idx] = lp.gamma.at(ch) * (ip[idx] - lp.mu.at(ch)) / lp.sigma.at(ch) +
                                  lp.beta.at(ch);
                    }
                }
                break;
            }
            case LayerKind::Relu: {
                const double* ip = in.data();
                double* op = out.data();
                for (std::size_t i = 0; i < in.size(); ++i) op[i] = ip[i] > 0.0 ? ip[i] : 0.0;
                break;
            }
            case LayerKind::MaxPool: {
                const int p = ls.window;
                const int oh = out.height(), ow = out.width(), c = out.channels();
                auto& argmax = tr.pool_argmax[li];
                argmax.assign(out.size(), -1);
                for (int r = 0; r < oh; ++r) {
                    for (int cc = 0; cc < ow; ++cc) {
                        for (int ch = 0; ch < c; ++ch) {
                            double best = -std::numeric_limits<double>::infinity();
                            int best_idx = -1;
                            for (int dr = 0; dr < p; ++dr) {
                                for (int dc = 0; dc < p; ++dc) {
                                    const int ir = r * p + dr, ic = cc * p + dc;
                                    const double v = in.at(ir, ic, ch);
                                    if (v > best) {  // ties keep the first in scan order
                                        best = v;
                                        best_idx = (ir * in.width() + ic) * c + ch;
                                    }
                                }
                            }
                            out.at(r, cc, ch) = best;
                            argmax[(static_cast<std::size_t>(r) * ow + cc) * c + ch] = best_idx;
                        }
                    }
                }
                break;
            }
            case LayerKind::AvgPool: {
                const int p = ls.window;
                const int oh = out.height(), ow = out.width(), c = out.channels();
                const double inv = 1.0 / (p * p);
                for (int r = 0; r < oh; ++r)
                    for (int cc = 0; cc < ow; ++cc)
                        for (int ch = 0; ch < c; ++ch) {
                            double acc = 0.0;
                            for (int dr = 0; dr < p; ++dr)
                                for (int dc = 0; dc < p; ++dc)
                                    acc += in.at(r * p + dr, cc * p + dc, ch);
                            out.at(r, cc, ch) = acc * inv;
                        }
                break;
            }
            case LayerKind::ResidualAdd: {
                const Tensor& skip = tr.x(ls.source);
                const double* a = in.data();
                const double* b = skip.data();
                double* op = out.data();
                for (std::size_t i = 0; i < in.size(); ++i) op[i] = a[i] + b[i];
                break;
            }
            case LayerKind::Sigmoid: {
                out.at(0) = 1.0 / (1.0 + std::exp(-in.at(0)));
                break;
            }
        }
        tr.outputs.push_back(std::move(out));
    }
    return tr;
}

namespace {

// Shared reverse pass: d[l] accumulates the cotangent of x^(l).
Gradients run_backward(const NetworkSpec& net, const Parameters& params,
                       const ForwardTrace& trace, Tensor seed, int seed_layer) {
    const auto ss = net.shapes();
    check_params_match(net, params, ss);
    if (trace.layer_count() != net.layer_count())
        throw ConfigError("trace does not match network");

    std::vector<Tensor> d(net.layers.size() + 1);
    for (std::size_t l = 0; l < d.size(); ++l) d[l] = make_for_shape(ss[l]);
    d[static_cast<std::size_t>(seed_layer)] = std::move(seed);

    Gradients g;
    g.layers.resize(net.layers.size());

    for (int li = seed_layer - 1; li >= 0; --li) {
        const LayerSpec& ls = net.layers[static_cast<std::size_t>(li)];
        const LayerParams& lp = params.layers[static_cast<std::size_t>(li)];
        const Tensor& in = trace.x(li);
        const Tensor& dy = d[static_cast<std::size_t>(li + 1)];
        Tensor& dx = d[static_cast<std::size_t>(li)];
        LayerParams& gl = g.layers[static_cast<std::size_t>(li)];
        switch (ls.kind) {
            case LayerKind::Conv: {
                Tensor dxl = make_for_shape(ss[static_cast<std::size_t>(li)]);
                kernels::conv2d_input_grad(dy.data(), in.height(), in.width(), ls.out_channels,
                                           lp.weight.data(), ls.kernel, in.channels(), dxl.data());
                dx += dxl;
                gl.weight = Tensor::zeros(lp.weight.shape());
                gl.bias = Tensor::zeros(lp.bias.shape());
                kernels::conv2d_weight_grad(in.data(), in.height(), in.width(), in.channels(),
                                            dy.data(), ls.out_channels, ls.kernel,
                                            gl.weight.data(), gl.bias.data());
                break;
            }
            case LayerKind::Fc: {
                const int n_in = static_cast<int>(in.size());
                Tensor dxl = make_for_shape(ss[static_cast<std::size_t>(li)]);
                kernels::fc_input_grad(dy.data(), ls.out_dim, lp.weight.data(), n_in, dxl.data());
                dx += dxl;
                gl.weight = Tensor::zeros(lp.weight.shape());
                gl.bias = Tensor::zeros(lp.bias.shape());
                kernels::fc_weight_grad(in.data(), n_in, dy.data(), ls.out_dim,
                                        gl.weight.data(), gl.bias.data());
                break;
            }
            case LayerKind::BatchNorm: {
                // mu/sigma are frozen statistics; gradients flow to gamma/beta and x
                const int c = in.channels();
                gl.gamma = Tensor::zeros1(c);
                gl.beta = Tensor::zeros1(c);
                const std::size_t spatial = in.size() / static_cast<std::size_t>(c);
                const double* ip = in.data();
                const double* dyp = dy.data();
                double* dxp = dx.data();
                for (std::size_t i = 0; i < spatial; ++i) {
                    for (int ch = 0; ch < c; ++ch) {
                        const std::size_t idx = i * static_cast<std::size_t>(c) + ch;
                        const double xn = (ip[idx] - lp.mu.at(ch)) / lp.sigma.at(ch);
                        gl.gamma.at(ch) += dyp[idx] * xn;
                        gl.beta.at(ch) += dyp[idx];
                        dxp[idx] += dyp[idx] * lp.gamma.at(ch) / lp.sigma.at(ch);
                    }
                }
                break;
            }
            case LayerKind::Relu: {
                const double* ip = in.data();
                const double* dyp = dy.data();
                double* dxp = dx.data();
                for (std::size_t i = 0; i < in.size(); ++i)
                    dxp[i] += ip[i] > 0.0 ? dyp[i] : 0.0;
                break;
            }
            case LayerKind::MaxPool: {
                const auto& argmax = trace.pool_argmax[static_cast<std::size_t>(li)];
                const double* dyp = dy.data();
                double* dxp = dx.data();
                for (std::size_t i = 0; i < dy.size(); ++i) dxp[argmax[i]] += dyp[i];
                break;
            }
            case LayerKind::AvgPool: {
                const int p = ls.window;
                const Tensor& out = trace.x(li + 1);
                const int oh = out.height(), ow = out.width(), c = out.channels();
                const double inv = 1.0 / (p * p);
                for (int r = 0; r < oh; ++r)
                    for (int cc = 0; cc < ow; ++cc)
                        for (int ch = 0; ch < c; ++ch) {
                            const double v = dy.at(r, cc, ch) * inv;
                            for (int dr = 0; dr < p; ++dr)
                                for (int dc = 0; dc < p; ++dc)
                                    dx.at(r * p + dr, cc * p + dc, ch) += v;
                        }
                break;
            }
            case LayerKind::ResidualAdd: {
                dx += dy;
                d[static_cast<std::size_t>(ls.source)] += dy;
                break;
            }
            case LayerKind::Sigmoid: {
                const double s = trace.x(li + 1).at(0);
                dx.at(0) += dy.at(0) * s * (1.0 - s);
                break;
            }
        }
    }
    g.d_input = std::move(d[0]);
    return g;
}

}  // namespace

Gradients backward_gradients(const NetworkSpec& net, const Parameters& params,
                             const ForwardTrace& trace, double d_output) {
    const int vl = net.value_layer();
    Tensor seed = Tensor::scalar(d_output);
    return run_backward(net, params, trace, std::move(seed), vl);
}

Gradients backward_gradients(const NetworkSpec& net, const Parameters& params,
                             const ForwardTrace& trace, const Tensor& d_final) {
    if (!d_final.same_shape(trace.outputs.back()))
        throw ConfigError("d_final shape does not match network output");
    return run_backward(net, params, trace, d_final, net.layer_count());
}

void absorb_batchnorm(Tensor& weight, Tensor& bias, const Tensor& gamma,
                      const Tensor& sigma, const Tensor& mu, const Tensor& beta) {
    const int c_out = bias.length();
    if (gamma.length() != c_out || sigma.length() != c_out || mu.length() != c_out ||
        beta.length() != c_out)
        throw ConfigError("batchnorm channel count does not match conv output");
    for (int ch = 0; ch < c_out; ++ch) {
        if (!(sigma.at(ch) > 0.0))
            throw ConfigError("batchnorm sigma must be positive (channel " + std::to_string(ch) + ")");
    }
    // weight is (k, k, c_in, c_out): the out-channel is the innermost dim
    const std::size_t n = weight.size();
    double* wp = weight.data();
    for (std::size_t i = 0; i < n; ++i) {
        const int ch = static_cast<int>(i % static_cast<std::size_t>(c_out));
        wp[i] *= gamma.at(ch) / sigma.at(ch);
    }
    for (int ch = 0; ch < c_out; ++ch) {
        bias.at(ch) = gamma.at(ch) * (bias.at(ch) - mu.at(ch)) / sigma.at(ch) + beta.at(ch);
    }
}

bool FoldedNetwork::is_boundary(int layer) const {
    if (layer == 0) return true;
    for (const auto& u : units)
        if (u.out_boundary == layer) return true;
    return false;
}

int FoldedNetwork::boundary_for(int layer) const {
    if (is_boundary(layer)) return layer;
    for (const auto& u : units)
        if (u.spec_layer == layer) return u.out_boundary;
    throw ConfigError("layer " + std::to_string(layer) + " has no folded boundary");
}

FoldedNetwork fold_network(const NetworkSpec& net, const Parameters& params) {
    const auto ss = net.shapes();
    check_params_match(net, params, ss);
    FoldedNetwork fn;
    int in_boundary = 0;
    for (int li = 0; li < net.layer_count(); ++li) {
        const LayerSpec& ls = net.layers[static_cast<std::size_t>(li)];
        const LayerParams& lp = params.layers[static_cast<std::size_t>(li)];
        const int out_layer = li + 1;
        if (ls.kind == LayerKind::BatchNorm) {
            if (fn.units.empty() || fn.units.back().kind != LayerKind::Conv ||
                fn.units.back().out_boundary != li)
                throw ConfigError("batchnorm at layer " + std::to_string(out_layer) +
                                  " does not follow a conv layer; cannot fold");
            FoldedUnit& u = fn.units.back();
            absorb_batchnorm(u.weight, u.bias, lp.gamma, lp.sigma, lp.mu, lp.beta);
            u.out_boundary = out_layer;
            continue;
        }
        FoldedUnit u;
        u.kind = ls.kind;
        u.in_boundary = in_boundary;
        u.out_boundary = out_layer;
        u.spec_layer = out_layer;
        u.kernel = ls.kernel;
        u.window = ls.window;
        if (ls.kind == LayerKind::Conv || ls.kind == LayerKind::Fc) {
            u.weight = lp.weight;
            u.bias = lp.bias;
        }
        if (ls.kind == LayerKind::ResidualAdd) {
            // the skip source must itself be a surviving boundary
            u.skip_boundary = ls.source;
        }
        fn.units.push_back(std::move(u));
        in_boundary = out_layer;
    }
    // fix in_boundary chain after fusions
    int prev = 0;
    for (auto& u : fn.units) {
        u.in_boundary = prev;
        prev = u.out_boundary;
    }
    for (const auto& u : fn.units) {
        if (u.kind == LayerKind::ResidualAdd && !fn.is_boundary(u.skip_boundary))
            throw ConfigError("residual source at layer " + std::to_string(u.skip_boundary) +
                              " was folded away");
    }
    return fn;
}

}  // namespace gocollab::nn
