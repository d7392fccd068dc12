#include "gocollab/contribution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gocollab/errors.hpp"
#include "gocollab/nn/kernels.hpp"

namespace gocollab::contrib {

void write_flow_csv(const PropagationDiag& diag, std::ostream& os) {
    os << "layer,sum,bias_absorbed\n";
    char buf[80];
    for (const LayerFlow& f : diag.steps) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", f.layer, f.sum_out, f.bias_absorbed);
        os << buf;
    }
}

ContributionMap init_output_contribution(const nn::NetworkSpec& net,
                                         const nn::ForwardTrace& trace) {
    const int vl = net.value_layer();
    const Tensor& out = trace.x(vl);
    if (out.rank() != 1 || out.length() != 1)
        throw ConfigError("contribution requires a scalar-output network");
    ContributionMap m;
    m.layer = vl;
    m.values = Tensor::scalar(1.0);
    return m;
}

Tensor propagate_linear_fc(const Tensor& c_out, const Tensor& weight, const Tensor& bias,
                           const Tensor& x, const Tensor& o, double* bias_absorbed) {
    const int n_out = o.length();
    const int n_in = static_cast<int>(x.size());
    if (weight.rank() != 2 || weight.dim(0) != n_out || weight.dim(1) != n_in)
        throw ConfigError("propagate_linear_fc: weight shape mismatch");
    if (static_cast<int>(c_out.size()) != n_out)
        throw ConfigError("propagate_linear_fc: contribution shape mismatch");

    // per-unit distribution factor; zero for o_i <= 0
    Tensor g = Tensor::zeros1(n_out);
    double absorbed = 0.0;
    for (int i = 0; i < n_out; ++i) {
        const double oi = o.at(i);
        const double ci = c_out.flat()[static_cast<std::size_t>(i)];
        if (oi > 0.0 && ci != 0.0) {
            const double b = bias.at(i);
            g.at(i) = ci / (oi + std::max(-b, 0.0));
            if (b >= 0.0) absorbed += ci * b / oi;
        }
    }
    Tensor back = Tensor::zeros1(n_in);
    nn::kernels::fc_input_grad(g.data(), n_out, weight.data(), n_in, back.data());
    Tensor c_in = x;  // same shape as x; C_{x_j} = x_j * sum_i W_ij g_i
    double* cp = c_in.data();
    const double* bp = back.data();
    for (int j = 0; j < n_in; ++j) cp[j] *= bp[j];
    if (bias_absorbed) *bias_absorbed = absorbed;
    return c_in;
}

Tensor propagate_linear_conv(const Tensor& c_out, const Tensor& weight, const Tensor& bias,
                             const Tensor& x, const Tensor& o, int kernel,
                             double* bias_absorbed) {
    if (x.rank() != 3 || o.rank() != 3 || !c_out.same_shape(o))
        throw ConfigError("propagate_linear_conv: shape mismatch");
    const int c_out_ch = o.channels();
    Tensor g = Tensor::zeros3(o.height(), o.width(), c_out_ch);
    double absorbed = 0.0;
    const double* op = o.data();
    const double* cop = c_out.data();
    double* gp = g.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double oi = op[i];
        const double ci = cop[i];
        if (oi > 0.0 && ci != 0.0) {
            const double b = bias.at(static_cast<int>(i % static_cast<std::size_t>(c_out_ch)));
            gp[i] = ci / (oi + std::max(-b, 0.0));
            if (b >= 0.0) absorbed += ci * b / oi;
        }
    }
    Tensor back = Tensor::zeros3(x.height(), x.width(), x.channels());
    nn::kernels::conv2d_input_grad(g.data(), o.height(), o.width(), c_out_ch, weight.data(),
                                   kernel, x.channels(), back.data());
    Tensor c_in = x;
    double* cp = c_in.data();
    const double* bp = back.data();
    for (std::size_t j = 0; j < c_in.size(); ++j) cp[j] *= bp[j];
    if (bias_absorbed) *bias_absorbed = absorbed;
    return c_in;
}

Tensor propagate_relu(const Tensor& c_out, const Tensor& pre_activation) {
    if (!c_out.same_shape(pre_activation))
        throw ConfigError("propagate_relu: shape mismatch");
    Tensor c_in = c_out;
    double* cp = c_in.data();
    const double* pp = pre_activation.data();
    for (std::size_t i = 0; i < c_in.size(); ++i)
        if (!(pp[i] > 0.0)) cp[i] = 0.0;
    return c_in;
}

Tensor propagate_maxpool(const Tensor& c_out, const std::vector<int>& argmax,
                         const nn::Shape& in_shape) {
    if (argmax.size() != c_out.size())
        throw ConfigError("propagate_maxpool: missing argmax trace");
    Tensor c_in = Tensor::zeros3(in_shape.h, in_shape.w, in_shape.c);
    const double* cp = c_out.data();
    for (std::size_t i = 0; i < c_out.size(); ++i)
        c_in.flat()[static_cast<std::size_t>(argmax[i])] += cp[i];
    return c_in;
}

Tensor propagate_avgpool(const Tensor& c_out, int window, const nn::Shape& in_shape) {
    Tensor c_in = Tensor::zeros3(in_shape.h, in_shape.w, in_shape.c);
    const int oh = c_out.height(), ow = c_out.width(), c = c_out.channels();
    const double inv = 1.0 / (window * window);
    for (int r = 0; r < oh; ++r)
        for (int cc = 0; cc < ow; ++cc)
            for (int ch = 0; ch < c; ++ch) {
                const double share = c_out.at(r, cc, ch) * inv;
                for (int dr = 0; dr < window; ++dr)
                    for (int dc = 0; dc < window; ++dc)
                        c_in.at(r * window + dr, cc * window + dc, ch) += share;
            }
    return c_in;
}

Tensor propagate_skip(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("propagate_skip: shape mismatch");
    Tensor out = a;
    out += b;
    return out;
}

namespace {

// Splits the contribution of a residual sum z = a + b onto its two addends,
// proportionally to their values (the unit-weight, zero-bias linear rule).
void split_residual(const Tensor& c_z, const Tensor& z, const Tensor& a, const Tensor& b,
                    Tensor& c_a, Tensor& c_b) {
    const double* cz = c_z.data();
    const double* zp = z.data();
    const double* ap = a.data();
    const double* bp = b.data();
    double* cap = c_a.data();
    double* cbp = c_b.data();
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (zp[i] > 0.0 && cz[i] != 0.0) {
            const double f = cz[i] / zp[i];
            cap[i] += f * ap[i];
            cbp[i] += f * bp[i];
        }
    }
}

}  // namespace

ContributionMap propagate_map_to_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                                       const nn::ForwardTrace& trace, ContributionMap seed,
                                       int target_layer, PropagationDiag* diag) {
    const nn::FoldedNetwork fn = fold_network(net, params);
    const int seed_boundary = fn.boundary_for(seed.layer);
    const int target = target_layer == 0 ? 0 : fn.boundary_for(target_layer);
    if (target > seed_boundary)
        throw ConfigError("propagate target is above the seeded layer");
    if (!seed.values.same_shape(trace.x(seed_boundary)))
        throw ConfigError("seed map shape does not match its layer activations");

    const auto ss = net.shapes();
    // pending contribution per boundary
    std::vector<Tensor> pending(static_cast<std::size_t>(net.layer_count()) + 1);
    pending[static_cast<std::size_t>(seed_boundary)] = std::move(seed.values);
    auto ensure = [&](int boundary) -> Tensor& {
        Tensor& t = pending[static_cast<std::size_t>(boundary)];
        if (t.empty()) {
            const nn::Shape& s = ss[static_cast<std::size_t>(boundary)];
            t = s.rank == 3 ? Tensor::zeros3(s.h, s.w, s.c) : Tensor::zeros1(s.len);
        }
        return t;
    };

    for (auto it = fn.units.rbegin(); it != fn.units.rend(); ++it) {
        const nn::FoldedUnit& u = *it;
        if (u.out_boundary > seed_boundary || u.out_boundary <= target) continue;
        Tensor& c_out = pending[static_cast<std::size_t>(u.out_boundary)];
        if (c_out.empty()) {
            ensure(u.in_boundary);
            continue;
        }
        LayerFlow flow;
        flow.layer = u.out_boundary;
        flow.sum_in = c_out.sum();
        const double below_before =
            ensure(u.in_boundary).sum() +
            (u.kind == nn::LayerKind::ResidualAdd ? ensure(u.skip_boundary).sum() : 0.0);
        const Tensor& x_in = trace.x(u.in_boundary);
        const Tensor& x_out = trace.x(u.out_boundary);
        switch (u.kind) {
            case nn::LayerKind::Conv: {
                Tensor c_in = propagate_linear_conv(c_out, u.weight, u.bias, x_in, x_out,
                                                    u.kernel, &flow.bias_absorbed);
                ensure(u.in_boundary) += c_in;
                break;
            }
            case nn::LayerKind::Fc: {
                Tensor c_in = propagate_linear_fc(c_out, u.weight, u.bias, x_in, x_out,
                                                  &flow.bias_absorbed);
                ensure(u.in_boundary) += c_in;
                break;
            }
            case nn::LayerKind::Relu: {
                ensure(u.in_boundary) += propagate_relu(c_out, x_in);
                break;
            }
            case nn::LayerKind::MaxPool: {
                const auto& argmax = trace.pool_argmax[static_cast<std::size_t>(u.spec_layer - 1)];
                ensure(u.in_boundary) +=
                    propagate_maxpool(c_out, argmax, ss[static_cast<std::size_t>(u.in_boundary)]);
                break;
            }
            case nn::LayerKind::AvgPool: {
                ensure(u.in_boundary) +=
                    propagate_avgpool(c_out, u.window, ss[static_cast<std::size_t>(u.in_boundary)]);
                break;
            }
            case nn::LayerKind::ResidualAdd: {
                const Tensor& skip = trace.x(u.skip_boundary);
                split_residual(c_out, x_out, x_in, skip, ensure(u.in_boundary),
                               ensure(u.skip_boundary));
                break;
            }
            case nn::LayerKind::Sigmoid:
                throw ConfigError("contribution is never propagated through sigmoid");
            case nn::LayerKind::BatchNorm:
                throw ConfigError("unfolded batchnorm in propagation chain");
        }
        // mass actually delivered downward by this step
        const double below_after =
            pending[static_cast<std::size_t>(u.in_boundary)].sum() +
            (u.kind == nn::LayerKind::ResidualAdd
                 ? pending[static_cast<std::size_t>(u.skip_boundary)].sum()
                 : 0.0);
        flow.sum_out = below_after - below_before;
        if (diag) diag->steps.push_back(flow);
        c_out = Tensor();  // consumed
    }

    ContributionMap out;
    out.layer = target;
    out.values = std::move(ensure(target));
    return out;
}

ContributionMap propagate_to_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                                   const nn::ForwardTrace& trace, int target_layer,
                                   PropagationDiag* diag) {
    if (target_layer < 0 || target_layer >= net.layer_count())
        throw ConfigError("propagate_to_layer: target out of range");
    ContributionMap seed = init_output_contribution(net, trace);
    return propagate_map_to_layer(net, params, trace, std::move(seed), target_layer, diag);
}

}  // namespace gocollab::contrib
