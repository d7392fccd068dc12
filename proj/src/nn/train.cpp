#include "gocollab/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gocollab/errors.hpp"

namespace gocollab::nn {

namespace {

void axpy_into(Tensor& dst, const Tensor& src, double a) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += a * s[i];
}

}  // namespace

void SgdState::init_like(const Parameters& params) {
    velocity.clear();
    velocity.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const LayerParams& lp = params.layers[i];
        LayerParams& v = velocity[i];
        if (!lp.weight.empty()) v.weight = Tensor::zeros(lp.weight.shape());
        if (!lp.bias.empty()) v.bias = Tensor::zeros(lp.bias.shape());
        if (!lp.gamma.empty()) {
            v.gamma = Tensor::zeros(lp.gamma.shape());
            v.beta = Tensor::zeros(lp.beta.shape());
        }
    }
}

double grad_norm(const Gradients& grads) {
    double sq = 0.0;
    for (const LayerParams& g : grads.layers) {
        for (const Tensor* t : {&g.weight, &g.bias, &g.gamma, &g.beta}) {
            for (double v : t->flat()) sq += v * v;
        }
    }
    return std::sqrt(sq);
}

void SgdState::step(Parameters& params, const Gradients& grads, double lr, double momentum,
                    double grad_clip) {
    double scale = 1.0;
    if (grad_clip > 0.0) {
        const double norm = grad_norm(grads);
        if (norm > grad_clip) scale = grad_clip / norm;
    }
    auto update = [&](Tensor& p, Tensor& v, const Tensor& g) {
        if (g.empty()) return;
        double* vp = v.data();
        const double* gp = g.data();
        for (std::size_t i = 0; i < v.size(); ++i) vp[i] = momentum * vp[i] + scale * gp[i];
        axpy_into(p, v, -lr);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        LayerParams& lp = params.layers[i];
        LayerParams& v = velocity[i];
        const LayerParams& g = grads.layers[i];
        update(lp.weight, v.weight, g.weight);
        update(lp.bias, v.bias, g.bias);
        update(lp.gamma, v.gamma, g.gamma);
        update(lp.beta, v.beta, g.beta);
    }
}

double mse(const NetworkSpec& net, const Parameters& params,
           const std::vector<Sample>& dataset) {
    double total = 0.0;
    for (const Sample& s : dataset) {
        const double y = forward(net, params, s.input).output();
        const double e = y - s.target;
        total += e * e;
    }
    return dataset.empty() ? 0.0 : total / static_cast<double>(dataset.size());
}

void calibrate_batchnorm(const NetworkSpec& net, Parameters& params,
                         const std::vector<Sample>& dataset) {
    std::vector<int> bn_layers;
    for (int li = 0; li < net.layer_count(); ++li)
        if (net.layers[static_cast<std::size_t>(li)].kind == LayerKind::BatchNorm)
            bn_layers.push_back(li);
    if (bn_layers.empty() || dataset.empty()) return;

    // statistics don't need every sample; stride the set down to a fixed cap
    constexpr std::size_t kCalibrationCap = 512;
    const std::size_t stride = std::max<std::size_t>(1, dataset.size() / kCalibrationCap);

    // Each layer's input depends on the normalizers upstream of it, so the
    // layers are calibrated in order, re-running prefixes with the stats set
    // so far.
    constexpr double kSigmaFloor = 1e-2;
    for (int bn_layer : bn_layers) {
        std::vector<double> sum, sumsq;
        std::size_t n = 0;
        for (std::size_t si = 0; si < dataset.size(); si += stride) {
            const ForwardTrace tr = forward_prefix(net, params, dataset[si].input, bn_layer);
            const Tensor& in = tr.x(bn_layer);  // batch-norm input
            const int c = in.channels();
            if (sum.empty()) {
                sum.assign(static_cast<std::size_t>(c), 0.0);
                sumsq.assign(static_cast<std::size_t>(c), 0.0);
            }
            const std::size_t spatial = in.size() / static_cast<std::size_t>(c);
            const double* ip = in.data();
            for (std::size_t i = 0; i < spatial; ++i) {
                for (int ch = 0; ch < c; ++ch) {
                    const double v = ip[i * static_cast<std::size_t>(c) + ch];
                    sum[static_cast<std::size_t>(ch)] += v;
                    sumsq[static_cast<std::size_t>(ch)] += v * v;
                }
            }
            n += spatial;
        }
        LayerParams& lp = params.layers[static_cast<std::size_t>(bn_layer)];
        for (std::size_t ch = 0; ch < sum.size(); ++ch) {
            const double mean = sum[ch] / static_cast<double>(n);
            const double var = std::max(0.0, sumsq[ch] / static_cast<double>(n) - mean * mean);
            lp.mu.at(static_cast<int>(ch)) = mean;
            lp.sigma.at(static_cast<int>(ch)) = std::max(std::sqrt(var), kSigmaFloor);
        }
    }
}

TrainResult train(const NetworkSpec& net, Parameters& params,
                  const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const std::function<void(int, double)>& epoch_hook) {
    if (dataset.empty()) throw ConfigError("train: dataset is empty");
    net.validate();

    TrainResult result;
    if (cfg.epochs <= 0) return result;

    if (cfg.bn_calibrate) calibrate_batchnorm(net, params, dataset);

    Rng rng(cfg.seed);
    SgdState sgd;
    sgd.init_like(params);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double lr = cfg.learning_rate;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle) rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Sample& s = dataset[idx];
            const ForwardTrace tr = forward(net, params, s.input);
            const double y = tr.output();
            const double err = y - s.target;
            loss_sum += err * err;
            const Gradients g = backward_gradients(net, params, tr, 2.0 * err);
            sgd.step(params, g, lr, cfg.momentum, cfg.grad_clip);
        }
        const double epoch_loss = loss_sum / static_cast<double>(dataset.size());
        if (!std::isfinite(epoch_loss))
            throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(epoch) +
                                   " (lr=" + std::to_string(lr) + ")");
        result.epoch_loss.push_back(epoch_loss);
        if (epoch_hook) epoch_hook(epoch, epoch_loss);
        if (cfg.decay_every > 0 && epoch % cfg.decay_every == 0) lr *= cfg.decay_factor;
    }
    return result;
}

}  // namespace gocollab::nn
