#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gocollab/nn/net.hpp"

namespace gocollab::nn {

struct Sample {
    Tensor input;
    double target = 0.0;
};

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 0.01;
    double momentum = 0.9;
    // learning rate is multiplied by decay_factor every decay_every epochs
    int decay_every = 4;
    double decay_factor = 0.5;
    std::uint64_t seed = 1;
    bool shuffle = true;
    // set batch-norm (mu, sigma) from the data before the first epoch
    bool bn_calibrate = true;
    // per-step global L2 gradient norm clip; <= 0 disables
    double grad_clip = 5.0;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean squared error per epoch
};

// Per-sample SGD with momentum on the squared error of the scalar value
// output. Mutates params in place. Throws TrainingDiverged on NaN loss.
// `epoch_hook`, when set, is called after each epoch with (epoch, loss).
TrainResult train(const NetworkSpec& net, Parameters& params,
                  const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const std::function<void(int, double)>& epoch_hook = {});

double mse(const NetworkSpec& net, const Parameters& params,
           const std::vector<Sample>& dataset);

// Sets each batch-norm layer's (mu, sigma) to the per-channel mean/stddev of
// its input activations over the given boards. Sigma is floored at 1e-2.
void calibrate_batchnorm(const NetworkSpec& net, Parameters& params,
                         const std::vector<Sample>& dataset);

// One SGD-with-momentum step from externally computed gradients; used by the
// distillation loops that train on composite losses.
struct SgdState {
    std::vector<LayerParams> velocity;
    void init_like(const Parameters& params);
    void step(Parameters& params, const Gradients& grads, double lr, double momentum,
              double grad_clip = 5.0);
};

// Global L2 norm of all parameter gradients.
double grad_norm(const Gradients& grads);

}  // namespace gocollab::nn
