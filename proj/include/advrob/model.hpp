#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "advrob/data.hpp"
#include "advrob/matrix.hpp"

namespace advrob {

// One fully connected layer: w is (fan_in x fan_out), b has fan_out entries.
struct Layer {
    Matrix w;
    std::vector<double> b;
};

// Feed-forward classifier. Every layer but the last applies ReLU; the last
// applies softmax. The default architecture is d -> 64 -> 32 -> C; smaller or
// layerless (plain linear-softmax) stacks are supported for oracles and tests.
struct ModelParams {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().w.rows; }
    std::size_t output_dim() const { return layers.back().w.cols; }
    std::size_t n_layers() const { return layers.size(); }
};

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
};

// Adam moment accumulators, shape-matched to the parameters they update.
struct AdamState {
    std::vector<Layer> m;
    std::vector<Layer> v;
    long t = 0;
};

struct EpochStats {
    double mean_loss = 0.0;      // sample-weighted mean loss over the epoch
    double train_accuracy = 0.0; // full-train accuracy after the epoch
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<int> predictions;       // argmax class per sample (lowest index wins ties)
    std::vector<double> scores;         // probability of the positive class
};

// Fan-scaled uniform init, range +-sqrt(6 / (fan_in + fan_out)); biases zero.
// Weights are drawn layer by layer in row-major order from SplitMix64(seed).
ModelParams init_params(std::size_t d_in, std::size_t n_classes, std::uint64_t seed,
                        const std::vector<std::size_t>& hidden = {64, 32});

// Class probabilities, one row per input row. Softmax is evaluated with the
// usual max-shift so rows stay finite and sum to 1.
Matrix forward(const ModelParams& params, const Matrix& x);

// Pre-softmax outputs of the last layer.
Matrix logits(const ModelParams& params, const Matrix& x);

// Mean cross-entropy over the batch (log-sum-exp stabilized).
double loss(const ModelParams& params, const Matrix& x, const std::vector<int>& y);

// Exact reverse-mode gradient of the mean cross-entropy w.r.t. all weights
// and biases. ReLU subgradient at exactly 0 is taken as 0.
std::vector<Layer> grad_params(const ModelParams& params, const Matrix& x,
                               const std::vector<int>& y);

// Per-sample gradient of the cross-entropy w.r.t. the input (not averaged
// over the batch): row i is the gradient of sample i's own loss.
Matrix grad_input(const ModelParams& params, const Matrix& x, const std::vector<int>& y);

// Standard bias-corrected Adam update; increments state.t.
void adam_step(AdamState& state, ModelParams& params, const std::vector<Layer>& grads,
               const TrainConfig& config);

AdamState init_adam(const ModelParams& params);

// Batch hook invoked after batch assembly and before the gradient step; may
// rewrite the batch in place (adversarial training swaps in attacked
// samples). Receives the epoch index, the within-epoch batch index, and the
// current parameters.
using BatchHook = std::function<void(std::size_t epoch, std::size_t batch_index,
                                     const ModelParams& params, Matrix& xb,
                                     std::vector<int>& yb)>;

// Mini-batch training with a fresh seeded shuffle each epoch. The final
// partial batch is used. Deterministic given (data, config, hook).
TrainResult train(const Dataset& data, const TrainConfig& config,
                  const BatchHook& hook = nullptr);

EvalResult evaluate(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
                    int positive_class = 1);

// Versioned JSON checkpoint with shapes, activation tags, and row-major
// weights at full double precision.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace advrob
