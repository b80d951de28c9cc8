#include "advrob/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "advrob/errors.hpp"
#include "advrob/rng.hpp"

namespace advrob {

namespace {

// Seed-stream layout for train(): stream 0 initializes parameters, stream
// 1 + e shuffles epoch e. Adversarial augmentation (advtrain.cpp) uses
// streams from 1'000'000 up so the base trajectory is untouched.
constexpr std::uint64_t kStreamInit = 0;
constexpr std::uint64_t kStreamEpochBase = 1;

struct ForwardCache {
    std::vector<Matrix> pre;   // pre-activations z_l, one per layer
    std::vector<Matrix> post;  // post[0] = input, post[l] = activation output of layer l
};

void affine(const Matrix& h, const Layer& layer, Matrix& z) {
    const std::size_t n = h.rows, in = layer.w.rows, out = layer.w.cols;
    z = Matrix(n, out);
    for (std::size_t i = 0; i < n; ++i) {
        const double* hi = h.row(i);
        double* zi = z.row(i);
        for (std::size_t k = 0; k < out; ++k) zi[k] = layer.b[k];
        for (std::size_t j = 0; j < in; ++j) {
            const double hj = hi[j];
            const double* wj = layer.w.row(j);
            for (std::size_t k = 0; k < out; ++k) zi[k] += hj * wj[k];
        }
    }
}

void softmax_rows(const Matrix& z, Matrix& p) {
    p = Matrix(z.rows, z.cols);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* zi = z.row(i);
        double* pi = p.row(i);
        double m = zi[0];
        for (std::size_t k = 1; k < z.cols; ++k) m = std::max(m, zi[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < z.cols; ++k) {
            pi[k] = std::exp(zi[k] - m);
            sum += pi[k];
        }
        for (std::size_t k = 0; k < z.cols; ++k) pi[k] /= sum;
    }
}

ForwardCache forward_cached(const ModelParams& params, const Matrix& x) {
    ForwardCache cache;
    cache.post.push_back(x);
    const std::size_t L = params.n_layers();
    for (std::size_t l = 0; l < L; ++l) {
        Matrix z;
        affine(cache.post.back(), params.layers[l], z);
        if (l + 1 < L) {
            Matrix h = z;
            for (double& v : h.data) v = v > 0.0 ? v : 0.0;
            cache.pre.push_back(std::move(z));
            cache.post.push_back(std::move(h));
        } else {
            cache.pre.push_back(std::move(z));
        }
    }
    return cache;
}

void check_input(const ModelParams& params, const Matrix& x, const std::vector<int>* y) {
    if (params.layers.empty()) throw ConfigError("model has no layers");
    if (x.cols != params.input_dim()) {
        throw DataError("input width " + std::to_string(x.cols) + " does not match model input " +
                        std::to_string(params.input_dim()));
    }
    for (double v : x.data) {
        if (!std::isfinite(v)) throw DataError("non-finite value in model input");
    }
    if (y) {
        if (y->size() != x.rows) throw DataError("label count does not match input rows");
        const int C = static_cast<int>(params.output_dim());
        for (int c : *y) {
            if (c < 0 || c >= C) throw DataError("class index out of range: " + std::to_string(c));
        }
    }
}

double mean_nll_from_logits(const Matrix& z, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* zi = z.row(i);
        double m = zi[0];
        for (std::size_t k = 1; k < z.cols; ++k) m = std::max(m, zi[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < z.cols; ++k) sum += std::exp(zi[k] - m);
        total += (m + std::log(sum)) - zi[static_cast<std::size_t>(y[i])];
    }
    return total / static_cast<double>(z.rows);
}

std::vector<Layer> zero_like(const ModelParams& params) {
    std::vector<Layer> out;
    out.reserve(params.n_layers());
    for (const Layer& l : params.layers) {
        out.push_back({Matrix(l.w.rows, l.w.cols), std::vector<double>(l.b.size(), 0.0)});
    }
    return out;
}

// Shared backward pass. `scale` multiplies the output-layer delta: 1/n for
// the mean-loss parameter gradient, 1 for per-sample input gradients.
// Returns the delta propagated to the input when `input_grad` is requested.
std::vector<Layer> backward(const ModelParams& params, const ForwardCache& cache,
                            const std::vector<int>& y, double scale, Matrix* input_grad,
                            bool want_param_grads) {
    const std::size_t L = params.n_layers();
    const std::size_t n = cache.post[0].rows;

    Matrix delta;
    softmax_rows(cache.pre[L - 1], delta);
    for (std::size_t i = 0; i < n; ++i) {
        delta(i, static_cast<std::size_t>(y[i])) -= 1.0;
        for (std::size_t k = 0; k < delta.cols; ++k) delta(i, k) *= scale;
    }

    std::vector<Layer> grads;
    if (want_param_grads) grads = zero_like(params);

    for (std::size_t l = L; l-- > 0;) {
        const Layer& layer = params.layers[l];
        if (want_param_grads) {
            const Matrix& h = cache.post[l];
            Layer& g = grads[l];
            for (std::size_t i = 0; i < n; ++i) {
                const double* hi = h.row(i);
                const double* di = delta.row(i);
                for (std::size_t j = 0; j < layer.w.rows; ++j) {
                    double* gw = g.w.row(j);
                    const double hj = hi[j];
                    for (std::size_t k = 0; k < layer.w.cols; ++k) gw[k] += hj * di[k];
                }
                for (std::size_t k = 0; k < layer.b.size(); ++k) g.b[k] += di[k];
            }
        }
        const bool need_prev = l > 0 || input_grad != nullptr;
        if (!need_prev) break;

        Matrix prev(n, layer.w.rows);
        for (std::size_t i = 0; i < n; ++i) {
            const double* di = delta.row(i);
            double* pi = prev.row(i);
            for (std::size_t j = 0; j < layer.w.rows; ++j) {
                const double* wj = layer.w.row(j);
                double acc = 0.0;
                for (std::size_t k = 0; k < layer.w.cols; ++k) acc += wj[k] * di[k];
                pi[j] = acc;
            }
        }
        if (l > 0) {
            // ReLU mask; the subgradient at exactly 0 is 0.
            const Matrix& z = cache.pre[l - 1];
            for (std::size_t i = 0; i < prev.data.size(); ++i) {
                if (!(z.data[i] > 0.0)) prev.data[i] = 0.0;
            }
            delta = std::move(prev);
        } else if (input_grad) {
            *input_grad = std::move(prev);
        }
    }
    return grads;
}

}  // namespace

ModelParams init_params(std::size_t d_in, std::size_t n_classes, std::uint64_t seed,
                        const std::vector<std::size_t>& hidden) {
    if (d_in < 1 || n_classes < 2) {
        throw ConfigError("init_params: need d_in >= 1 and n_classes >= 2");
    }
    std::vector<std::size_t> sizes;
    sizes.push_back(d_in);
    for (std::size_t h : hidden) {
        if (h < 1) throw ConfigError("init_params: hidden layer size must be >= 1");
        sizes.push_back(h);
    }
    sizes.push_back(n_classes);

    ModelParams params;
    SplitMix64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer;
        layer.w = Matrix(sizes[l], sizes[l + 1]);
        layer.b.assign(sizes[l + 1], 0.0);
        const double bound =
            std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        for (double& v : layer.w.data) v = rng.next_uniform(-bound, bound);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Matrix forward(const ModelParams& params, const Matrix& x) {
    check_input(params, x, nullptr);
    ForwardCache cache = forward_cached(params, x);
    Matrix probs;
    softmax_rows(cache.pre.back(), probs);
    return probs;
}

Matrix logits(const ModelParams& params, const Matrix& x) {
    check_input(params, x, nullptr);
    return forward_cached(params, x).pre.back();
}

double loss(const ModelParams& params, const Matrix& x, const std::vector<int>& y) {
    check_input(params, x, &y);
    if (x.rows == 0) throw DataError("loss: empty batch");
    ForwardCache cache = forward_cached(params, x);
    return mean_nll_from_logits(cache.pre.back(), y);
}

std::vector<Layer> grad_params(const ModelParams& params, const Matrix& x,
                               const std::vector<int>& y) {
    check_input(params, x, &y);
    if (x.rows == 0) throw DataError("grad_params: empty batch");
    ForwardCache cache = forward_cached(params, x);
    std::vector<Layer> grads =
        backward(params, cache, y, 1.0 / static_cast<double>(x.rows), nullptr, true);
#ifdef ADVROB_FAULT_INJECTION
    // Build-time fault hook: mis-scales the first-layer weight gradient so the
    // self-test's finite-difference check must fail.
    for (double& v : grads[0].w.data) v *= 1.001;
#endif
    return grads;
}

Matrix grad_input(const ModelParams& params, const Matrix& x, const std::vector<int>& y) {
    check_input(params, x, &y);
    if (x.rows == 0) throw DataError("grad_input: empty batch");
    ForwardCache cache = forward_cached(params, x);
    Matrix g;
    backward(params, cache, y, 1.0, &g, false);
    return g;
}

AdamState init_adam(const ModelParams& params) {
    AdamState state;
    state.m = zero_like(params);
    state.v = zero_like(params);
    state.t = 0;
    return state;
}

void adam_step(AdamState& state, ModelParams& params, const std::vector<Layer>& grads,
               const TrainConfig& config) {
    if (grads.size() != params.n_layers() || state.m.size() != params.n_layers()) {
        throw ConfigError("adam_step: shape mismatch");
    }
    state.t += 1;
    const double b1c = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double b2c = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));

    auto update = [&](double& p, double g, double& m, double& v) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g * g;
        const double mh = m / b1c;
        const double vh = v / b2c;
        p -= config.learning_rate * mh / (std::sqrt(vh) + config.eps_adam);
    };

    for (std::size_t l = 0; l < params.n_layers(); ++l) {
        Layer& layer = params.layers[l];
        const Layer& g = grads[l];
        if (g.w.rows != layer.w.rows || g.w.cols != layer.w.cols ||
            g.b.size() != layer.b.size()) {
            throw ConfigError("adam_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        for (std::size_t i = 0; i < layer.w.data.size(); ++i) {
            update(layer.w.data[i], g.w.data[i], state.m[l].w.data[i], state.v[l].w.data[i]);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            update(layer.b[i], g.b[i], state.m[l].b[i], state.v[l].b[i]);
        }
    }
}

TrainResult train(const Dataset& data, const TrainConfig& config, const BatchHook& hook) {
    if (data.size() == 0) throw DataError("train: empty dataset");
    if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");

    TrainResult result;
    result.params = init_params(data.dim(), static_cast<std::size_t>(data.n_classes),
                                derive_seed(config.seed, kStreamInit));
    AdamState state = init_adam(result.params);

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        SplitMix64 rng(derive_seed(config.seed, kStreamEpochBase + epoch));
        rng.shuffle(order);

        double loss_sum = 0.0;
        double sample_count = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t bn = std::min(config.batch_size, n - start);
            Matrix xb(bn, data.dim());
            std::vector<int> yb(bn);
            for (std::size_t i = 0; i < bn; ++i) {
                const std::size_t src = order[start + i];
                for (std::size_t j = 0; j < data.dim(); ++j) xb(i, j) = data.x(src, j);
                yb[i] = data.y[src];
            }
            if (hook) hook(epoch, batch_index, result.params, xb, yb);
            ForwardCache cache = forward_cached(result.params, xb);
            loss_sum +=
                mean_nll_from_logits(cache.pre.back(), yb) * static_cast<double>(xb.rows);
            sample_count += static_cast<double>(xb.rows);
            std::vector<Layer> grads = backward(result.params, cache, yb,
                                                1.0 / static_cast<double>(xb.rows), nullptr, true);
#ifdef ADVROB_FAULT_INJECTION
            for (double& v : grads[0].w.data) v *= 1.001;
#endif
            adam_step(state, result.params, grads, config);
        }

        EpochStats stats;
        stats.mean_loss = loss_sum / sample_count;
        stats.train_accuracy = evaluate(result.params, data.x, data.y).accuracy;
        result.history.push_back(stats);
    }
    return result;
}

EvalResult evaluate(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
                    int positive_class) {
    check_input(params, x, &y);
    if (x.rows == 0) throw DataError("evaluate: empty dataset");
    const int C = static_cast<int>(params.output_dim());
    if (positive_class < 0 || positive_class >= C) {
        throw ConfigError("evaluate: positive class out of range");
    }
    const Matrix probs = forward(params, x);
    EvalResult result;
    result.predictions.resize(x.rows);
    result.scores.resize(x.rows);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* pi = probs.row(i);
        std::size_t best = 0;
        for (std::size_t k = 1; k < probs.cols; ++k) {
            if (pi[k] > pi[best]) best = k;
        }
        result.predictions[i] = static_cast<int>(best);
        result.scores[i] = pi[static_cast<std::size_t>(positive_class)];
        if (static_cast<int>(best) == y[i]) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows);
    return result;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = "advrob-checkpoint";
    doc["version"] = 1;
    std::vector<std::size_t> sizes{params.input_dim()};
    std::vector<std::string> acts;
    for (std::size_t l = 0; l < params.n_layers(); ++l) {
        sizes.push_back(params.layers[l].w.cols);
        acts.push_back(l + 1 < params.n_layers() ? "relu" : "softmax");
    }
    doc["layer_sizes"] = sizes;
    doc["activations"] = acts;
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : params.layers) {
        layers.push_back({{"w", l.w.data}, {"b", l.b}});
    }
    doc["layers"] = std::move(layers);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
    if (doc.value("format", "") != "advrob-checkpoint" || doc.value("version", 0) != 1) {
        throw DataError("unsupported checkpoint format in " + path);
    }
    const auto sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto layers = doc.at("layers");
    if (sizes.size() < 2 || layers.size() + 1 != sizes.size()) {
        throw DataError("inconsistent checkpoint shapes in " + path);
    }
    ModelParams params;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Layer layer;
        layer.w = Matrix(sizes[l], sizes[l + 1]);
        layer.w.data = layers[l].at("w").get<std::vector<double>>();
        layer.b = layers[l].at("b").get<std::vector<double>>();
        if (layer.w.data.size() != sizes[l] * sizes[l + 1] || layer.b.size() != sizes[l + 1]) {
            throw DataError("checkpoint layer " + std::to_string(l) + " has wrong shape");
        }
        for (double v : layer.w.data) {
            if (!std::isfinite(v)) throw DataError("non-finite weight in checkpoint " + path);
        }
        for (double v : layer.b) {
            if (!std::isfinite(v)) throw DataError("non-finite bias in checkpoint " + path);
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

}  // namespace advrob
