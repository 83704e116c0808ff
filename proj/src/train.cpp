#include "copycat/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "copycat/errors.hpp"
#include "copycat/rng.hpp"

namespace copycat {

void SgdConfig::validate() const {
    if (!(base_lr > 0.0)) throw std::invalid_argument("sgd: base_lr must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("sgd: gamma must be in (0,1)");
    if (step_size < 1) throw std::invalid_argument("sgd: step_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("sgd: momentum must be in [0,1)");
    if (max_epochs < 1) throw std::invalid_argument("sgd: max_epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("sgd: batch_size must be >= 1");
}

SgdConfig SgdConfig::defaults(int max_epochs, std::uint64_t seed) {
    SgdConfig c;
    c.max_epochs = max_epochs;
    c.step_size = (max_epochs + 2) / 3;
    if (c.step_size < 1) c.step_size = 1;
    c.seed = seed;
    return c;
}

double lr_at(const SgdConfig& config, int epoch) {
    config.validate();
    if (epoch < 0 || epoch >= config.max_epochs)
        throw std::invalid_argument("lr_at: epoch " + std::to_string(epoch) + " outside [0," +
                                    std::to_string(config.max_epochs) + ")");
    return config.base_lr * std::pow(config.gamma, static_cast<double>(epoch / config.step_size));
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2) throw ShapeError("loss: logits must be rank 2, got " + logits.shape_str());
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("loss: " + std::to_string(n) + " rows vs " + std::to_string(labels.size()) +
                                    " labels");
    LossResult res;
    res.dlogits = Tensor({n, k});
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= k) throw std::invalid_argument("loss: label " + std::to_string(y) + " outside [0," +
                                                         std::to_string(k) + ")");
        const double* row = logits.data.data() + static_cast<std::size_t>(i) * k;
        double* drow = res.dlogits.data.data() + static_cast<std::size_t>(i) * k;
        double mx = row[0];
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (row[j] > mx) mx = row[j], best = j;
        if (best == y) ++res.correct;
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
        const double lse = mx + std::log(sum);
        total += lse - row[y];
        for (int j = 0; j < k; ++j) drow[j] = std::exp(row[j] - lse) * inv_n;
        drow[y] -= inv_n;
    }
    res.loss = total * inv_n;
    return res;
}

TrainLog train(Model& model, const LabeledDataset& dataset, const SgdConfig& config, Trainable trainable) {
    config.validate();
    if (dataset.size() < 1) throw std::invalid_argument("train: dataset is empty");
    if (dataset.n_classes != model.n_classes)
        throw std::invalid_argument("train: dataset has " + std::to_string(dataset.n_classes) +
                                    " classes but model expects " + std::to_string(model.n_classes));
    for (int l : dataset.labels)
        if (l == kUnlabeled) throw std::invalid_argument("train: dataset contains unlabeled samples");

    const int n = dataset.size();
    Gradients velocity = Gradients::zeros_like(model);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(config.seed, 0xC0FFEE));

    TrainLog log;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double lr = lr_at(config, epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        long long correct = 0;
        int batch_index = 0;
        for (int start = 0; start < n; start += config.batch_size, ++batch_index) {
            const int count = std::min(config.batch_size, n - start);
            std::vector<int> idx(order.begin() + start, order.begin() + start + count);
            LabeledDataset batch = take(dataset, idx);

            ForwardTrace tr = forward_trace(model, batch.images);
            LossResult loss = softmax_cross_entropy(tr.acts.back(), batch.labels);
            if (!std::isfinite(loss.loss))
                throw TrainingDiverged(epoch, batch_index,
                                       "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                           " batch " + std::to_string(batch_index));
            loss_sum += loss.loss * count;
            correct += loss.correct;

            Gradients grads = backward(model, tr, loss.dlogits);
            for (std::size_t li = 0; li < model.layers.size(); ++li) {
                if (model.weights[li].numel() == 0) continue;
                if (trainable == Trainable::HeadOnly && !model.layer_in_head(static_cast<int>(li))) continue;
                auto update = [&](Tensor& param, Tensor& vel, const Tensor& grad) {
                    for (std::size_t j = 0; j < param.data.size(); ++j) {
                        vel.data[j] = config.momentum * vel.data[j] + grad.data[j];
                        param.data[j] -= lr * vel.data[j];
                    }
                };
                update(model.weights[li], velocity.weights[li], grads.weights[li]);
                update(model.biases[li], velocity.biases[li], grads.biases[li]);
            }
        }

        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.mean_loss = loss_sum / n;
        st.accuracy = static_cast<double>(correct) / n;
        log.epochs.push_back(st);
    }
    return log;
}

double grad_check(const Model& model, const LabeledDataset& batch, double eps) {
    if (!(eps >= 1e-6 && eps <= 1e-4))
        throw std::invalid_argument("grad_check: eps must lie in [1e-6, 1e-4]");
    if (batch.size() < 1) throw std::invalid_argument("grad_check: empty batch");

    Model probe = model;
    ForwardTrace tr = forward_trace(probe, batch.images);
    LossResult base = softmax_cross_entropy(tr.acts.back(), batch.labels);
    Gradients analytic = backward(probe, tr, base.dlogits);

    auto loss_at = [&]() {
        Tensor logits = forward(probe, batch.images);
        return softmax_cross_entropy(logits, batch.labels).loss;
    };

    double worst = 0.0;
    auto probe_tensor = [&](Tensor& param, const Tensor& grad) {
        for (std::size_t j = 0; j < param.data.size(); ++j) {
            const double saved = param.data[j];
            param.data[j] = saved + eps;
            const double up = loss_at();
            param.data[j] = saved - eps;
            const double down = loss_at();
            param.data[j] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = grad.data[j];
            const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, rel);
        }
    };
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        if (probe.weights[li].numel() == 0) continue;
        probe_tensor(probe.weights[li], analytic.weights[li]);
        probe_tensor(probe.biases[li], analytic.biases[li]);
    }
    return worst;
}

}  // namespace copycat
