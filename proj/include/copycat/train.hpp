#pragma once

#include <cstdint>
#include <vector>

#include "copycat/dataset.hpp"
#include "copycat/model.hpp"

namespace copycat {

// SGD with a step-down learning-rate policy: lr(e) = base_lr * gamma^floor(e/step_size).
struct SgdConfig {
    double base_lr = 0.01;
    double gamma = 0.1;
    int step_size = 2;       // epochs between drops
    double momentum = 0.9;
    int max_epochs = 5;
    int batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
    // spec defaults: gamma 0.1, step_size ceil(max_epochs/3), momentum 0.9, base_lr 0.01
    static SgdConfig defaults(int max_epochs, std::uint64_t seed);
};

double lr_at(const SgdConfig& config, int epoch);

enum class Trainable { All, HeadOnly };

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
};

// Mean softmax cross-entropy over the batch plus dLoss/dlogits, log-sum-exp stabilized.
struct LossResult {
    double loss = 0.0;
    Tensor dlogits;
    int correct = 0;  // argmax(logits) == label count, ties to lowest index
};
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// In-place SGD over the dataset. Only parameters of layers selected by
// `trainable` move. Strictly single-threaded; bitwise reproducible per seed.
TrainLog train(Model& model, const LabeledDataset& dataset, const SgdConfig& config,
               Trainable trainable = Trainable::All);

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
// numeric via central differences of the batch loss.
double grad_check(const Model& model, const LabeledDataset& batch, double eps);

}  // namespace copycat
