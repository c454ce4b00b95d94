#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rsmt/gat.hpp"
#include "rsmt/geometry.hpp"

namespace rsmt {

struct LossConfig {
    double alpha = 0.8;  // weight of the Steiner (label 1) class
    double gamma = 2.0;

    void validate() const;
};

inline constexpr double kProbabilityClamp = 1e-7;

struct LossResult {
    double loss = 0.0;
    Vector grad;  // d loss / d probability
};

// Binary focal loss, summed over nodes. Label-1 terms are
// -alpha (1-p)^gamma log p, label-0 terms -(1-alpha) p^gamma log(1-p).
// Probabilities are clamped to [1e-7, 1 - 1e-7]; the gradient is the
// derivative of the summed terms evaluated at the clamped probability.
LossResult bfl_loss(const Vector& probabilities, std::span<const std::uint8_t> labels, const LossConfig& config = {});

struct PenaltyResult {
    double loss = 0.0;
    Gradients grads;
};

// lambda * sum of squares over every kernel, bias and attention vector.
PenaltyResult l2_penalty(const ModelParams& params, double lambda);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    Gradients first_moment;
    Gradients second_moment;

    static AdamState for_params(const ModelParams& params);
};

// Bias-corrected Adam update, in place.
void adam_step(AdamState& state, ModelParams& params, const Gradients& grads, double learning_rate);

// A net with one binary label per canonical Hanan-grid node.
struct LabeledNet {
    Net net;
    std::vector<std::uint8_t> labels;

    // Labels from a list of Steiner node indices; checks that each index is a
    // candidate node of the net's grid.
    static LabeledNet from_steiner_set(Net net, std::span<const int> steiner_set);
    std::vector<int> steiner_set() const;
};

struct DatasetSplit {
    std::vector<LabeledNet> train;
    std::vector<LabeledNet> validation;
    std::vector<LabeledNet> test;
};

// Deterministic shuffled 80/10/10 partition; needs at least 10 nets.
DatasetSplit split_dataset(std::span<const LabeledNet> data, std::uint64_t seed);

struct TrainConfig {
    double learning_rate = 0.01;
    int patience = 5;
    int max_epochs = 100;
    std::size_t batch_size = 256;
    double l2_lambda = 5e-4;
    std::uint64_t seed = 0;
    LossConfig loss;
    double threshold = 0.5;
    double attention_dropout = ModelDefaults::attention_dropout;
    std::size_t jobs = 0;  // 0: all hardware threads; never changes results

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // mean focal loss per net, accumulated during the epoch
    double val_loss = 0.0;    // mean focal loss per net, inference mode
    double val_accuracy = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_val_loss = 0.0;
    double test_accuracy = 0.0;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::size_t test_size = 0;
};

// Tracks the best validation loss and reports when `patience` epochs have
// passed without improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    // Returns true if this epoch improved on the best loss so far.
    bool observe(int epoch, double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    int patience_;
    int best_epoch_ = 0;
    int since_best_ = 0;
    double best_loss_ = 0.0;
    bool seen_ = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Splits the data 80/10/10, trains with Adam on focal loss + L2, stops early
// on validation loss and returns the best-validation parameters.
TrainResult train(const TrainConfig& config, std::span<const LabeledNet> data, const EpochCallback& on_epoch = {});

// Mean focal loss per net under inference-mode forward passes.
double dataset_loss(const ModelParams& params, std::span<const LabeledNet> nets, const LossConfig& loss = {},
                    std::size_t jobs = 0);

// Mean per-net confusion accuracy of thresholded predictions against labels
// (no routing, no wirelength override).
double dataset_accuracy(const ModelParams& params, std::span<const LabeledNet> nets, double threshold = 0.5,
                        std::size_t jobs = 0);

}  // namespace rsmt
