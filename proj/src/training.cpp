#include "rsmt/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rsmt/error.hpp"
#include "rsmt/evaluation.hpp"
#include "rsmt/parallel.hpp"
#include "rsmt/prng.hpp"

namespace rsmt {

namespace {

// Nets per gradient shard. Fixed so that results never depend on the number
// of worker threads.
constexpr std::size_t kShardSize = 32;

struct PreparedNet {
    const LabeledNet* source;
    HananGrid grid;
    Graph graph;
};

std::vector<PreparedNet> prepare(std::span<const LabeledNet> nets, std::size_t jobs) {
    std::vector<PreparedNet> out(nets.size());
    parallel_for(nets.size(), jobs, [&](std::size_t i) {
        out[i].source = &nets[i];
        out[i].grid = build_hanan_grid(nets[i].net);
        out[i].graph = grid_graph(out[i].grid);
        if (out[i].grid.size() != nets[i].labels.size()) {
            throw Error(ErrorCode::ShapeError, "net " + std::to_string(nets[i].net.id()) + " has " +
                                                   std::to_string(nets[i].labels.size()) + " labels for " +
                                                   std::to_string(out[i].grid.size()) + " grid nodes");
        }
    });
    return out;
}

struct ShardOutput {
    double loss = 0.0;
    std::optional<Gradients> grads;
    double accuracy_sum = 0.0;
};

// Forward (and optionally backward) over the disjoint union of some nets.
ShardOutput run_shard(const ModelParams& params, std::span<const PreparedNet* const> members, ForwardMode mode,
                      const LossConfig& loss_cfg, bool want_grads, double threshold, bool want_accuracy) {
    std::vector<const Graph*> graphs;
    std::vector<std::uint8_t> labels;
    for (const PreparedNet* m : members) {
        graphs.push_back(&m->graph);
        labels.insert(labels.end(), m->source->labels.begin(), m->source->labels.end());
    }
    std::vector<int> offsets;
    const Graph batch = disjoint_union(graphs, &offsets);
    ForwardResult fwd = model_forward(params, batch, mode);
    LossResult loss = bfl_loss(fwd.probabilities, labels, loss_cfg);

    ShardOutput out;
    out.loss = loss.loss;
    if (want_grads) out.grads = model_backward(params, fwd.cache, loss.grad);
    if (want_accuracy) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            const HananGrid& grid = members[k]->grid;
            const double* p = fwd.probabilities.data() + offsets[k];
            std::vector<int> selected;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (grid.nodes[i].kind == NodeKind::Candidate && p[i] > threshold) selected.push_back(static_cast<int>(i));
            }
            out.accuracy_sum += net_accuracy(confusion_counts(selected, members[k]->source->labels));
        }
    }
    return out;
}

std::vector<std::vector<const PreparedNet*>> make_shards(std::span<const PreparedNet* const> nets) {
    std::vector<std::vector<const PreparedNet*>> shards;
    for (std::size_t i = 0; i < nets.size(); i += kShardSize) {
        const std::size_t end = std::min(nets.size(), i + kShardSize);
        shards.emplace_back(nets.begin() + static_cast<std::ptrdiff_t>(i), nets.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return shards;
}

struct Totals {
    double loss = 0.0;
    double accuracy = 0.0;
};

Totals inference_totals(const ModelParams& params, std::span<const PreparedNet> nets, const LossConfig& loss_cfg,
                        double threshold, std::size_t jobs) {
    std::vector<const PreparedNet*> ptrs;
    for (const auto& n : nets) ptrs.push_back(&n);
    const auto shards = make_shards(ptrs);
    std::vector<ShardOutput> outputs(shards.size());
    parallel_for(shards.size(), jobs, [&](std::size_t s) {
        outputs[s] = run_shard(params, shards[s], ForwardMode::infer(), loss_cfg, false, threshold, true);
    });
    Totals t;
    for (const auto& o : outputs) {
        t.loss += o.loss;
        t.accuracy += o.accuracy_sum;
    }
    return t;
}

}  // namespace

void LossConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "focal alpha must lie in (0, 1)");
    if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "focal gamma must be >= 0");
}

LossResult bfl_loss(const Vector& probabilities, std::span<const std::uint8_t> labels, const LossConfig& config) {
    config.validate();
    if (static_cast<std::size_t>(probabilities.size()) != labels.size()) {
        throw Error(ErrorCode::ShapeError, std::to_string(probabilities.size()) + " probabilities for " +
                                               std::to_string(labels.size()) + " labels");
    }
    const double a = config.alpha;
    const double g = config.gamma;
    LossResult out;
    out.grad.resize(probabilities.size());
    for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
        const double raw = probabilities[i];
        const double p = std::clamp(raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
        // The clamp makes the loss flat outside the band.
        const bool clamped = raw < kProbabilityClamp || raw > 1.0 - kProbabilityClamp;
        if (labels[static_cast<std::size_t>(i)]) {
            const double q = 1.0 - p;
            const double lp = std::log(p);
            out.loss += -a * std::pow(q, g) * lp;
            const double focal_term = g == 0.0 ? 0.0 : g * std::pow(q, g - 1.0) * lp;
            out.grad[i] = clamped ? 0.0 : a * (focal_term - std::pow(q, g) / p);
        } else {
            const double lq = std::log1p(-p);
            out.loss += -(1.0 - a) * std::pow(p, g) * lq;
            const double focal_term = g == 0.0 ? 0.0 : g * std::pow(p, g - 1.0) * lq;
            out.grad[i] = clamped ? 0.0 : -(1.0 - a) * (focal_term - std::pow(p, g) / (1.0 - p));
        }
    }
    return out;
}

PenaltyResult l2_penalty(const ModelParams& params, double lambda) {
    if (lambda < 0.0) throw Error(ErrorCode::InvalidConfig, "L2 lambda must be >= 0");
    PenaltyResult out{0.0, Gradients::zeros_like(params)};
    for (std::size_t l = 0; l < 2; ++l) {
        auto src = params.layers()[l]->tensors();
        auto dst = out.grads.layers()[l]->tensors();
        for (std::size_t t = 0; t < src.size(); ++t) {
            out.loss += lambda * src[t]->squaredNorm();
            *dst[t] = 2.0 * lambda * *src[t];
        }
    }
    return out;
}

AdamState AdamState::for_params(const ModelParams& params) {
    AdamState s;
    s.first_moment = Gradients::zeros_like(params);
    s.second_moment = Gradients::zeros_like(params);
    return s;
}

void adam_step(AdamState& state, ModelParams& params, const Gradients& grads, double learning_rate) {
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < 2; ++l) {
        auto w = params.layers()[l]->tensors();
        auto g = grads.layers()[l]->tensors();
        auto m = state.first_moment.layers()[l]->tensors();
        auto v = state.second_moment.layers()[l]->tensors();
        for (std::size_t t = 0; t < w.size(); ++t) {
            if (g[t]->rows() != w[t]->rows() || g[t]->cols() != w[t]->cols() || m[t]->size() != w[t]->size()) {
                throw Error(ErrorCode::ShapeError, "gradient/optimizer shapes do not match parameters");
            }
            for (Eigen::Index i = 0; i < w[t]->size(); ++i) {
                const double gi = g[t]->data()[i];
                double& mi = m[t]->data()[i];
                double& vi = v[t]->data()[i];
                mi = state.beta1 * mi + (1.0 - state.beta1) * gi;
                vi = state.beta2 * vi + (1.0 - state.beta2) * gi * gi;
                const double m_hat = mi / c1;
                const double v_hat = vi / c2;
                w[t]->data()[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
            }
        }
    }
}

LabeledNet LabeledNet::from_steiner_set(Net net, std::span<const int> steiner_set) {
    const HananGrid grid = build_hanan_grid(net);
    std::vector<std::uint8_t> labels(grid.size(), 0);
    for (int idx : steiner_set) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= grid.size() ||
            grid.nodes[static_cast<std::size_t>(idx)].kind != NodeKind::Candidate) {
            throw Error(ErrorCode::ShapeError, "net " + std::to_string(net.id()) + ": label " + std::to_string(idx) +
                                                   " is not a candidate node");
        }
        labels[static_cast<std::size_t>(idx)] = 1;
    }
    return LabeledNet{std::move(net), std::move(labels)};
}

std::vector<int> LabeledNet::steiner_set() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

DatasetSplit split_dataset(std::span<const LabeledNet> data, std::uint64_t seed) {
    if (data.size() < 10) {
        throw Error(ErrorCode::TooFewNets, "need at least 10 nets to split, got " + std::to_string(data.size()));
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Pcg32 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const auto tenth = static_cast<std::size_t>(std::llround(static_cast<double>(data.size()) * 0.1));
    const std::size_t n_val = tenth;
    const std::size_t n_test = tenth;
    const std::size_t n_train = data.size() - n_val - n_test;

    DatasetSplit split;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const LabeledNet& net = data[order[k]];
        if (k < n_train) split.train.push_back(net);
        else if (k < n_train + n_val) split.validation.push_back(net);
        else split.test.push_back(net);
    }
    return split;
}

void TrainConfig::validate() const {
    loss.validate();
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
    if (patience <= 0) throw Error(ErrorCode::InvalidConfig, "patience must be positive");
    if (max_epochs <= 0) throw Error(ErrorCode::InvalidConfig, "max_epochs must be positive");
    if (patience > max_epochs) throw Error(ErrorCode::InvalidConfig, "patience must not exceed max_epochs");
    if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch size must be positive");
    if (!(l2_lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "L2 lambda must be >= 0");
    if (!(attention_dropout >= 0.0 && attention_dropout < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "attention dropout must lie in [0, 1)");
    }
}

bool EarlyStopping::observe(int epoch, double val_loss) {
    if (!seen_ || val_loss < best_loss_) {
        seen_ = true;
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

TrainResult train(const TrainConfig& config, std::span<const LabeledNet> data, const EpochCallback& on_epoch) {
    config.validate();
    if (data.empty()) throw Error(ErrorCode::TooFewNets, "no training data");

    const DatasetSplit split = split_dataset(data, derive_seed(config.seed, {0x5011}));
    const auto train_set = prepare(split.train, config.jobs);
    const auto val_set = prepare(split.validation, config.jobs);
    const auto test_set = prepare(split.test, config.jobs);

    TrainResult result;
    result.train_size = train_set.size();
    result.validation_size = val_set.size();
    result.test_size = test_set.size();

    ModelParams params = init_params(derive_seed(config.seed, {0x1417}));
    params.attention_dropout_rate = config.attention_dropout;
    AdamState adam = AdamState::for_params(params);
    EarlyStopping stopper(config.patience);
    ModelParams best = params;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Pcg32 shuffle_rng(derive_seed(config.seed, {0xE90C, static_cast<std::uint64_t>(epoch)}));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        for (std::size_t begin = 0, batch = 0; begin < order.size(); begin += config.batch_size, ++batch) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            std::vector<const PreparedNet*> members;
            for (std::size_t k = begin; k < end; ++k) members.push_back(&train_set[order[k]]);
            const auto shards = make_shards(members);

            std::vector<ShardOutput> outputs(shards.size());
            parallel_for(shards.size(), config.jobs, [&](std::size_t s) {
                const auto mode = ForwardMode::training(
                    derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), batch, s}));
                outputs[s] = run_shard(params, shards[s], mode, config.loss, true, config.threshold, false);
            });

            PenaltyResult penalty = l2_penalty(params, config.l2_lambda);
            Gradients total = std::move(penalty.grads);
            for (const auto& o : outputs) {
                total += *o.grads;
                epoch_loss += o.loss;
            }
            adam_step(adam, params, total, config.learning_rate);
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = train_set.empty() ? 0.0 : epoch_loss / static_cast<double>(train_set.size());
        const Totals val = inference_totals(params, val_set, config.loss, config.threshold, config.jobs);
        record.val_loss = val.loss / static_cast<double>(val_set.size());
        record.val_accuracy = val.accuracy / static_cast<double>(val_set.size());
        result.history.push_back(record);
        if (on_epoch) on_epoch(record);

        if (stopper.observe(epoch, record.val_loss)) best = params;
        if (stopper.should_stop()) break;
    }

    result.params = std::move(best);
    result.best_epoch = stopper.best_epoch();
    result.best_val_loss = stopper.best_loss();
    const Totals test = inference_totals(result.params, test_set, config.loss, config.threshold, config.jobs);
    result.test_accuracy = test.accuracy / static_cast<double>(test_set.size());
    return result;
}

double dataset_loss(const ModelParams& params, std::span<const LabeledNet> nets, const LossConfig& loss,
                    std::size_t jobs) {
    if (nets.empty()) return 0.0;
    const auto prepared = prepare(nets, jobs);
    return inference_totals(params, prepared, loss, 0.5, jobs).loss / static_cast<double>(nets.size());
}

double dataset_accuracy(const ModelParams& params, std::span<const LabeledNet> nets, double threshold,
                        std::size_t jobs) {
    if (nets.empty()) return 1.0;
    const auto prepared = prepare(nets, jobs);
    return inference_totals(params, prepared, LossConfig{}, threshold, jobs).accuracy / static_cast<double>(nets.size());
}

}  // namespace rsmt
