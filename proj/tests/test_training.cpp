#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rsmt/dataset.hpp"
#include "rsmt/error.hpp"
#include "rsmt/training.hpp"

using namespace rsmt;

namespace {

std::vector<LabeledNet> labeled_set(std::size_t degree, std::size_t count, std::uint64_t seed) {
    const std::vector<std::size_t> degrees{degree};
    Dataset d = label_dataset(generate_dataset(degrees, count, seed), {}, 1);
    std::vector<LabeledNet> out;
    for (const auto& r : d) out.push_back(r.to_labeled());
    return out;
}

}  // namespace

TEST_CASE("focal loss values") {
    Vector p(1);
    p << 0.5;
    const std::uint8_t one[] = {1};
    const std::uint8_t zero[] = {0};
    CHECK(std::abs(bfl_loss(p, one).loss - 0.8 * 0.25 * std::log(2.0)) < 1e-15);
    CHECK(std::abs(bfl_loss(p, zero).loss - 0.2 * 0.25 * std::log(2.0)) < 1e-15);
    CHECK(std::abs(bfl_loss(p, one).loss - 0.13863) < 1e-5);
    CHECK(std::abs(bfl_loss(p, zero).loss - 0.03466) < 1e-5);

    p << 1.0 - 1e-7;
    CHECK(bfl_loss(p, one).loss < 1e-15);

    Vector two(2);
    CHECK_THROWS_AS(bfl_loss(two, one), Error);
    CHECK_THROWS_AS(bfl_loss(p, one, LossConfig{1.0, 2.0}), Error);
    CHECK_THROWS_AS(bfl_loss(p, one, LossConfig{0.5, -1.0}), Error);
}

TEST_CASE("focal loss gradient matches finite differences") {
    Pcg32 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        Vector p(1);
        p << rng.uniform(0.01, 0.99);
        const std::uint8_t label[] = {static_cast<std::uint8_t>(trial % 2)};
        const LossConfig cfg{rng.uniform(0.05, 0.95), trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 4.0)};
        const double a = bfl_loss(p, label, cfg).grad[0];
        Vector up = p;
        Vector down = p;
        up[0] += 1e-6;
        down[0] -= 1e-6;
        const double n = (bfl_loss(up, label, cfg).loss - bfl_loss(down, label, cfg).loss) / 2e-6;
        CHECK(std::abs(a - n) / std::max(std::abs(a), 1e-8) < 1e-5);
    }
}

TEST_CASE("all-negative predictor has positive loss") {
    Vector p = Vector::Constant(10, 1e-9);
    std::vector<std::uint8_t> labels(10, 0);
    labels[3] = 1;
    CHECK(bfl_loss(p, labels).loss > 0.0);
}

TEST_CASE("l2 penalty") {
    ModelParams p = ModelParams::zeros();
    p.layer1.kernel(0, 0) = 3.0;
    const PenaltyResult r = l2_penalty(p, 0.1);
    CHECK(r.loss == doctest::Approx(0.9));
    CHECK(r.grads.layer1.kernel(0, 0) == doctest::Approx(0.6));
    CHECK(r.grads.layer1.kernel.sum() == doctest::Approx(0.6));

    const ModelParams q = init_params(3);
    CHECK(l2_penalty(q, 0.0).loss == 0.0);
    for (const GatLayerParams* l : l2_penalty(q, 0.0).grads.layers()) {
        for (const Matrix* t : l->tensors()) CHECK(t->isZero());
    }
    ModelParams neg = q;
    for (GatLayerParams* l : neg.layers()) {
        for (Matrix* t : l->tensors()) *t = -*t;
    }
    CHECK(l2_penalty(neg, 0.3).loss == l2_penalty(q, 0.3).loss);
    CHECK_THROWS_AS(l2_penalty(q, -1.0), Error);
}

TEST_CASE("adam") {
    SUBCASE("zero gradients leave params unchanged") {
        ModelParams p = init_params(1);
        const ModelParams before = p;
        AdamState s = AdamState::for_params(p);
        adam_step(s, p, Gradients::zeros_like(p), 0.01);
        CHECK(p == before);
        CHECK(s.step == 1);
    }
    SUBCASE("first step moves by about the learning rate") {
        ModelParams p = init_params(1);
        const ModelParams before = p;
        AdamState s = AdamState::for_params(p);
        Gradients g = Gradients::zeros_like(p);
        g.layer1.kernel(0, 0) = 1.0;
        adam_step(s, p, g, 0.01);
        // m_hat = 1, v_hat = 1 => step = lr / (1 + eps)
        CHECK(before.layer1.kernel(0, 0) - p.layer1.kernel(0, 0) == doctest::Approx(0.01 / (1.0 + 1e-8)).epsilon(1e-12));
    }
    SUBCASE("deterministic") {
        ModelParams p1 = init_params(2);
        ModelParams p2 = p1;
        AdamState s1 = AdamState::for_params(p1);
        AdamState s2 = s1;
        Gradients g = Gradients::zeros_like(p1);
        g.layer2.bias(0, 0) = -0.3;
        adam_step(s1, p1, g, 0.01);
        adam_step(s2, p2, g, 0.01);
        CHECK(p1 == p2);
    }
    SUBCASE("shape mismatch") {
        ModelParams p = init_params(2);
        AdamState s = AdamState::for_params(p);
        Gradients g = Gradients::zeros_like(p);
        g.layer1.kernel = Matrix::Zero(2, 2);
        CHECK_THROWS_AS(adam_step(s, p, g, 0.01), Error);
    }
}

TEST_CASE("labeled net") {
    const Net net(0, {{0, 0}, {2, 0}, {1, 2}});
    const HananGrid g = build_hanan_grid(net);
    const int s = g.index_of(1, 0);
    const LabeledNet l = LabeledNet::from_steiner_set(net, std::vector<int>{s});
    CHECK(l.labels.size() == g.size());
    CHECK(l.steiner_set() == std::vector<int>{s});
    CHECK_THROWS_AS(LabeledNet::from_steiner_set(net, std::vector<int>{g.pin_indices()[0]}), Error);
    CHECK_THROWS_AS(LabeledNet::from_steiner_set(net, std::vector<int>{99}), Error);
}

TEST_CASE("split") {
    const auto data = labeled_set(3, 100, 1);
    const DatasetSplit a = split_dataset(data, 5);
    const DatasetSplit b = split_dataset(data, 5);
    CHECK(a.train.size() == 80);
    CHECK(a.validation.size() == 10);
    CHECK(a.test.size() == 10);
    std::multiset<NetId> ids;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
        for (const auto& n : *part) ids.insert(n.net.id());
    }
    CHECK(ids.size() == 100);
    CHECK(std::set<NetId>(ids.begin(), ids.end()).size() == 100);
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].net.id() == b.train[i].net.id());
    const DatasetSplit c = split_dataset(data, 6);
    bool differs = false;
    for (std::size_t i = 0; i < a.train.size(); ++i) differs |= a.train[i].net.id() != c.train[i].net.id();
    CHECK(differs);
    CHECK_THROWS_AS(split_dataset(std::span(data).first(9), 1), Error);
}

TEST_CASE("early stopping") {
    EarlyStopping s(5);
    int epoch = 0;
    for (double loss : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
        ++epoch;
        s.observe(epoch, loss);
    }
    CHECK(s.should_stop());
    CHECK(s.best_epoch() == 1);

    EarlyStopping t(2);
    t.observe(1, 3.0);
    t.observe(2, 2.0);
    t.observe(3, 2.5);
    CHECK(!t.should_stop());
    t.observe(4, 2.0);  // equal is not an improvement
    CHECK(t.should_stop());
    CHECK(t.best_epoch() == 2);
}

TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.patience = 10;
    c.max_epochs = 5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("worsening validation returns first-epoch params") {
    const auto data = labeled_set(3, 50, 2);
    TrainConfig cfg;
    cfg.patience = 5;
    cfg.max_epochs = 5;
    cfg.seed = 3;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.5;  // large enough to make validation loss erratic
    const TrainResult r = train(cfg, data);
    CHECK(r.history.size() <= 5);
    double best = r.history.front().val_loss;
    for (const auto& h : r.history) best = std::min(best, h.val_loss);
    CHECK(r.best_val_loss == best);
    CHECK(r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_loss == best);
    // the returned params reproduce the best validation loss
    const DatasetSplit split = split_dataset(data, derive_seed(cfg.seed, {0x5011}));
    CHECK(dataset_loss(r.params, split.validation) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("one epoch of descent lowers the training loss") {
    const auto data = labeled_set(3, 200, 4);
    TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.patience = 1;
    cfg.seed = 11;
    cfg.batch_size = 16;
    const DatasetSplit split = split_dataset(data, derive_seed(cfg.seed, {0x5011}));
    const double before = dataset_loss(init_params(derive_seed(cfg.seed, {0x1417})), split.train);
    const TrainResult r = train(cfg, data);
    CHECK(dataset_loss(r.params, split.train) < before);
}

TEST_CASE("training is deterministic and independent of thread count") {
    const auto data = labeled_set(4, 60, 5);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.patience = 3;
    cfg.seed = 2;
    cfg.batch_size = 40;
    cfg.jobs = 1;
    const TrainResult a = train(cfg, data);
    cfg.jobs = 4;
    const TrainResult b = train(cfg, data);
    CHECK(a.params == b.params);
    CHECK(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].val_loss == b.history[i].val_loss);
}
