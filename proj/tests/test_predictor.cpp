#include <doctest.h>

#include "oracles.hpp"
#include "rsmt/dataset.hpp"
#include "rsmt/error.hpp"
#include "rsmt/predictor.hpp"

using namespace rsmt;

namespace {

SteinerPrediction with_probs(const HananGrid& g, std::vector<std::pair<int, double>> probs) {
    std::vector<double> p(g.size(), 0.0);
    for (auto [i, v] : probs) p[static_cast<std::size_t>(i)] = v;
    return select_steiner(g, std::move(p), 0.5);
}

}  // namespace

TEST_CASE("selection never picks pins") {
    const Net net(0, {{0, 0}, {2, 0}, {1, 2}});
    const HananGrid g = build_hanan_grid(net);
    const SteinerPrediction p = select_steiner(g, std::vector<double>(g.size(), 0.9), 0.5);
    for (int i : p.selected) CHECK(g.nodes[static_cast<std::size_t>(i)].kind == NodeKind::Candidate);
    CHECK(p.selected == g.candidate_indices());
    CHECK(select_steiner(g, std::vector<double>(g.size(), 0.9), 1.0).selected.empty());
    CHECK(select_steiner(g, std::vector<double>(g.size(), 0.5), 0.5).selected.empty());
    CHECK_THROWS_AS(select_steiner(g, std::vector<double>(2, 0.9), 0.5), Error);
}

TEST_CASE("model prediction") {
    const ModelParams params = init_params(4);
    const Net net = random_net(5, 9);
    CHECK(predict_steiner(params, net, 1.0).selected.empty());
    const SteinerPrediction p = predict_steiner(params, net, 0.5);
    const HananGrid g = build_hanan_grid(net);
    for (int i : p.selected) {
        CHECK(g.nodes[static_cast<std::size_t>(i)].kind == NodeKind::Candidate);
        CHECK(p.probabilities[static_cast<std::size_t>(i)] > 0.5);
    }

    std::vector<Net> nets;
    for (std::size_t k = 0; k < 9; ++k) nets.push_back(random_net(3 + k % 5, 100 + k, kDefaultCoordinateMax, static_cast<NetId>(k)));
    const auto batched = predict_steiner_batch(params, nets, 0.5, 4, 2);
    REQUIRE(batched.size() == nets.size());
    for (std::size_t k = 0; k < nets.size(); ++k) {
        const auto single = predict_steiner(params, nets[k], 0.5);
        CHECK(single.selected == batched[k].selected);
        for (std::size_t i = 0; i < single.probabilities.size(); ++i) {
            CHECK(std::abs(single.probabilities[i] - batched[k].probabilities[i]) <= 1e-9);
        }
    }
}

TEST_CASE("routing a prediction") {
    const Net net(0, {{0, 0}, {2, 0}, {1, 2}});
    const HananGrid g = build_hanan_grid(net);
    CHECK(route_prediction(net, with_probs(g, {})).total_wirelength == oracle::prim_wirelength(net.pins()));
    const OracleSolution sol = exact_rsmt(net);
    std::vector<std::pair<int, double>> oracle_probs;
    for (int i : sol.steiner_set) oracle_probs.push_back({i, 0.9});
    CHECK(route_prediction(net, with_probs(g, oracle_probs)).total_wirelength == sol.optimal_wirelength);
}

TEST_CASE("refinement leaves clean trees alone") {
    const Net net(0, {{0, 0}, {2, 0}, {1, 2}});
    const HananGrid g = build_hanan_grid(net);
    const auto pred = with_probs(g, {{g.index_of(1, 0), 0.9}});
    const RoutedTree tree = route_prediction(net, pred);
    const Refinement r = refine(net, pred, tree);
    CHECK(!r.triggered);
    CHECK(r.tree == tree);
    CHECK(r.mst_runs == 0);
}

TEST_CASE("on-path degree-2 node does not change wirelength") {
    // Pins on an L; the selected corner-free point lies on the straight run.
    const Net net(0, {{0, 0}, {10, 0}, {10, 10}, {4, 10}});
    const HananGrid g = build_hanan_grid(net);
    const int on_path = g.index_of(1, 0);  // (4, 0)
    const auto pred = with_probs(g, {{on_path, 0.8}});
    const RoutedTree tree = route_prediction(net, pred);
    REQUIRE(tree_degrees(tree).back() == 2);
    CHECK(tree.total_wirelength == oracle::prim_wirelength(net.pins()));
    const Refinement r = refine(net, pred, tree);
    CHECK(r.triggered);
    CHECK(r.selected.empty());
    CHECK(r.tree.total_wirelength == tree.total_wirelength);
    CHECK(r.tree.total_wirelength == exact_rsmt(net).optimal_wirelength);
}

TEST_CASE("spurious off-path node is removed and the optimum recovered") {
    // Oracle set plus one extra, lower-probability pick that ends up as a
    // degree-2 bend and inflates the wirelength.
    std::size_t cases = 0;
    for (std::uint64_t seed = 0; seed < 400 && cases < 20; ++seed) {
        const Net net = random_net(4 + seed % 3, seed, 1000);
        const HananGrid g = build_hanan_grid(net);
        const OracleSolution sol = exact_rsmt(net);
        for (int extra : g.candidate_indices()) {
            if (std::find(sol.steiner_set.begin(), sol.steiner_set.end(), extra) != sol.steiner_set.end()) continue;
            std::vector<std::pair<int, double>> probs{{extra, 0.6}};
            for (int i : sol.steiner_set) probs.push_back({i, 0.95});
            const auto pred = with_probs(g, probs);
            const RoutedTree tree = route_prediction(net, pred);
            const auto deg = tree_degrees(tree);
            // Steiner points follow the pins in ascending index order
            const auto rank = std::lower_bound(pred.selected.begin(), pred.selected.end(), extra) - pred.selected.begin();
            const bool extra_is_bend = deg[net.degree() + static_cast<std::size_t>(rank)] == 2;
            if (!extra_is_bend || tree.total_wirelength <= sol.optimal_wirelength) continue;
            const Refinement r = refine(net, pred, tree);
            CHECK(r.triggered);
            CHECK(r.final_step == 1);
            CHECK(r.tree.total_wirelength == sol.optimal_wirelength);
            CHECK(r.selected == sol.steiner_set);
            ++cases;
            break;
        }
    }
    CHECK(cases >= 5);
}

TEST_CASE("refinement property on random predictions") {
    Pcg32 rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const Net net = random_net(3 + rng.below(5), 1000 + static_cast<std::uint64_t>(trial), 1000);
        const HananGrid g = build_hanan_grid(net);
        std::vector<double> p(g.size());
        for (double& v : p) v = rng.uniform() < 0.3 ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5);
        const SteinerPrediction pred = select_steiner(g, p, 0.5);
        const RoutedTree tree = route_prediction(net, pred);
        const Refinement r = refine(net, pred, tree);
        CHECK(r.tree.total_wirelength <= tree.total_wirelength);
        CHECK(r.mst_runs <= 2 * static_cast<int>(pred.selected.size()));
        const auto deg = tree_degrees(r.tree);
        for (std::size_t i = net.degree(); i < r.tree.points.size(); ++i) CHECK(deg[i] != 2);
        for (int i : r.selected) CHECK(std::find(pred.selected.begin(), pred.selected.end(), i) != pred.selected.end());
    }
}
