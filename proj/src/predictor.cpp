#include "rsmt/predictor.hpp"

#include <algorithm>

#include "rsmt/error.hpp"
#include "rsmt/parallel.hpp"

namespace rsmt {

namespace {

// Positions (into `selected`) of selected nodes with tree degree 2. The tree
// lists the net's pins first, then the selected nodes in order.
std::vector<std::size_t> degree_two_positions(const RoutedTree& tree, std::size_t pin_count,
                                              std::span<const int> selected) {
    const std::vector<int> degree = tree_degrees(tree);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        if (degree[pin_count + k] == 2) out.push_back(k);
    }
    return out;
}

template <class Positions>
std::size_t least_probable(const SteinerPrediction& prediction, std::span<const int> selected,
                           const Positions& positions) {
    std::size_t best = positions.front();
    for (std::size_t k : positions) {
        const double pk = prediction.probabilities[static_cast<std::size_t>(selected[k])];
        const double pb = prediction.probabilities[static_cast<std::size_t>(selected[best])];
        if (pk < pb || (pk == pb && selected[k] < selected[best])) best = k;
    }
    return best;
}

}  // namespace

SteinerPrediction select_steiner(const HananGrid& grid, std::vector<double> probabilities, double threshold) {
    if (probabilities.size() != grid.size()) {
        throw Error(ErrorCode::ShapeError, "expected " + std::to_string(grid.size()) + " probabilities, got " +
                                               std::to_string(probabilities.size()));
    }
    SteinerPrediction pred;
    pred.threshold = threshold;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.nodes[i].kind == NodeKind::Candidate && probabilities[i] > threshold) {
            pred.selected.push_back(static_cast<int>(i));
        }
    }
    pred.probabilities = std::move(probabilities);
    return pred;
}

SteinerPrediction predict_steiner(const ModelParams& params, const Net& net, double threshold) {
    const HananGrid grid = build_hanan_grid(net);
    const ForwardResult fwd = model_forward(params, grid_graph(grid), ForwardMode::infer());
    return select_steiner(grid, {fwd.probabilities.begin(), fwd.probabilities.end()}, threshold);
}

std::vector<SteinerPrediction> predict_steiner_batch(const ModelParams& params, std::span<const Net> nets,
                                                     double threshold, std::size_t batch_size, std::size_t jobs) {
    batch_size = std::max<std::size_t>(1, batch_size);
    std::vector<SteinerPrediction> out(nets.size());
    const std::size_t chunks = (nets.size() + batch_size - 1) / batch_size;
    parallel_for(chunks, jobs, [&](std::size_t c) {
        const std::size_t begin = c * batch_size;
        const std::size_t end = std::min(nets.size(), begin + batch_size);
        std::vector<HananGrid> grids;
        for (std::size_t i = begin; i < end; ++i) grids.push_back(build_hanan_grid(nets[i]));
        const BatchGraph batch = disjoint_batch(std::move(grids));
        const ForwardResult fwd = model_forward(params, batch, ForwardMode::infer());
        for (std::size_t k = 0; k < batch.member_grids.size(); ++k) {
            const auto& grid = batch.member_grids[k];
            const double* first = fwd.probabilities.data() + batch.offsets[k];
            out[begin + k] = select_steiner(grid, std::vector<double>(first, first + grid.size()), threshold);
        }
    });
    return out;
}

RoutedTree route_prediction(const Net& net, const SteinerPrediction& prediction) {
    return route_with_steiner(net, build_hanan_grid(net), prediction.selected);
}

Refinement refine(const Net& net, const SteinerPrediction& prediction, const RoutedTree& tree) {
    const std::size_t pins = net.degree();
    Refinement result{tree, prediction.selected, false, 0, 0};
    if (degree_two_positions(tree, pins, prediction.selected).empty()) return result;
    result.triggered = true;

    const HananGrid grid = build_hanan_grid(net);

    // Step 1: drop the least probable selected node until no degree-2 node is left.
    std::vector<int> selected = prediction.selected;
    RoutedTree current = tree;
    while (!selected.empty() && !degree_two_positions(current, pins, selected).empty()) {
        std::vector<std::size_t> all(selected.size());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
        selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(least_probable(prediction, selected, all)));
        current = route_with_steiner(net, grid, selected);
        ++result.mst_runs;
    }
    // Step 2: keep it only if it is shorter.
    if (current.total_wirelength < tree.total_wirelength) {
        result.tree = std::move(current);
        result.selected = std::move(selected);
        result.final_step = 1;
        return result;
    }

    // Step 3: from the initial selection, drop degree-2 nodes only.
    selected = prediction.selected;
    current = tree;
    for (auto twos = degree_two_positions(current, pins, selected); !twos.empty();
         twos = degree_two_positions(current, pins, selected)) {
        selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(least_probable(prediction, selected, twos)));
        current = route_with_steiner(net, grid, selected);
        ++result.mst_runs;
    }
    result.tree = std::move(current);
    result.selected = std::move(selected);
    result.final_step = 3;
    return result;
}

}  // namespace rsmt
