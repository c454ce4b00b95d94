#pragma once

#include <span>
#include <vector>

#include "rsmt/gat.hpp"
#include "rsmt/routing.hpp"

namespace rsmt {

struct SteinerPrediction {
    std::vector<double> probabilities;  // one per canonical grid node
    std::vector<int> selected;          // candidate nodes with probability > threshold, ascending
    double threshold = 0.5;
};

// Candidate nodes whose probability exceeds the threshold. Pins are never
// selected.
SteinerPrediction select_steiner(const HananGrid& grid, std::vector<double> probabilities, double threshold);

SteinerPrediction predict_steiner(const ModelParams& params, const Net& net, double threshold = 0.5);

// One inference pass per chunk of `batch_size` nets over their disjoint union.
std::vector<SteinerPrediction> predict_steiner_batch(const ModelParams& params, std::span<const Net> nets,
                                                     double threshold = 0.5, std::size_t batch_size = 256,
                                                     std::size_t jobs = 0);

// MST over the pins and the selected candidate points.
RoutedTree route_prediction(const Net& net, const SteinerPrediction& prediction);

struct Refinement {
    RoutedTree tree;
    std::vector<int> selected;  // surviving Steiner nodes, ascending
    bool triggered = false;     // the routed tree had a degree-2 selected node
    int mst_runs = 0;
    int final_step = 0;         // 1 or 3 when triggered
};

// Degree-2 clean-up. When the routed tree has a selected node of tree degree
// 2: first drop the lowest-probability selected node (any degree), re-routing
// after each removal, until no degree-2 selected node remains; keep that
// result if it is shorter. Otherwise start over from the initial selection and
// drop only degree-2 nodes, lowest probability first. Ties go to the lowest
// node index. The returned wirelength never exceeds the input's.
Refinement refine(const Net& net, const SteinerPrediction& prediction, const RoutedTree& tree);

}  // namespace rsmt
