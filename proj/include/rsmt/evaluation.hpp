#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsmt/dataset.hpp"
#include "rsmt/gat.hpp"
#include "rsmt/predictor.hpp"

namespace rsmt {

// True negatives are deliberately not counted.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion_counts(std::span<const int> selected, std::span<const std::uint8_t> labels);

// tp / (tp + fp + fn), or 1 when all three are zero.
double net_accuracy(const ConfusionCounts& counts);

// Quantile of ascending data by linear interpolation between order statistics
// at position q * (n - 1).
double quantile(std::span<const double> sorted, double q);

// Values strictly above Q3 + 1.5 * (Q3 - Q1).
std::size_t outlier_count(std::span<const double> values);

struct NetEvaluation {
    NetId id = 0;
    std::size_t degree = 0;
    double accuracy = 0.0;  // after the equal-wirelength override
    Coord wl = 0;
    Coord wl_opt = 0;
    double wl_increase = 0.0;  // (wl - wl_opt) / wl_opt
    bool refined = false;
};

struct WirelengthStats {
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct DegreeBin {
    std::string label;
    std::size_t nets = 0;
    double accuracy = 0.0;
    std::size_t suboptimal = 0;
};

struct EvalReport {
    std::vector<NetEvaluation> nets;  // dataset order
    double average_accuracy = 1.0;
    double suboptimal_rate = 0.0;
    std::optional<WirelengthStats> wl_increase;  // suboptimal nets only
    std::size_t outlier_count = 0;
    double refined_rate = 0.0;
    std::vector<DegreeBin> degree_bins;
};

struct EvalOptions {
    double threshold = 0.5;
    std::size_t batch_size = 256;
    std::size_t jobs = 0;
};

// Routes and refines each prediction, then scores it against the oracle.
// Throws MissingOracle if any record lacks labels or optimal wirelength.
EvalReport evaluate_predictions(std::span<const NetRecord> dataset, std::span<const SteinerPrediction> predictions,
                                std::size_t jobs = 0);

EvalReport evaluate(const ModelParams& params, std::span<const NetRecord> dataset, const EvalOptions& options = {});

// Predictions that select exactly the oracle's Steiner nodes.
std::vector<SteinerPrediction> oracle_predictions(std::span<const NetRecord> dataset, double threshold = 0.5);

// Bin label for a net degree: single degrees below 10, then 10-19 .. 40-49,
// 50-99 and >=100.
std::string degree_bin_label(std::size_t degree);

std::string format_report(const EvalReport& report);
// Columns: net_id,degree,accuracy,wl,wl_opt,wl_increase,refined_flag
std::string report_csv(const EvalReport& report);

}  // namespace rsmt
