#include "rsmt/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "rsmt/error.hpp"
#include "rsmt/parallel.hpp"

namespace rsmt {

namespace {

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string percent(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * fraction);
    return buf;
}

void require_oracle(const NetRecord& record) {
    if (!record.is_labeled()) {
        throw Error(ErrorCode::MissingOracle, "net " + std::to_string(record.net.id()) + " has no oracle labels/wl_opt");
    }
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const int> selected, std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> chosen(labels.size(), 0);
    for (int idx : selected) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= labels.size()) {
            throw Error(ErrorCode::ShapeError, "selected index " + std::to_string(idx) + " outside " +
                                                   std::to_string(labels.size()) + " labels");
        }
        chosen[static_cast<std::size_t>(idx)] = 1;
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (chosen[i] && labels[i]) ++c.tp;
        else if (chosen[i]) ++c.fp;
        else if (labels[i]) ++c.fn;
    }
    return c;
}

double net_accuracy(const ConfusionCounts& counts) {
    const std::size_t total = counts.tp + counts.fp + counts.fn;
    if (total == 0) return 1.0;
    return static_cast<double>(counts.tp) / static_cast<double>(total);
}

double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t outlier_count(std::span<const double> values) {
    if (values.empty()) return 0;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile(sorted, 0.25);
    const double q3 = quantile(sorted, 0.75);
    const double fence = q3 + 1.5 * (q3 - q1);
    return static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(), [&](double v) { return v > fence; }));
}

std::string degree_bin_label(std::size_t degree) {
    if (degree < 10) return std::to_string(degree);
    if (degree < 50) {
        const std::size_t lo = degree / 10 * 10;
        return std::to_string(lo) + "-" + std::to_string(lo + 9);
    }
    if (degree < 100) return "50-99";
    return ">=100";
}

std::vector<SteinerPrediction> oracle_predictions(std::span<const NetRecord> dataset, double threshold) {
    std::vector<SteinerPrediction> out;
    out.reserve(dataset.size());
    for (const auto& r : dataset) {
        require_oracle(r);
        const HananGrid grid = build_hanan_grid(r.net);
        std::vector<double> probs(grid.size(), 0.0);
        for (int idx : *r.labels) probs.at(static_cast<std::size_t>(idx)) = 1.0;
        out.push_back(select_steiner(grid, std::move(probs), threshold));
    }
    return out;
}

EvalReport evaluate_predictions(std::span<const NetRecord> dataset, std::span<const SteinerPrediction> predictions,
                                std::size_t jobs) {
    if (dataset.size() != predictions.size()) {
        throw Error(ErrorCode::ShapeError, "got " + std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(dataset.size()) + " nets");
    }
    for (const auto& r : dataset) require_oracle(r);

    EvalReport report;
    report.nets.resize(dataset.size());
    parallel_for(dataset.size(), jobs, [&](std::size_t i) {
        const NetRecord& record = dataset[i];
        const SteinerPrediction& pred = predictions[i];
        const RoutedTree initial = route_prediction(record.net, pred);
        const Refinement refined = refine(record.net, pred, initial);

        const LabeledNet labeled = record.to_labeled();
        NetEvaluation& e = report.nets[i];
        e.id = record.net.id();
        e.degree = record.net.degree();
        e.wl = refined.tree.total_wirelength;
        e.wl_opt = *record.wl_opt;
        e.refined = refined.triggered;
        e.accuracy = net_accuracy(confusion_counts(refined.selected, labeled.labels));
        if (e.wl == e.wl_opt) e.accuracy = 1.0;
        e.wl_increase = e.wl_opt > 0 ? static_cast<double>(e.wl - e.wl_opt) / static_cast<double>(e.wl_opt) : 0.0;
    });

    if (report.nets.empty()) return report;

    double accuracy_sum = 0.0;
    std::size_t refined = 0;
    std::vector<double> increases;
    std::map<std::size_t, DegreeBin> bins;  // keyed by the bin's lowest degree
    for (const NetEvaluation& e : report.nets) {
        accuracy_sum += e.accuracy;
        refined += e.refined ? 1 : 0;
        const bool suboptimal = e.wl > e.wl_opt;
        if (suboptimal) increases.push_back(e.wl_increase);

        const std::size_t key = e.degree < 50 ? (e.degree < 10 ? e.degree : e.degree / 10 * 10) : (e.degree < 100 ? 50 : 100);
        DegreeBin& bin = bins[key];
        bin.label = degree_bin_label(e.degree);
        ++bin.nets;
        bin.accuracy += e.accuracy;
        bin.suboptimal += suboptimal ? 1 : 0;
    }
    const auto n = static_cast<double>(report.nets.size());
    report.average_accuracy = accuracy_sum / n;
    report.suboptimal_rate = static_cast<double>(increases.size()) / n;
    report.refined_rate = static_cast<double>(refined) / n;
    for (auto& [key, bin] : bins) {
        bin.accuracy /= static_cast<double>(bin.nets);
        report.degree_bins.push_back(bin);
    }
    if (!increases.empty()) {
        std::vector<double> sorted = increases;
        std::sort(sorted.begin(), sorted.end());
        WirelengthStats s;
        s.count = sorted.size();
        s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
        s.min = sorted.front();
        s.max = sorted.back();
        s.q1 = quantile(sorted, 0.25);
        s.median = quantile(sorted, 0.5);
        s.q3 = quantile(sorted, 0.75);
        report.wl_increase = s;
        report.outlier_count = outlier_count(increases);
    }
    return report;
}

EvalReport evaluate(const ModelParams& params, std::span<const NetRecord> dataset, const EvalOptions& options) {
    for (const auto& r : dataset) require_oracle(r);
    std::vector<Net> nets;
    nets.reserve(dataset.size());
    for (const auto& r : dataset) nets.push_back(r.net);
    const auto predictions = predict_steiner_batch(params, nets, options.threshold, options.batch_size, options.jobs);
    return evaluate_predictions(dataset, predictions, options.jobs);
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    out << "Nets evaluated       " << report.nets.size() << '\n';
    out << "Average accuracy     " << percent(report.average_accuracy) << '\n';
    out << "Suboptimal WL nets   " << percent(report.suboptimal_rate) << '\n';
    if (report.wl_increase) {
        const auto& s = *report.wl_increase;
        out << "Average WL increase  " << percent(s.mean) << '\n';
        out << "Min WL increase      " << percent(s.min) << '\n';
        out << "Max WL increase      " << percent(s.max) << '\n';
        out << "WL increase Q1/Q2/Q3 " << percent(s.q1) << " / " << percent(s.median) << " / " << percent(s.q3) << '\n';
    } else {
        out << "Average WL increase  n/a (no suboptimal nets)\n";
    }
    out << "Outliers (>Q3+1.5IQR) " << report.outlier_count << '\n';
    out << "Refinement ran on    " << percent(report.refined_rate) << '\n';
    out << '\n' << "degree    nets    accuracy    suboptimal\n";
    for (const auto& bin : report.degree_bins) {
        char line[128];
        std::snprintf(line, sizeof line, "%-8s %5zu %11s %13zu\n", bin.label.c_str(), bin.nets,
                      percent(bin.accuracy).c_str(), bin.suboptimal);
        out << line;
    }
    out << '\n' << "average_accuracy=" << full_precision(report.average_accuracy)
        << " suboptimal_rate=" << full_precision(report.suboptimal_rate);
    if (report.wl_increase) out << " mean_wl_increase=" << full_precision(report.wl_increase->mean);
    out << '\n';
    return out.str();
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "net_id,degree,accuracy,wl,wl_opt,wl_increase,refined_flag\n";
    for (const auto& e : report.nets) {
        out << e.id << ',' << e.degree << ',' << full_precision(e.accuracy) << ',' << e.wl << ',' << e.wl_opt << ','
            << full_precision(e.wl_increase) << ',' << (e.refined ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace rsmt
