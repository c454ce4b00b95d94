#include "rsmt/commands.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rsmt/checkpoint.hpp"
#include "rsmt/error.hpp"
#include "rsmt/parallel.hpp"

namespace rsmt::commands {

namespace {

std::size_t parse_count(std::string_view s, const std::string& whole) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidConfig, "bad degree list '" + whole + "'");
    }
    return v;
}

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<LabeledNet> labeled_nets(const Dataset& data, const std::string& source) {
    std::vector<LabeledNet> out;
    out.reserve(data.size());
    for (const auto& r : data) {
        if (!r.is_labeled()) {
            throw Error(ErrorCode::MissingOracle, source + ": net " + std::to_string(r.net.id()) + " is not labeled");
        }
        out.push_back(r.to_labeled());
    }
    return out;
}

}  // namespace

std::vector<std::size_t> parse_degrees(const std::string& text) {
    std::vector<std::size_t> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const std::size_t lo = parse_count(std::string_view(text).substr(0, dots), text);
        const std::size_t hi = parse_count(std::string_view(text).substr(dots + 2), text);
        if (lo > hi) throw Error(ErrorCode::InvalidConfig, "empty degree range '" + text + "'");
        for (std::size_t d = lo; d <= hi; ++d) out.push_back(d);
    } else {
        std::string_view rest = text;
        while (true) {
            const auto comma = rest.find(',');
            out.push_back(parse_count(rest.substr(0, comma), text));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }
    for (std::size_t d : out) {
        if (d < 2) throw Error(ErrorCode::DegreeTooSmall, "degree " + std::to_string(d) + " in '" + text + "' is below 2");
    }
    return out;
}

Dataset run_gen(const GenArgs& args) {
    if (args.degrees.empty()) throw Error(ErrorCode::InvalidConfig, "no degrees given");
    if (args.per_degree == 0) throw Error(ErrorCode::InvalidConfig, "--per-degree must be positive");
    Dataset data = generate_dataset(args.degrees, args.per_degree, args.seed, args.coordinate_max);
    save_dataset(args.out, data);
    return data;
}

Dataset run_label(const LabelArgs& args) {
    Dataset data = label_dataset(load_dataset(args.in), args.oracle, args.jobs);
    save_dataset(args.out, data);
    return data;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,val_accuracy\n";
    for (const auto& h : history) {
        out << h.epoch << ',' << full_precision(h.train_loss) << ',' << full_precision(h.val_loss) << ','
            << full_precision(h.val_accuracy) << '\n';
    }
    return out.str();
}

TrainResult run_train(const TrainArgs& args, std::ostream& log) {
    args.config.validate();
    const Dataset data = load_dataset(args.data);
    const auto nets = labeled_nets(data, args.data.string());
    TrainResult result = train(args.config, nets, [&](const EpochRecord& r) {
        char line[160];
        std::snprintf(line, sizeof line, "epoch %3d  train_loss %.6f  val_loss %.6f  val_accuracy %.4f\n", r.epoch,
                      r.train_loss, r.val_loss, r.val_accuracy);
        log << line << std::flush;
    });
    Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.training.seed = args.config.seed;
    ckpt.training.epochs_run = static_cast<int>(result.history.size());
    ckpt.training.best_epoch = result.best_epoch;
    ckpt.training.best_val_loss = result.best_val_loss;
    save_checkpoint(args.out, ckpt);
    if (!args.history.empty()) write_file_atomically(args.history, history_csv(result.history));
    log << "split " << result.train_size << '/' << result.validation_size << '/' << result.test_size
        << "  best epoch " << result.best_epoch << "  test accuracy " << full_precision(result.test_accuracy) << '\n';
    return result;
}

void run_predict(const PredictArgs& args) {
    const Checkpoint ckpt = load_checkpoint(args.model);
    const Dataset data = load_dataset(args.data);
    std::vector<Net> nets;
    nets.reserve(data.size());
    for (const auto& r : data) nets.push_back(r.net);
    const auto predictions = predict_steiner_batch(ckpt.params, nets, args.threshold, args.batch_size, args.jobs);

    std::vector<std::string> lines(nets.size());
    parallel_for(nets.size(), args.jobs, [&](std::size_t i) {
        const RoutedTree initial = route_prediction(nets[i], predictions[i]);
        const Refinement refined = refine(nets[i], predictions[i], initial);
        nlohmann::ordered_json j;
        j["id"] = nets[i].id();
        j["degree"] = nets[i].degree();
        j["selected"] = refined.selected;
        j["wl"] = refined.tree.total_wirelength;
        j["refined"] = refined.triggered;
        lines[i] = j.dump() + "\n";
    });
    std::string out;
    for (const auto& l : lines) out += l;
    write_file_atomically(args.out, out);
}

EvalReport run_eval(const EvalArgs& args) {
    const Dataset data = load_dataset(args.data);
    EvalReport report;
    if (args.source == PredictionSource::Oracle) {
        report = evaluate_predictions(data, oracle_predictions(data, args.threshold), args.jobs);
    } else {
        if (args.model.empty()) throw Error(ErrorCode::InvalidConfig, "--model is required with --source model");
        const Checkpoint ckpt = load_checkpoint(args.model);
        report = evaluate(ckpt.params, data, EvalOptions{args.threshold, args.batch_size, args.jobs});
    }
    if (!args.report.empty()) write_file_atomically(args.report, format_report(report));
    if (!args.csv.empty()) write_file_atomically(args.csv, report_csv(report));
    return report;
}

}  // namespace rsmt::commands
