#include <iostream>

#include <CLI11.hpp>

#include "rsmt/commands.hpp"
#include "rsmt/error.hpp"

namespace {

using namespace rsmt;
namespace cmd = rsmt::commands;

void add_jobs(CLI::App* app, std::size_t& jobs) {
    app->add_option("--jobs", jobs, "Worker threads (0 = all cores); never changes results")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steiner point prediction on Hanan grids with a graph attention network"};
    app.require_subcommand(1);

    cmd::GenArgs gen;
    std::string degrees;
    auto* gen_cmd = app.add_subcommand("gen", "Generate random unlabeled nets");
    gen_cmd->add_option("--degrees", degrees, "Degrees as LO..HI or a comma list")->required();
    gen_cmd->add_option("--per-degree", gen.per_degree, "Nets per degree")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Generator seed")->required();
    gen_cmd->add_option("--coord-max", gen.coordinate_max, "Largest coordinate")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--out", gen.out, "Output dataset (JSON Lines)")->required();

    cmd::LabelArgs label;
    auto* label_cmd = app.add_subcommand("label", "Attach exact Steiner labels and optimal wirelength");
    label_cmd->add_option("--in", label.in, "Input dataset")->required()->check(CLI::ExistingFile);
    label_cmd->add_option("--out", label.out, "Output dataset")->required();
    label_cmd->add_option("--max-degree", label.oracle.max_degree, "Refuse nets above this degree")
        ->check(CLI::PositiveNumber);
    label_cmd->add_flag("--allow-large-degree", label.oracle.allow_large_degree, "Lift the degree guard");
    add_jobs(label_cmd, label.jobs);

    cmd::TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train the model on a labeled dataset");
    train_cmd->add_option("--data", tr.data, "Labeled dataset")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--history", tr.history, "Per-epoch CSV");
    train_cmd->add_option("--seed", tr.config.seed, "Split, initialization and dropout seed")->required();
    train_cmd->add_option("--epochs", tr.config.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--patience", tr.config.patience, "Early stopping patience")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tr.config.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch-size", tr.config.batch_size, "Nets per optimizer step")->check(CLI::PositiveNumber);
    train_cmd->add_option("--l2", tr.config.l2_lambda, "L2 weight")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--alpha", tr.config.loss.alpha, "Focal loss alpha")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--gamma", tr.config.loss.gamma, "Focal loss gamma")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--attention-dropout", tr.config.attention_dropout, "Attention dropout rate")
        ->check(CLI::Range(0.0, 0.999));
    add_jobs(train_cmd, tr.config.jobs);

    cmd::PredictArgs pred;
    auto* predict_cmd = app.add_subcommand("predict", "Predict, route and refine every net");
    predict_cmd->add_option("--model", pred.model, "Checkpoint")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--data", pred.data, "Dataset")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--out", pred.out, "Output (JSON Lines)")->required();
    predict_cmd->add_option("--threshold", pred.threshold, "Selection threshold")->check(CLI::Range(0.0, 1.0));
    predict_cmd->add_option("--batch-size", pred.batch_size, "Nets per inference pass")->check(CLI::PositiveNumber);
    add_jobs(predict_cmd, pred.jobs);

    cmd::EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against oracle labels");
    eval_cmd->add_option("--data", ev.data, "Labeled dataset")->required()->check(CLI::ExistingFile);
    const std::map<std::string, cmd::PredictionSource> sources{{"model", cmd::PredictionSource::Model},
                                                               {"oracle", cmd::PredictionSource::Oracle}};
    eval_cmd->add_option("--source", ev.source, "model or oracle")->transform(CLI::CheckedTransformer(sources));
    eval_cmd->add_option("--model", ev.model, "Checkpoint (with --source model)")->check(CLI::ExistingFile);
    eval_cmd->add_option("--threshold", ev.threshold, "Selection threshold")->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--batch-size", ev.batch_size, "Nets per inference pass")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--report", ev.report, "Text report path (also printed)");
    eval_cmd->add_option("--csv", ev.csv, "Per-net CSV path");
    add_jobs(eval_cmd, ev.jobs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) {
            gen.degrees = cmd::parse_degrees(degrees);
            const auto data = cmd::run_gen(gen);
            std::cout << "wrote " << data.size() << " nets to " << gen.out.string() << '\n';
        } else if (*label_cmd) {
            const auto data = cmd::run_label(label);
            std::cout << "labeled " << data.size() << " nets into " << label.out.string() << '\n';
        } else if (*train_cmd) {
            cmd::run_train(tr, std::cout);
        } else if (*predict_cmd) {
            cmd::run_predict(pred);
        } else if (*eval_cmd) {
            std::cout << format_report(cmd::run_eval(ev));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
