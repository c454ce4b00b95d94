#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "rsmt/checkpoint.hpp"
#include "rsmt/commands.hpp"
#include "rsmt/error.hpp"

using namespace rsmt;
namespace cmd = rsmt::commands;

TEST_CASE("degree lists") {
    CHECK(cmd::parse_degrees("3..8") == std::vector<std::size_t>{3, 4, 5, 6, 7, 8});
    CHECK(cmd::parse_degrees("4") == std::vector<std::size_t>{4});
    CHECK(cmd::parse_degrees("3,5,7") == std::vector<std::size_t>{3, 5, 7});
    CHECK_THROWS_AS(cmd::parse_degrees("8..3"), Error);
    CHECK_THROWS_AS(cmd::parse_degrees("1..3"), Error);
    CHECK_THROWS_AS(cmd::parse_degrees("3,x"), Error);
    CHECK_THROWS_AS(cmd::parse_degrees(""), Error);
}

TEST_CASE("command workflow") {
    const auto dir = std::filesystem::temp_directory_path() / "rsmt-unit-cmd";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    cmd::GenArgs gen{cmd::parse_degrees("3..5"), 20, 7, kDefaultCoordinateMax, dir / "nets.jsonl"};
    CHECK(cmd::run_gen(gen).size() == 60);

    cmd::LabelArgs label{dir / "nets.jsonl", dir / "labeled.jsonl", {}, 2};
    const Dataset labeled = cmd::run_label(label);
    for (const auto& r : labeled) CHECK(r.is_labeled());

    cmd::EvalArgs oracle_eval;
    oracle_eval.data = dir / "labeled.jsonl";
    oracle_eval.source = cmd::PredictionSource::Oracle;
    oracle_eval.csv = dir / "oracle.csv";
    CHECK(cmd::run_eval(oracle_eval).average_accuracy == 1.0);

    cmd::TrainArgs tr;
    tr.data = dir / "labeled.jsonl";
    tr.out = dir / "model.json";
    tr.history = dir / "history.csv";
    tr.config.seed = 1;
    tr.config.max_epochs = 3;
    tr.config.patience = 2;
    tr.config.batch_size = 16;
    std::ostringstream log;
    const TrainResult result = cmd::run_train(tr, log);
    CHECK(load_checkpoint(tr.out).params == result.params);
    const std::string history = read_file(tr.history);
    CHECK(history.rfind("epoch,train_loss,val_loss,val_accuracy\n", 0) == 0);

    cmd::PredictArgs pred{dir / "model.json", dir / "labeled.jsonl", dir / "pred.jsonl", 0.5, 256, 2};
    cmd::run_predict(pred);
    const std::string first = read_file(pred.out);
    pred.jobs = 1;
    cmd::run_predict(pred);
    CHECK(read_file(pred.out) == first);
    CHECK(std::count(first.begin(), first.end(), '\n') == 60);

    cmd::EvalArgs model_eval;
    model_eval.data = dir / "labeled.jsonl";
    model_eval.model = dir / "model.json";
    CHECK_NOTHROW(cmd::run_eval(model_eval));
    model_eval.model.clear();
    CHECK_THROWS_AS(cmd::run_eval(model_eval), Error);

    cmd::TrainArgs unlabeled = tr;
    unlabeled.data = dir / "nets.jsonl";
    CHECK_THROWS_AS(cmd::run_train(unlabeled, log), Error);
}
