#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsmt/evaluation.hpp"
#include "rsmt/training.hpp"

// Workflows behind the command-line tool. Each one reads and writes only the
// paths it is given.
namespace rsmt::commands {

// "3..8" (inclusive range) or "3,5,7".
std::vector<std::size_t> parse_degrees(const std::string& text);

struct GenArgs {
    std::vector<std::size_t> degrees;
    std::size_t per_degree = 0;
    std::uint64_t seed = 0;
    Coord coordinate_max = kDefaultCoordinateMax;
    std::filesystem::path out;
};
Dataset run_gen(const GenArgs& args);

struct LabelArgs {
    std::filesystem::path in;
    std::filesystem::path out;
    OracleOptions oracle;
    std::size_t jobs = 0;
};
Dataset run_label(const LabelArgs& args);

struct TrainArgs {
    std::filesystem::path data;
    std::filesystem::path out;
    std::filesystem::path history;  // empty: no history file
    TrainConfig config;
};
// Progress lines go to `log`.
TrainResult run_train(const TrainArgs& args, std::ostream& log);

std::string history_csv(const std::vector<EpochRecord>& history);

struct PredictArgs {
    std::filesystem::path model;
    std::filesystem::path data;
    std::filesystem::path out;
    double threshold = 0.5;
    std::size_t batch_size = 256;
    std::size_t jobs = 0;
};
// JSON Lines: id, degree, selected (after refinement), wl, refined.
void run_predict(const PredictArgs& args);

enum class PredictionSource { Model, Oracle };

struct EvalArgs {
    std::filesystem::path data;
    PredictionSource source = PredictionSource::Model;
    std::filesystem::path model;  // required for PredictionSource::Model
    double threshold = 0.5;
    std::size_t batch_size = 256;
    std::size_t jobs = 0;
    std::filesystem::path report;  // empty: no file
    std::filesystem::path csv;     // empty: no file
};
EvalReport run_eval(const EvalArgs& args);

}  // namespace rsmt::commands
