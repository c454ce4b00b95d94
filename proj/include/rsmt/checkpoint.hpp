#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rsmt/gat.hpp"

namespace rsmt {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kCheckpointFormat = "rsmt-gat-checkpoint";

struct TrainingMetadata {
    std::uint64_t seed = 0;
    int epochs_run = 0;
    int best_epoch = 0;
    double best_val_loss = 0.0;

    friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
    ModelParams params;
    TrainingMetadata training;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Single JSON document. Weights are flat row-major arrays of C99 hex-float
// strings, so load(save(x)) reproduces every bit. Kernels are declared with
// shape [heads, in_dim, out_dim]; attention vectors and biases [heads, out_dim].
std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(std::string_view text, const std::string& source = "<string>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string to_hex_float(double value);
double from_hex_float(const std::string& text);

}  // namespace rsmt
