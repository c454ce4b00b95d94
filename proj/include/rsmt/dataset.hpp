#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsmt/geometry.hpp"
#include "rsmt/routing.hpp"
#include "rsmt/training.hpp"

namespace rsmt {

// One line of a dataset file. Labels, when present, are canonical indices of
// the optimal Steiner nodes of the net's Hanan grid.
struct NetRecord {
    Net net;
    std::optional<std::vector<int>> labels;
    std::optional<Coord> wl_opt;

    bool is_labeled() const { return labels.has_value() && wl_opt.has_value(); }
    LabeledNet to_labeled() const;

    friend bool operator==(const NetRecord&, const NetRecord&) = default;
};

using Dataset = std::vector<NetRecord>;

// `degree` distinct pins, uniform over [0, coordinate_max]^2, duplicates
// resampled. Throws DegreeTooSmall for degree < 2.
Net random_net(std::size_t degree, std::uint64_t seed, Coord coordinate_max = kDefaultCoordinateMax, NetId id = 0);

// nets_per_degree unlabeled nets for each degree, ids 0.. in generation order.
// Net k of degree d draws from a seed derived from (seed, d, k).
Dataset generate_dataset(std::span<const std::size_t> degrees, std::size_t nets_per_degree, std::uint64_t seed,
                         Coord coordinate_max = kDefaultCoordinateMax);

// Attaches exact oracle labels and optimal wirelength to every record.
// Throws DegreeTooLarge naming all offending ids before doing any work.
Dataset label_dataset(Dataset dataset, const OracleOptions& options = {}, std::size_t jobs = 0);

// Label indices must be candidate nodes of the net's grid.
void validate_labels(const NetRecord& record);

// JSON Lines: {"id":..,"degree":..,"pins":[[x,y],..],"labels":[..],"wl_opt":..}
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

// Writes via a sibling temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace rsmt
