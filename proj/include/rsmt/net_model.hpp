#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsmt/geometry.hpp"

namespace rsmt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class NodeKind : std::uint8_t { Pin, Candidate };

struct GridNode {
    Point point;
    NodeKind kind = NodeKind::Candidate;

    friend bool operator==(const GridNode&, const GridNode&) = default;
};

// Hanan grid of a net. Nodes are stored in canonical order: ascending x, then
// ascending y, so node (ix, iy) lives at index ix * ys.size() + iy.
struct HananGrid {
    NetId net_id = 0;
    std::vector<Coord> xs;
    std::vector<Coord> ys;
    std::vector<GridNode> nodes;
    std::vector<std::pair<int, int>> edges;  // (lower index, higher index)

    std::size_t size() const noexcept { return nodes.size(); }
    int index_of(std::size_t ix, std::size_t iy) const { return static_cast<int>(ix * ys.size() + iy); }
    std::vector<int> pin_indices() const;
    std::vector<int> candidate_indices() const;

    friend bool operator==(const HananGrid&, const HananGrid&) = default;
};

inline constexpr int kFeatureDim = 3;
inline constexpr double kFeatureScale = 100.0;

// Rows in canonical node order: (x_norm, y_norm, is_pin).
using FeatureMatrix = Matrix;

// Compressed neighbor lists (self excluded), sorted ascending per node.
struct Adjacency {
    std::vector<int> row_ptr{0};
    std::vector<int> cols;

    std::size_t node_count() const noexcept { return row_ptr.size() - 1; }
    std::span<const int> neighbors(std::size_t i) const {
        return {cols.data() + row_ptr[i], static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
    }
    static Adjacency from_edges(std::size_t node_count, std::span<const std::pair<int, int>> edges);
};

// A graph ready for the attention network: one feature row per node.
struct Graph {
    FeatureMatrix features;
    Adjacency adjacency;

    std::size_t node_count() const noexcept { return adjacency.node_count(); }
};

// Disjoint union of several grids; adjacency is block diagonal.
struct BatchGraph {
    std::vector<HananGrid> member_grids;
    std::vector<int> offsets;
    Graph graph;

    std::size_t node_count() const noexcept { return graph.node_count(); }
};

HananGrid build_hanan_grid(const Net& net);
FeatureMatrix grid_features(const HananGrid& grid);
FeatureMatrix normalize_features(const Net& net);
Graph grid_graph(const HananGrid& grid);
BatchGraph disjoint_batch(std::vector<HananGrid> grids);

// Block-diagonal union of already built graphs, in order. Row offsets of each
// member are appended to `offsets` when given.
Graph disjoint_union(std::span<const Graph* const> graphs, std::vector<int>* offsets = nullptr);

}  // namespace rsmt
