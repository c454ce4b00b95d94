#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rsmt/geometry.hpp"
#include "rsmt/net_model.hpp"

namespace rsmt {

enum class PointKind : std::uint8_t { Pin, Steiner };

struct TreePoint {
    Point point;
    PointKind kind = PointKind::Pin;

    friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

struct TreeEdge {
    int a = 0;  // a < b
    int b = 0;
    Coord length = 0;

    friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

// Spanning tree over pins and Steiner points with L1 edge lengths.
struct RoutedTree {
    std::vector<TreePoint> points;
    std::vector<TreeEdge> edges;
    Coord total_wirelength = 0;

    friend bool operator==(const RoutedTree&, const RoutedTree&) = default;
};

struct OracleSolution {
    Coord optimal_wirelength = 0;
    std::vector<int> steiner_set;  // canonical grid indices, ascending
    RoutedTree tree;
};

struct OracleOptions {
    std::size_t max_degree = 9;
    // Lifts the degree guard; runtime grows exponentially with degree.
    bool allow_large_degree = false;
};

// Minimum spanning tree over the complete L1 graph. Edges are taken in
// (length, lower index, higher index) order so the tree is fully
// deterministic. Throws EmptyPointSet on empty input.
RoutedTree kruskal_mst(std::span<const TreePoint> points);

// Pins of the net (in net order) followed by the given grid nodes as Steiner
// points, routed with kruskal_mst.
RoutedTree route_with_steiner(const Net& net, const HananGrid& grid, std::span<const int> steiner_nodes);

// Wirelength of an MST over the points; cheaper than building the tree.
Coord mst_wirelength(std::span<const Point> points);

std::vector<int> tree_degrees(const RoutedTree& tree);

// Length of a minimum Steiner tree of the pins inside the Hanan grid graph,
// which equals the rectilinear Steiner minimal tree length.
Coord hanan_steiner_length(const HananGrid& grid);

// Exact RSMT. Among all candidate subsets S with |S| <= degree - 2 that
// minimise the MST wirelength of pins + S, returns the one with the fewest
// points and then the lexicographically smallest index list.
//
// The optimum is computed first with a Dreyfus-Wagner dynamic program over
// the Hanan grid. A candidate can only belong to a fewest-point optimal set if
// it is a branching node (degree >= 3) of some optimal grid Steiner tree,
// which the same table answers exactly. Subsets of those candidates are then
// enumerated by size and in lexicographic order; the first one whose MST
// reaches the optimum is the answer.
OracleSolution exact_rsmt(const Net& net, const OracleOptions& options = {});

}  // namespace rsmt
