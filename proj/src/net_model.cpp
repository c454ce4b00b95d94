#include "rsmt/net_model.hpp"

#include <algorithm>
#include <string>

#include "rsmt/error.hpp"

namespace rsmt {

Net::Net(NetId id, std::span<const Point> pins, Coord coordinate_max) : id_(id) {
    pins_.reserve(pins.size());
    for (const Point& p : pins) {
        if (p.x < 0 || p.y < 0 || p.x > coordinate_max || p.y > coordinate_max) {
            throw Error(ErrorCode::DegenerateNet, "net " + std::to_string(id) + ": pin (" + std::to_string(p.x) +
                                                      "," + std::to_string(p.y) + ") outside [0, " +
                                                      std::to_string(coordinate_max) + "]");
        }
        if (std::find(pins_.begin(), pins_.end(), p) == pins_.end()) pins_.push_back(p);
    }
    if (pins_.size() < 2) {
        throw Error(ErrorCode::DegenerateNet,
                    "net " + std::to_string(id) + " has fewer than 2 distinct pins");
    }
}

std::vector<int> HananGrid::pin_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == NodeKind::Pin) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> HananGrid::candidate_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == NodeKind::Candidate) out.push_back(static_cast<int>(i));
    }
    return out;
}

Adjacency Adjacency::from_edges(std::size_t node_count, std::span<const std::pair<int, int>> edges) {
    std::vector<std::vector<int>> lists(node_count);
    for (auto [a, b] : edges) {
        lists[static_cast<std::size_t>(a)].push_back(b);
        lists[static_cast<std::size_t>(b)].push_back(a);
    }
    Adjacency adj;
    adj.row_ptr.reserve(node_count + 1);
    adj.cols.reserve(edges.size() * 2);
    for (auto& l : lists) {
        std::sort(l.begin(), l.end());
        adj.cols.insert(adj.cols.end(), l.begin(), l.end());
        adj.row_ptr.push_back(static_cast<int>(adj.cols.size()));
    }
    return adj;
}

HananGrid build_hanan_grid(const Net& net) {
    const auto& pins = net.pins();
    if (pins.size() < 2) {
        throw Error(ErrorCode::DegenerateNet, "net " + std::to_string(net.id()) + " has fewer than 2 distinct pins");
    }
    HananGrid grid;
    grid.net_id = net.id();
    for (const Point& p : pins) {
        grid.xs.push_back(p.x);
        grid.ys.push_back(p.y);
    }
    std::sort(grid.xs.begin(), grid.xs.end());
    grid.xs.erase(std::unique(grid.xs.begin(), grid.xs.end()), grid.xs.end());
    std::sort(grid.ys.begin(), grid.ys.end());
    grid.ys.erase(std::unique(grid.ys.begin(), grid.ys.end()), grid.ys.end());

    std::vector<Point> sorted_pins(pins.begin(), pins.end());
    std::sort(sorted_pins.begin(), sorted_pins.end());

    const std::size_t nx = grid.xs.size();
    const std::size_t ny = grid.ys.size();
    grid.nodes.reserve(nx * ny);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            Point p{grid.xs[ix], grid.ys[iy]};
            bool is_pin = std::binary_search(sorted_pins.begin(), sorted_pins.end(), p);
            grid.nodes.push_back({p, is_pin ? NodeKind::Pin : NodeKind::Candidate});
        }
    }
    grid.edges.reserve(ny * (nx - 1) + nx * (ny - 1));
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            int here = grid.index_of(ix, iy);
            if (iy + 1 < ny) grid.edges.emplace_back(here, grid.index_of(ix, iy + 1));
            if (ix + 1 < nx) grid.edges.emplace_back(here, grid.index_of(ix + 1, iy));
        }
    }
    return grid;
}

FeatureMatrix grid_features(const HananGrid& grid) {
    const Coord x0 = grid.xs.front();
    const Coord y0 = grid.ys.front();
    const Coord extent = std::max(grid.xs.back() - x0, grid.ys.back() - y0);
    // extent > 0 because a grid always has at least two distinct pins.
    const double scale = kFeatureScale / static_cast<double>(extent);

    FeatureMatrix features(static_cast<Eigen::Index>(grid.size()), kFeatureDim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const GridNode& node = grid.nodes[i];
        auto row = static_cast<Eigen::Index>(i);
        features(row, 0) = std::min(kFeatureScale, static_cast<double>(node.point.x - x0) * scale);
        features(row, 1) = std::min(kFeatureScale, static_cast<double>(node.point.y - y0) * scale);
        features(row, 2) = node.kind == NodeKind::Pin ? 1.0 : 0.0;
    }
    return features;
}

FeatureMatrix normalize_features(const Net& net) { return grid_features(build_hanan_grid(net)); }

Graph grid_graph(const HananGrid& grid) {
    return Graph{grid_features(grid), Adjacency::from_edges(grid.size(), grid.edges)};
}

BatchGraph disjoint_batch(std::vector<HananGrid> grids) {
    if (grids.empty()) throw Error(ErrorCode::EmptyBatch, "cannot batch an empty list of grids");

    std::vector<Graph> graphs;
    graphs.reserve(grids.size());
    for (const auto& g : grids) graphs.push_back(grid_graph(g));
    std::vector<const Graph*> members;
    for (const auto& g : graphs) members.push_back(&g);

    BatchGraph batch;
    batch.graph = disjoint_union(members, &batch.offsets);
    batch.member_grids = std::move(grids);
    return batch;
}

Graph disjoint_union(std::span<const Graph* const> graphs, std::vector<int>* offsets) {
    if (graphs.empty()) throw Error(ErrorCode::EmptyBatch, "cannot batch an empty list of graphs");

    std::size_t total_nodes = 0;
    std::size_t total_cols = 0;
    for (const Graph* g : graphs) {
        total_nodes += g->node_count();
        total_cols += g->adjacency.cols.size();
    }

    Graph out;
    out.features.resize(static_cast<Eigen::Index>(total_nodes), kFeatureDim);
    out.adjacency.row_ptr.reserve(total_nodes + 1);
    out.adjacency.cols.reserve(total_cols);
    int offset = 0;
    for (const Graph* g : graphs) {
        if (offsets != nullptr) offsets->push_back(offset);
        const auto n = static_cast<Eigen::Index>(g->node_count());
        out.features.middleRows(offset, n) = g->features;
        const int col_base = static_cast<int>(out.adjacency.cols.size());
        for (std::size_t i = 1; i < g->adjacency.row_ptr.size(); ++i) {
            out.adjacency.row_ptr.push_back(col_base + g->adjacency.row_ptr[i]);
        }
        for (int c : g->adjacency.cols) out.adjacency.cols.push_back(c + offset);
        offset += static_cast<int>(n);
    }
    return out;
}

}  // namespace rsmt
