#include "rsmt/routing.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include "rsmt/error.hpp"

namespace rsmt {

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            auto& p = parent_[static_cast<std::size_t>(x)];
            p = parent_[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[static_cast<std::size_t>(a)] < rank_[static_cast<std::size_t>(b)]) std::swap(a, b);
        parent_[static_cast<std::size_t>(b)] = a;
        if (rank_[static_cast<std::size_t>(a)] == rank_[static_cast<std::size_t>(b)]) ++rank_[static_cast<std::size_t>(a)];
        return true;
    }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

constexpr Coord kInfinity = std::numeric_limits<Coord>::max() / 4;

struct WeightedArc {
    int to;
    Coord length;
};

std::vector<std::vector<WeightedArc>> grid_arcs(const HananGrid& grid) {
    std::vector<std::vector<WeightedArc>> arcs(grid.size());
    for (auto [a, b] : grid.edges) {
        Coord len = l1_distance(grid.nodes[static_cast<std::size_t>(a)].point,
                                grid.nodes[static_cast<std::size_t>(b)].point);
        arcs[static_cast<std::size_t>(a)].push_back({b, len});
        arcs[static_cast<std::size_t>(b)].push_back({a, len});
    }
    return arcs;
}

// Dreyfus-Wagner table: cost(mask, v) is the length of a minimum tree in the
// grid graph spanning the pins selected by mask together with node v.
class SteinerTable {
public:
    explicit SteinerTable(const HananGrid& grid)
        : terminals_(grid.pin_indices()), nodes_(grid.size()), cost_((std::size_t{1} << terminals_.size()) * nodes_, kInfinity) {
        const auto arcs = grid_arcs(grid);
        const std::uint32_t full = this->full();
        std::vector<Coord> dist(nodes_);
        using Entry = std::pair<Coord, int>;

        for (std::uint32_t mask = 1; mask <= full; ++mask) {
            Coord* row = &cost_[mask * nodes_];
            if (std::has_single_bit(mask)) {
                row[terminals_[static_cast<std::size_t>(std::countr_zero(mask))]] = 0;
            } else {
                const std::uint32_t low = mask & (~mask + 1);
                for (std::size_t v = 0; v < nodes_; ++v) {
                    Coord best = kInfinity;
                    for (std::uint32_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
                        if ((sub & low) == 0) continue;
                        best = std::min(best, at(sub, v) + at(mask ^ sub, v));
                    }
                    row[v] = best;
                }
            }
            std::copy(row, row + nodes_, dist.begin());
            std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
            for (std::size_t v = 0; v < nodes_; ++v) {
                if (dist[v] < kInfinity) heap.emplace(dist[v], static_cast<int>(v));
            }
            while (!heap.empty()) {
                auto [d, u] = heap.top();
                heap.pop();
                if (d != dist[static_cast<std::size_t>(u)]) continue;
                for (const WeightedArc& arc : arcs[static_cast<std::size_t>(u)]) {
                    Coord nd = d + arc.length;
                    if (nd < dist[static_cast<std::size_t>(arc.to)]) {
                        dist[static_cast<std::size_t>(arc.to)] = nd;
                        heap.emplace(nd, arc.to);
                    }
                }
            }
            std::copy(dist.begin(), dist.end(), row);
        }
    }

    std::uint32_t full() const { return (std::uint32_t{1} << terminals_.size()) - 1; }
    Coord at(std::uint32_t mask, std::size_t v) const { return cost_[mask * nodes_ + v]; }
    Coord optimum() const { return at(full(), static_cast<std::size_t>(terminals_.front())); }

    // True when v has degree >= 3 in some optimal grid Steiner tree: the pins
    // split into three non-empty groups whose trees through v add up to the
    // optimum.
    bool is_branch_node(std::size_t v) const {
        const Coord opt = optimum();
        const std::uint32_t full = this->full();
        if (at(full, v) != opt) return false;
        const std::uint32_t first = full & (~full + 1);
        for (std::uint32_t a = full; a > 0; a = (a - 1) & full) {
            if ((a & first) == 0 || a == full) continue;
            const std::uint32_t rest = full ^ a;
            const std::uint32_t rest_low = rest & (~rest + 1);
            const Coord ca = at(a, v);
            for (std::uint32_t b = rest; b > 0; b = (b - 1) & rest) {
                if ((b & rest_low) == 0 || b == rest) continue;
                if (ca + at(b, v) + at(rest ^ b, v) == opt) return true;
            }
        }
        return false;
    }

private:
    std::vector<int> terminals_;
    std::size_t nodes_;
    std::vector<Coord> cost_;
};

}  // namespace

RoutedTree kruskal_mst(std::span<const TreePoint> points) {
    if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "kruskal_mst needs at least one point");

    const auto n = static_cast<int>(points.size());
    std::vector<TreeEdge> candidates;
    candidates.reserve(points.size() * (points.size() - 1) / 2);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            candidates.push_back(
                {a, b, l1_distance(points[static_cast<std::size_t>(a)].point, points[static_cast<std::size_t>(b)].point)});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const TreeEdge& l, const TreeEdge& r) {
        return std::tie(l.length, l.a, l.b) < std::tie(r.length, r.a, r.b);
    });

    RoutedTree tree;
    tree.points.assign(points.begin(), points.end());
    tree.edges.reserve(points.size() - 1);
    DisjointSet components(points.size());
    for (const TreeEdge& e : candidates) {
        if (!components.unite(e.a, e.b)) continue;
        tree.edges.push_back(e);
        tree.total_wirelength += e.length;
        if (tree.edges.size() + 1 == points.size()) break;
    }
    return tree;
}

RoutedTree route_with_steiner(const Net& net, const HananGrid& grid, std::span<const int> steiner_nodes) {
    std::vector<TreePoint> points;
    points.reserve(net.degree() + steiner_nodes.size());
    for (const Point& p : net.pins()) points.push_back({p, PointKind::Pin});
    for (int idx : steiner_nodes) points.push_back({grid.nodes.at(static_cast<std::size_t>(idx)).point, PointKind::Steiner});
    return kruskal_mst(points);
}

Coord mst_wirelength(std::span<const Point> points) {
    if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "mst_wirelength needs at least one point");
    const std::size_t n = points.size();
    std::vector<Coord> best(n, kInfinity);
    std::vector<bool> done(n, false);
    best[0] = 0;
    Coord total = 0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!done[v] && (u == n || best[v] < best[u])) u = v;
        }
        done[u] = true;
        total += best[u];
        for (std::size_t v = 0; v < n; ++v) {
            if (!done[v]) best[v] = std::min(best[v], l1_distance(points[u], points[v]));
        }
    }
    return total;
}

std::vector<int> tree_degrees(const RoutedTree& tree) {
    std::vector<int> degree(tree.points.size(), 0);
    for (const TreeEdge& e : tree.edges) {
        ++degree[static_cast<std::size_t>(e.a)];
        ++degree[static_cast<std::size_t>(e.b)];
    }
    return degree;
}

Coord hanan_steiner_length(const HananGrid& grid) { return SteinerTable(grid).optimum(); }

OracleSolution exact_rsmt(const Net& net, const OracleOptions& options) {
    if (net.degree() > options.max_degree && !options.allow_large_degree) {
        throw Error(ErrorCode::DegreeTooLarge, "net " + std::to_string(net.id()) + " has degree " +
                                                   std::to_string(net.degree()) + " > max_degree " +
                                                   std::to_string(options.max_degree));
    }
    // The dynamic-programming table holds 2^degree rows of |grid| entries.
    constexpr std::size_t kHardLimit = 12;
    if (net.degree() > kHardLimit) {
        throw Error(ErrorCode::DegreeTooLarge, "net " + std::to_string(net.id()) + ": exact solver is limited to " +
                                                   std::to_string(kHardLimit) + " pins");
    }

    const HananGrid grid = build_hanan_grid(net);
    const SteinerTable table(grid);
    const Coord optimum = table.optimum();

    std::vector<int> eligible;
    for (int c : grid.candidate_indices()) {
        if (table.is_branch_node(static_cast<std::size_t>(c))) eligible.push_back(c);
    }

    std::vector<Point> points(net.pins().begin(), net.pins().end());
    const std::size_t pin_count = points.size();
    const std::size_t max_size = std::min(eligible.size(), net.degree() - 2);

    std::vector<int> chosen;
    std::vector<std::size_t> pick;
    for (std::size_t size = 0; size <= max_size; ++size) {
        // Combinations of `eligible` of this size, in lexicographic order.
        pick.resize(size);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        for (;;) {
            points.resize(pin_count);
            for (std::size_t i : pick) points.push_back(grid.nodes[static_cast<std::size_t>(eligible[i])].point);
            if (mst_wirelength(points) == optimum) {
                for (std::size_t i : pick) chosen.push_back(eligible[i]);
                OracleSolution solution;
                solution.optimal_wirelength = optimum;
                solution.steiner_set = chosen;
                solution.tree = route_with_steiner(net, grid, chosen);
                return solution;
            }
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == eligible.size() - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    throw std::logic_error("exact_rsmt: no candidate subset reached the grid Steiner optimum for net " +
                           std::to_string(net.id()));
}

}  // namespace rsmt
