#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace rsmt {

using Coord = std::int64_t;
using NetId = std::int64_t;

inline constexpr Coord kDefaultCoordinateMax = 1'000'000;

struct Point {
    Coord x = 0;
    Coord y = 0;

    friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

constexpr Coord l1_distance(const Point& a, const Point& b) {
    Coord dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    Coord dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx + dy;
}

// A net is the problem instance: the pins that must be connected. Duplicate
// pins are dropped (first occurrence wins); fewer than two distinct pins is a
// DegenerateNet error.
class Net {
public:
    Net(NetId id, std::span<const Point> pins, Coord coordinate_max = kDefaultCoordinateMax);
    Net(NetId id, std::initializer_list<Point> pins) : Net(id, std::span<const Point>(pins.begin(), pins.size())) {}

    NetId id() const noexcept { return id_; }
    const std::vector<Point>& pins() const noexcept { return pins_; }
    std::size_t degree() const noexcept { return pins_.size(); }

    friend bool operator==(const Net&, const Net&) = default;

private:
    NetId id_;
    std::vector<Point> pins_;
};

}  // namespace rsmt
