#pragma once

#include "scooterx/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace scooterx {

// Uniform bucket grid over a point set. Rebuilt wholesale for each snapshot;
// queries are exact (candidates are distance-checked).
class GridIndex {
public:
    explicit GridIndex(double cell_size);

    void rebuild(std::span<const Vec2> points);

    // Indices of points within `radius` of `center` (inclusive), ascending.
    std::vector<std::size_t> query(Vec2 center, double radius) const;

private:
    using Key = std::pair<std::int64_t, std::int64_t>;
    Key key_of(Vec2 p) const;

    double cell_size_;
    std::vector<Vec2> points_;
    // (cell key, point index), sorted by key
    std::vector<std::pair<Key, std::size_t>> entries_;
};

std::vector<std::size_t> neighbor_query(std::span<const Vec2> positions, Vec2 center, double radius);

}  // namespace scooterx
