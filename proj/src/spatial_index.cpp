#include "scooterx/spatial_index.hpp"

#include "scooterx/error.hpp"

#include <algorithm>
#include <cmath>

namespace scooterx {

GridIndex::GridIndex(double cell_size) : cell_size_(cell_size)
{
    if (!(cell_size > 0.0)) {
        throw InvalidArgument("grid cell size must be positive");
    }
}

GridIndex::Key GridIndex::key_of(Vec2 p) const
{
    return {static_cast<std::int64_t>(std::floor(p.x / cell_size_)),
            static_cast<std::int64_t>(std::floor(p.y / cell_size_))};
}

void GridIndex::rebuild(std::span<const Vec2> points)
{
    points_.assign(points.begin(), points.end());
    entries_.clear();
    entries_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        entries_.emplace_back(key_of(points_[i]), i);
    }
    std::sort(entries_.begin(), entries_.end());
}

std::vector<std::size_t> GridIndex::query(Vec2 center, double radius) const
{
    if (!(radius > 0.0)) {
        throw InvalidArgument("query radius must be positive");
    }
    std::vector<std::size_t> out;
    const Key lo = key_of({center.x - radius, center.y - radius});
    const Key hi = key_of({center.x + radius, center.y + radius});
    const double r2 = radius * radius;
    for (std::int64_t cx = lo.first; cx <= hi.first; ++cx) {
        // entries are sorted by (cx, cy): one contiguous run per column
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(Key{cx, lo.second}, std::size_t{0}));
        for (; it != entries_.end() && it->first.first == cx && it->first.second <= hi.second; ++it) {
            const Vec2 p = points_[it->second];
            const double dx = p.x - center.x;
            const double dy = p.y - center.y;
            if (dx * dx + dy * dy <= r2) {
                out.push_back(it->second);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> neighbor_query(std::span<const Vec2> positions, Vec2 center, double radius)
{
    GridIndex index(std::max(radius, 1.0));
    index.rebuild(positions);
    return index.query(center, radius);
}

}  // namespace scooterx
