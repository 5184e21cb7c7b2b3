#include "kiloswarm/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kiloswarm {

NeighborStrategy choose_strategy(std::size_t n_robots, NeighborStrategy override_strategy) {
    if (override_strategy != NeighborStrategy::Auto) {
        return override_strategy;
    }
    return n_robots < kGridCrossover ? NeighborStrategy::Brute : NeighborStrategy::Grid;
}

NeighborIndex NeighborIndex::build(std::span<const Vec2> positions, double cell_size) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw std::invalid_argument("neighbor index: cell size must be positive and finite");
    }
    NeighborIndex index;
    index.cell_size_ = cell_size;
    const std::size_t n = positions.size();
    if (n == 0) {
        index.cell_start_ = {0};
        return index;
    }

    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo.x, -lo.y};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = positions[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("neighbor index: robot " + std::to_string(i) + " has a non-finite position");
        }
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    index.origin_ = lo;

    const double span_x = std::floor((hi.x - lo.x) / cell_size) + 1.0;
    const double span_y = std::floor((hi.y - lo.y) / cell_size) + 1.0;
    const double n_cells = span_x * span_y;
    index.dense_ = n_cells <= 4.0 * static_cast<double>(n) + 1024.0;

    std::vector<CellCoord> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
        cells[i] = index.cell_of(positions[i]);
    }

    index.ids_.resize(n);
    if (index.dense_) {
        index.nx_ = static_cast<std::int64_t>(span_x);
        index.ny_ = static_cast<std::int64_t>(span_y);
        const auto total = static_cast<std::size_t>(index.nx_ * index.ny_);
        index.cell_start_.assign(total + 1, 0);
        auto flat = [&](const CellCoord& c) { return static_cast<std::size_t>(c.cy * index.nx_ + c.cx); };
        // counting sort: ids end up ascending inside each cell
        for (const CellCoord& c : cells) {
            ++index.cell_start_[flat(c) + 1];
        }
        for (std::size_t k = 0; k < total; ++k) {
            index.cell_start_[k + 1] += index.cell_start_[k];
        }
        std::vector<std::uint32_t> fill(index.cell_start_.begin(), index.cell_start_.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            index.ids_[fill[flat(cells[i])]++] = static_cast<RobotId>(i);
        }
        return index;
    }

    std::vector<RobotId> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = static_cast<RobotId>(i);
    }
    std::sort(order.begin(), order.end(), [&](RobotId a, RobotId b) {
        return cells[a] != cells[b] ? cells[a] < cells[b] : a < b;
    });
    for (std::size_t k = 0; k < n; ++k) {
        const RobotId id = order[k];
        if (k == 0 || cells[id] != cells[order[k - 1]]) {
            index.cell_keys_.push_back(cells[id]);
            index.key_start_.push_back(static_cast<std::uint32_t>(k));
        }
        index.ids_[k] = id;
    }
    index.key_start_.push_back(static_cast<std::uint32_t>(n));
    return index;
}

CellCoord NeighborIndex::cell_of(Vec2 p) const {
    return {static_cast<std::int64_t>(std::floor((p.x - origin_.x) / cell_size_)),
            static_cast<std::int64_t>(std::floor((p.y - origin_.y) / cell_size_))};
}

std::span<const RobotId> NeighborIndex::bucket(CellCoord c) const {
    if (dense_) {
        if (c.cx < 0 || c.cy < 0 || c.cx >= nx_ || c.cy >= ny_) {
            return {};
        }
        const auto k = static_cast<std::size_t>(c.cy * nx_ + c.cx);
        return std::span<const RobotId>(ids_).subspan(cell_start_[k], cell_start_[k + 1] - cell_start_[k]);
    }
    const auto it = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), c);
    if (it == cell_keys_.end() || *it != c) {
        return {};
    }
    const auto k = static_cast<std::size_t>(it - cell_keys_.begin());
    return std::span<const RobotId>(ids_).subspan(key_start_[k], key_start_[k + 1] - key_start_[k]);
}

std::vector<CellCoord> NeighborIndex::occupied_cells() const {
    if (!dense_) {
        return cell_keys_;
    }
    std::vector<CellCoord> out;
    for (std::int64_t cy = 0; cy < ny_; ++cy) {
        for (std::int64_t cx = 0; cx < nx_; ++cx) {
            const auto k = static_cast<std::size_t>(cy * nx_ + cx);
            if (cell_start_[k + 1] > cell_start_[k]) {
                out.push_back({cx, cy});
            }
        }
    }
    return out;
}

void query_range_into(const NeighborIndex& index, RobotId id, std::span<const Vec2> positions, double range,
                      std::vector<RobotId>& out) {
    out.clear();
    if (id >= positions.size() || id >= index.robot_count()) {
        throw std::out_of_range("query_range: unknown robot id " + std::to_string(id));
    }
    if (range > index.cell_size()) {
        throw std::invalid_argument("query_range: range exceeds the index cell size");
    }
    const Vec2 p = positions[id];
    const double range2 = range * range;
    index.for_each_near(p, [&](RobotId other) {
        if (other != id && (positions[other] - p).norm2() <= range2) {
            out.push_back(other);
        }
    });
    std::sort(out.begin(), out.end());
}

std::vector<RobotId> query_range(const NeighborIndex& index, RobotId id, std::span<const Vec2> positions,
                                 double range) {
    std::vector<RobotId> out;
    query_range_into(index, id, positions, range, out);
    return out;
}

void brute_force_range_into(std::span<const Vec2> positions, RobotId id, double range, std::vector<RobotId>& out) {
    out.clear();
    if (id >= positions.size()) {
        throw std::out_of_range("brute_force_range: unknown robot id " + std::to_string(id));
    }
    const Vec2 p = positions[id];
    const double range2 = range * range;
    for (RobotId other = 0; other < positions.size(); ++other) {
        if (other != id && (positions[other] - p).norm2() <= range2) {
            out.push_back(other);
        }
    }
}

std::vector<RobotId> brute_force_range(std::span<const Vec2> positions, RobotId id, double range) {
    std::vector<RobotId> out;
    brute_force_range_into(positions, id, range, out);
    return out;
}

}  // namespace kiloswarm
