#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kiloswarm/geometry.hpp"

namespace kiloswarm {

using RobotId = std::uint32_t;

enum class NeighborStrategy { Auto, Grid, Brute };

/// Below this many robots the pairwise scan beats the grid.
inline constexpr std::size_t kGridCrossover = 50;

/// Resolves Auto to Brute or Grid; an explicit override is returned as is.
NeighborStrategy choose_strategy(std::size_t n_robots, NeighborStrategy override_strategy = NeighborStrategy::Auto);

struct CellCoord {
    std::int64_t cx = 0;
    std::int64_t cy = 0;
    auto operator<=>(const CellCoord&) const = default;
};

/// Linked-cell style grid over a positions snapshot.
///
/// Cells are squares of side `cell_size`, anchored at the lower-left corner of
/// the swarm's bounding box. Every robot sits in exactly one bucket; ids inside
/// a bucket are ascending. Compact swarms use a dense cell array, sparse ones
/// (robots scattered far apart) a sorted list of occupied cells.
class NeighborIndex {
public:
    NeighborIndex() = default;

    /// Throws std::invalid_argument naming the robot if a position is not finite.
    static NeighborIndex build(std::span<const Vec2> positions, double cell_size);

    double cell_size() const { return cell_size_; }
    Vec2 origin() const { return origin_; }
    std::size_t robot_count() const { return ids_.size(); }
    bool dense() const { return dense_; }

    CellCoord cell_of(Vec2 p) const;
    std::span<const RobotId> bucket(CellCoord c) const;
    std::vector<CellCoord> occupied_cells() const;

    /// Calls f(id) for every robot in the 3x3 block of cells around p.
    template <class F>
    void for_each_near(Vec2 p, F&& f) const {
        const CellCoord c = cell_of(p);
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                for (RobotId id : bucket({c.cx + dx, c.cy + dy})) {
                    f(id);
                }
            }
        }
    }

private:
    double cell_size_ = 1.0;
    Vec2 origin_{};
    bool dense_ = true;
    std::int64_t nx_ = 0;
    std::int64_t ny_ = 0;
    std::vector<std::uint32_t> cell_start_;  // dense: nx*ny+1 offsets into ids_
    std::vector<CellCoord> cell_keys_;       // sparse: occupied cells, sorted
    std::vector<std::uint32_t> key_start_;   // sparse: offsets into ids_, size keys+1
    std::vector<RobotId> ids_;
};

/// Ids within `range` of robot `id` (centre distance <= range), self excluded,
/// ascending. Requires range <= index.cell_size(); throws std::out_of_range for
/// an unknown id.
std::vector<RobotId> query_range(const NeighborIndex& index, RobotId id, std::span<const Vec2> positions,
                                 double range);
void query_range_into(const NeighborIndex& index, RobotId id, std::span<const Vec2> positions, double range,
                      std::vector<RobotId>& out);

/// Same contract as query_range by direct scan over all robots.
std::vector<RobotId> brute_force_range(std::span<const Vec2> positions, RobotId id, double range);
void brute_force_range_into(std::span<const Vec2> positions, RobotId id, double range, std::vector<RobotId>& out);

/// Calls f(i, j) once for every unordered pair i < j whose centres are
/// strictly closer than `range`. Pair order depends on the strategy.
template <class F>
void for_each_close_pair(std::span<const Vec2> positions, double range, NeighborStrategy strategy, F&& f) {
    if (!(range > 0.0)) {
        return;
    }
    const double range2 = range * range;
    const auto n = static_cast<RobotId>(positions.size());
    if (choose_strategy(positions.size(), strategy) == NeighborStrategy::Brute) {
        for (RobotId i = 0; i < n; ++i) {
            const Vec2 pi = positions[i];
            for (RobotId j = i + 1; j < n; ++j) {
                if ((positions[j] - pi).norm2() < range2) {
                    f(i, j);
                }
            }
        }
        return;
    }
    const NeighborIndex index = NeighborIndex::build(positions, range);
    for (RobotId i = 0; i < n; ++i) {
        const Vec2 pi = positions[i];
        index.for_each_near(pi, [&](RobotId j) {
            if (j > i && (positions[j] - pi).norm2() < range2) {
                f(i, j);
            }
        });
    }
}

}  // namespace kiloswarm
