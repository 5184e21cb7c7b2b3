#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "kiloswarm/controller.hpp"
#include "kiloswarm/neighbor_index.hpp"
#include "kiloswarm/random.hpp"

namespace kiloswarm {

struct ChannelParams {
    double comm_radius_mm = 100.0;
    double msg_success_prob = 1.0;
    double distance_noise_std_mm = 0.0;
    std::uint32_t tx_period_ticks = 16;
};

/// Running totals over a world's lifetime.
struct ChannelStats {
    std::uint64_t transmissions = 0;
    std::uint64_t offers = 0;      // (sender, in-range receiver) pairs
    std::uint64_t deliveries = 0;  // offers that survived the loss draw

    double delivered_fraction() const {
        return offers == 0 ? 0.0 : static_cast<double>(deliveries) / static_cast<double>(offers);
    }
};

/// A robot together with the controller instance that drives it.
struct RobotSlot {
    Robot robot;
    std::unique_ptr<Controller> controller;
};

/// Transmit slots are staggered by id: robot `id` may send on ticks where
/// (tick + id) is a multiple of the period.
constexpr bool transmit_slot_open(RobotId id, std::uint64_t tick, std::uint32_t period) {
    return period != 0 && (tick + id) % period == 0;
}

/// max(0, true distance + N(0, noise_std)); no draw when noise_std is zero.
double estimate_distance(double true_distance_mm, double noise_std_mm, Rng& rng);

/// One tick of message traffic. Senders are visited in ascending id; each
/// sender with an open slot and an armed message_tx() offers the message to
/// every robot within comm radius (ascending id). Every offer consumes one
/// uniform draw for the loss test, and every successful one a Gaussian draw
/// for the distance estimate, before the receiver's message_rx runs.
///
/// `grid` selects the neighbor search: null scans all robots, otherwise the
/// index must cover `positions` with cell size >= comm radius.
void deliver_messages(std::span<RobotSlot> robots, std::span<const Vec2> positions, const NeighborIndex* grid,
                      const ChannelParams& params, std::uint64_t tick, Rng& rng, ChannelStats& stats);

}  // namespace kiloswarm
