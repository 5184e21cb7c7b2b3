#include "kiloswarm/comms.hpp"

#include <algorithm>
#include <vector>

namespace kiloswarm {

double estimate_distance(double true_distance_mm, double noise_std_mm, Rng& rng) {
    if (noise_std_mm <= 0.0) {
        return std::max(0.0, true_distance_mm);
    }
    return std::max(0.0, true_distance_mm + gaussian(rng, noise_std_mm));
}

void deliver_messages(std::span<RobotSlot> robots, std::span<const Vec2> positions, const NeighborIndex* grid,
                      const ChannelParams& params, std::uint64_t tick, Rng& rng, ChannelStats& stats) {
    std::vector<RobotId> receivers;
    for (RobotSlot& sender : robots) {
        const RobotId id = sender.robot.id;
        if (!transmit_slot_open(id, tick, params.tx_period_ticks)) {
            continue;
        }
        const std::optional<Payload> payload = sender.controller->message_tx();
        if (!payload) {
            continue;
        }
        ++stats.transmissions;
        if (grid != nullptr) {
            query_range_into(*grid, id, positions, params.comm_radius_mm, receivers);
        } else {
            brute_force_range_into(positions, id, params.comm_radius_mm, receivers);
        }
        const Message msg{*payload, id};
        for (RobotId r : receivers) {
            ++stats.offers;
            if (uniform01(rng) >= params.msg_success_prob) {
                continue;
            }
            ++stats.deliveries;
            const double d = (positions[r] - positions[id]).norm();
            robots[r].controller->message_rx(msg, estimate_distance(d, params.distance_noise_std_mm, rng));
        }
        sender.controller->message_tx_success();
    }
}

}  // namespace kiloswarm
