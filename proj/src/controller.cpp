#include "kiloswarm/controller.hpp"

#include "kiloswarm/random.hpp"

namespace kiloswarm {

void SoftRng::reseed(std::uint64_t seed) {
    state_ = mix_seed(seed, 0x6b696c6fULL);
    if (state_ == 0) {
        state_ = 0x9e3779b97f4a7c15ULL;
    }
}

std::uint8_t SoftRng::next() {
    // xorshift64*, top byte
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return static_cast<std::uint8_t>((state_ * 0x2545f4914f6cdd1dULL) >> 56);
}

void Controller::set_motors(std::uint8_t left, std::uint8_t right) {
    robot_->motors.left = left;
    robot_->motors.right = right;
}

void Controller::spinup_motors() { robot_->motors.spinup_remaining_s = 0.015; }

void Controller::delay(std::uint16_t /*ms*/) {}

void Controller::set_color(Led led) { robot_->led = rgb(led.r, led.g, led.b); }

std::uint16_t Controller::get_ambientlight() const {
    return robot_->env ? sample_light(robot_->pose, *robot_->env) : 0;
}

std::uint8_t Controller::rand_soft() { return robot_->soft_rng.next(); }

void Controller::rand_seed(std::uint8_t seed) { robot_->soft_rng.reseed(seed); }

}  // namespace kiloswarm
