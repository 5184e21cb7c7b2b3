#include "kiloswarm/geometry.hpp"

namespace kiloswarm {

double normalize_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (angle >= -std::numbers::pi && angle < std::numbers::pi) {
        return angle;
    }
    double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
    if (wrapped < 0.0) {
        wrapped += two_pi;
    }
    wrapped -= std::numbers::pi;
    // fmod can land exactly on +pi after the shift
    if (wrapped >= std::numbers::pi) {
        wrapped -= two_pi;
    }
    return wrapped;
}

}  // namespace kiloswarm
