#include "photongate/rng.hpp"

#include <cmath>
#include <numbers>

namespace photongate {

double EventRng::exponential(double mean) noexcept {
    // 1 - u lies in (0, 1], so the log is finite.
    return -mean * std::log1p(-uniform());
}

double EventRng::normal() noexcept {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace photongate
