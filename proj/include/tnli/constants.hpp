#pragma once

#include <numbers>

namespace tnli::constants {

// CODATA 2018 exact values.
inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;    // m / s
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace tnli::constants
