#pragma once

#include <numbers>

namespace magicsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angles closer than this (radians) are treated as equal.
inline constexpr double kAngleTolerance = 1e-9;

// Reduce an angle into [0, 2pi). Values within tolerance of 2pi map to 0.
double canonicalize_angle(double radians);

// True when rz(angle) is a Clifford rotation, i.e. angle is a multiple of pi/2.
bool is_clifford_angle(double radians);

// For a Clifford-equivalent angle returns 0..3 (the multiple of pi/2); -1 otherwise.
int clifford_quarter_turns(double radians);

// Gate name for a Clifford-equivalent rotation: "id", "s", "z", "sdg".
const char* clifford_rotation_name(int quarter_turns);

bool angles_equal(double a, double b);

// Angle of the fixup rotation after a failed injection of rz(angle).
inline double doubled_angle(double radians) { return canonicalize_angle(2.0 * radians); }

inline constexpr double kTAngle = std::numbers::pi / 4.0;
inline constexpr double kTdgAngle = 7.0 * std::numbers::pi / 4.0;

}  // namespace magicsim
