#include "magicsim/angle.h"

#include <cmath>

namespace magicsim {

double canonicalize_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) {
    a += kTwoPi;
  }
  if (a >= kTwoPi - kAngleTolerance || a < kAngleTolerance) {
    return 0.0;
  }
  return a;
}

int clifford_quarter_turns(double radians) {
  const double a = canonicalize_angle(radians);
  const double quarters = a / (kPi / 2.0);
  const double nearest = std::round(quarters);
  if (std::abs(a - nearest * (kPi / 2.0)) > kAngleTolerance) {
    return -1;
  }
  return static_cast<int>(nearest) % 4;
}

bool is_clifford_angle(double radians) { return clifford_quarter_turns(radians) >= 0; }

const char* clifford_rotation_name(int quarter_turns) {
  switch (quarter_turns) {
    case 0:
      return "id";
    case 1:
      return "s";
    case 2:
      return "z";
    case 3:
      return "sdg";
    default:
      return "?";
  }
}

bool angles_equal(double a, double b) {
  const double d = std::abs(canonicalize_angle(a) - canonicalize_angle(b));
  return d <= kAngleTolerance || kTwoPi - d <= kAngleTolerance;
}

}  // namespace magicsim
