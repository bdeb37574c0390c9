// Copyright 2026 The Kitefusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/frames.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

// Relative slack on |p_Z| <= r admitting filter outputs that sit a hair
// outside the sphere.
constexpr double kSphereTolerance = 1e-9;

}  // namespace

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Vec3 spherical_to_cartesian(const SphericalPos& s) {
  const double ct = std::cos(s.theta);
  return s.r * Vec3(ct * std::cos(s.phi), ct * std::sin(s.phi),
                    std::sin(s.theta));
}

SphericalAngles cartesian_to_spherical(const Vec3& p, double r) {
  if (!(r > 0.0)) throw DomainError("cartesian_to_spherical: r must be > 0");
  if (std::abs(p.z()) > r * (1.0 + kSphereTolerance)) {
    throw DomainError("cartesian_to_spherical: |p_Z| exceeds the radius");
  }
  if (p.x() == 0.0 && p.y() == 0.0) {
    throw DegenerateError("cartesian_to_spherical: azimuth undefined on Z axis");
  }
  const double s = std::clamp(p.z() / r, -1.0, 1.0);
  return {std::asin(s), wrap_angle(std::atan2(p.y(), p.x()))};
}

Mat3 rot_g_to_l(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  Mat3 R;
  R << -st * cp, -st * sp, ct,
       -sp,       cp,      0.0,
       -cp * ct, -sp * ct, -st;
  return R;
}

Mat3 rot_ned_to_g(double phi_G) {
  const double s = std::sin(phi_G), c = std::cos(phi_G);
  Mat3 R;
  R << c,   s,   0.0,
       s,   -c,  0.0,
       0.0, 0.0, -1.0;
  return R;
}

constexpr double kHorizontalTolerance = 1e-12;

double velocity_angle(const Vec3& v_L) {
  // Rounding leaves a residue of order eps |v| on a vertical vector; its
  // direction is meaningless.
  if (std::hypot(v_L.x(), v_L.y()) <= kHorizontalTolerance * v_L.norm()) {
    throw DegenerateError("velocity_angle: horizontal velocity is zero");
  }
  return wrap_angle(std::atan2(v_L.y(), v_L.x()));
}

}  // namespace kitefusion
