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

#pragma once

#include <Eigen/Core>

namespace kitefusion {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Position of the wing on the sphere centred at the ground unit.
// theta is the elevation above the (X, Y) plane, phi the azimuth from X.
struct SphericalPos {
  double theta = 0.0;  // rad, [-pi/2, pi/2]
  double phi = 0.0;    // rad, (-pi, pi]
  double r = 1.0;      // m, > 0
};

struct SphericalAngles {
  double theta = 0.0;
  double phi = 0.0;
};

// Maps any angle into (-pi, pi].
double wrap_angle(double angle);

Vec3 spherical_to_cartesian(const SphericalPos& s);

// Inverse of spherical_to_cartesian for a point on (or within 1e-9 relative
// of) the sphere of radius r. Throws DomainError when |p_Z| exceeds r beyond
// that tolerance and DegenerateError when p lies on the Z axis.
SphericalAngles cartesian_to_spherical(const Vec3& p, double r);

// Ground frame G -> local frame L (local north, east, down) at (theta, phi).
Mat3 rot_g_to_l(double theta, double phi);

// NED -> G for a ground unit whose X axis is rotated phi_G from north. The
// matrix is symmetric and its own inverse, so it also maps G -> NED.
Mat3 rot_ned_to_g(double phi_G);

// Velocity angle of a local-frame velocity: atan2(east, north). Throws
// DegenerateError when both horizontal components are zero.
double velocity_angle(const Vec3& v_L);

}  // namespace kitefusion
