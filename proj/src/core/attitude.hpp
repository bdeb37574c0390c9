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

#include <array>

#include "core/frames.hpp"

namespace kitefusion {

inline constexpr double kGravity = 9.80665;  // m/s^2

// Unit quaternion, scalar first: [q1, q2, q3, q4]. Orientation of the wing
// frame K relative to NED.
struct Quat {
  double q1 = 1.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;

  double norm() const;
  Quat normalized() const;
  Quat operator-() const { return {-q1, -q2, -q3, -q4}; }

  bool operator==(const Quat&) const = default;
};

// Body rates about K_x, K_y, K_z in rad/s.
struct BodyRates {
  double wx = 0.0;
  double wy = 0.0;
  double wz = 0.0;

  bool operator==(const BodyRates&) const = default;
};

using QuatRate = std::array<double, 4>;

// Hamilton product a * b.
Quat quat_multiply(const Quat& a, const Quat& b);

// R_K->NED. Throws DomainError if |q| differs from 1 by more than 1e-6.
Mat3 quat_to_rot(const Quat& q);

// Proper rotation matrix to quaternion with q1 >= 0.
Quat rot_to_quat(const Mat3& R);

// q_dot = 1/2 * Omega(w) * q with the 4x4 skew matrix of the kinematic model.
QuatRate quat_derivative(const Quat& q, const BodyRates& w);

// Inverse of quat_derivative: the body rates producing q_dot at q.
BodyRates body_rates_from_derivative(const Quat& q, const QuatRate& q_dot);

// Exact step for rates held constant over dt, followed by renormalization.
// exp(Omega dt / 2) = cos(a) I + sin(a) / |w| Omega with a = |w| dt / 2,
// because Omega^2 = -|w|^2 I.
Quat quat_propagate(const Quat& q, const BodyRates& w, double dt);

// Gravity-compensated inertial acceleration in G from a body-frame
// accelerometer reading: R_NED->G(phi_G) R_K->NED(q) a_K + [0, 0, g].
Vec3 accel_to_inertial(const Vec3& a_K, const Quat& q_hat, double phi_G);

// Accelerometer reading that accel_to_inertial maps back to a_G.
Vec3 inertial_to_accel(const Vec3& a_G, const Quat& q, double phi_G);

}  // namespace kitefusion
