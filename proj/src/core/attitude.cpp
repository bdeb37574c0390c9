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

#include "core/attitude.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

constexpr double kUnitTolerance = 1e-6;

void require_unit(const Quat& q, const char* where) {
  if (!(std::abs(q.norm() - 1.0) <= kUnitTolerance)) {
    throw DomainError(std::string(where) + ": quaternion is not unit norm");
  }
}

}  // namespace

Quat quat_multiply(const Quat& a, const Quat& b) {
  return {a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3 - a.q4 * b.q4,
          a.q1 * b.q2 + a.q2 * b.q1 + a.q3 * b.q4 - a.q4 * b.q3,
          a.q1 * b.q3 - a.q2 * b.q4 + a.q3 * b.q1 + a.q4 * b.q2,
          a.q1 * b.q4 + a.q2 * b.q3 - a.q3 * b.q2 + a.q4 * b.q1};
}

double Quat::norm() const {
  return std::sqrt(q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4);
}

Quat Quat::normalized() const {
  const double n = norm();
  return {q1 / n, q2 / n, q3 / n, q4 / n};
}

Mat3 quat_to_rot(const Quat& q) {
  require_unit(q, "quat_to_rot");
  const double q1 = q.q1, q2 = q.q2, q3 = q.q3, q4 = q.q4;
  Mat3 R;
  R << 2.0 * (q1 * q1 + q2 * q2) - 1.0, 2.0 * (q2 * q3 - q1 * q4),
       2.0 * (q2 * q4 + q1 * q3),
       2.0 * (q2 * q3 + q1 * q4), 2.0 * (q1 * q1 + q3 * q3) - 1.0,
       2.0 * (q3 * q4 - q1 * q2),
       2.0 * (q2 * q4 - q1 * q3), 2.0 * (q3 * q4 + q1 * q2),
       2.0 * (q1 * q1 + q4 * q4) - 1.0;
  return R;
}

Quat rot_to_quat(const Mat3& R) {
  // Shepperd: pivot on the largest of the four squared components.
  const double tr = R.trace();
  Quat q;
  if (tr >= R(0, 0) && tr >= R(1, 1) && tr >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s,
         (R(1, 0) - R(0, 1)) / s};
  } else if (R(0, 0) >= R(1, 1) && R(0, 0) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    q = {(R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s,
         (R(0, 2) + R(2, 0)) / s};
  } else if (R(1, 1) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 - R(0, 0) + R(1, 1) - R(2, 2));
    q = {(R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s,
         (R(1, 2) + R(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 - R(0, 0) - R(1, 1) + R(2, 2));
    q = {(R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s,
         (R(1, 2) + R(2, 1)) / s, 0.25 * s};
  }
  if (q.q1 < 0.0) q = -q;
  return q.normalized();
}

QuatRate quat_derivative(const Quat& q, const BodyRates& w) {
  const double wx = w.wx, wy = w.wy, wz = w.wz;
  return {0.5 * (-wx * q.q2 - wy * q.q3 - wz * q.q4),
          0.5 * (wx * q.q1 - wz * q.q3 + wy * q.q4),
          0.5 * (wy * q.q1 + wz * q.q2 - wx * q.q4),
          0.5 * (wz * q.q1 - wy * q.q2 + wx * q.q3)};
}

BodyRates body_rates_from_derivative(const Quat& q, const QuatRate& q_dot) {
  // q_dot = 1/2 [0, w] * q, hence [0, w] = 2 q_dot * conj(q) for unit q.
  const Quat dq{q_dot[0], q_dot[1], q_dot[2], q_dot[3]};
  const Quat conj{q.q1, -q.q2, -q.q3, -q.q4};
  const Quat w = quat_multiply(dq, conj);
  return {2.0 * w.q2, 2.0 * w.q3, 2.0 * w.q4};
}

Quat quat_propagate(const Quat& q, const BodyRates& w, double dt) {
  if (!(dt > 0.0)) throw DomainError("quat_propagate: dt must be > 0");
  const double rate = std::sqrt(w.wx * w.wx + w.wy * w.wy + w.wz * w.wz);
  if (rate == 0.0) return q.normalized();
  const double half_angle = 0.5 * rate * dt;
  const double c = std::cos(half_angle);
  // sin(a) / |w| multiplies Omega; quat_derivative already carries the 1/2.
  const double s = 2.0 * std::sin(half_angle) / rate;
  const QuatRate d = quat_derivative(q, w);
  const Quat next{c * q.q1 + s * d[0], c * q.q2 + s * d[1], c * q.q3 + s * d[2],
                  c * q.q4 + s * d[3]};
  return next.normalized();
}

Vec3 accel_to_inertial(const Vec3& a_K, const Quat& q_hat, double phi_G) {
  return rot_ned_to_g(phi_G) * quat_to_rot(q_hat) * a_K +
         Vec3(0.0, 0.0, kGravity);
}

Vec3 inertial_to_accel(const Vec3& a_G, const Quat& q, double phi_G) {
  // R_NED->G is an involution, so it is its own inverse.
  return quat_to_rot(q).transpose() * rot_ned_to_g(phi_G) *
         (a_G - Vec3(0.0, 0.0, kGravity));
}

}  // namespace kitefusion
