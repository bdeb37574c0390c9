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

#include "core/lineangle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

constexpr int kMaxNewtonIterations = 50;
constexpr double kNewtonTolerance = 1e-12;
constexpr double kJacobianStep = 1e-7;
// Relative size of the horizontal line component below which the azimuth
// is not defined.
constexpr double kVerticalTolerance = 1e-12;

Eigen::Vector2d residual(const EncoderReading& guess, double theta, double phi,
                         const EncoderGeometry& geo) {
  const SphericalAngles a = encoder_to_angles(guess, geo);
  return {a.theta - theta, wrap_angle(a.phi - phi)};
}

// Starting point for the inversion: the pulley end is where the ray from the
// attachment point P1 = (l2, 0, -l1) along the line direction meets the
// sphere of radius L traced by the rod. Falls back to the zero-offset
// inverse when the ray misses the sphere.
EncoderReading initial_guess(double theta, double phi, const EncoderGeometry& geo) {
  const double L = std::hypot(geo.rod_length, geo.pulley_length);
  const double tilt = std::atan2(geo.rod_length, geo.pulley_length);
  const Eigen::Vector3d p1(geo.horizontal_offset, 0.0, -geo.vertical_offset);
  const Eigen::Vector3d u(std::cos(theta) * std::cos(phi),
                          std::cos(theta) * std::sin(phi), std::sin(theta));
  const double b = p1.dot(u);
  const double disc = b * b - p1.squaredNorm() + L * L;
  if (disc < 0.0) return {theta + tilt, phi};
  const double t = -b + std::sqrt(disc);
  if (!(t > 0.0)) return {theta + tilt, phi};
  const Eigen::Vector3d q = p1 + t * u;
  return {std::asin(std::clamp(q.z() / L, -1.0, 1.0)) + tilt, std::atan2(q.y(), q.x())};
}

}  // namespace

void EncoderGeometry::validate() const {
  if (!(rod_length >= 0.0) || !(pulley_length >= 0.0) ||
      !(vertical_offset >= 0.0) || !(horizontal_offset >= 0.0)) {
    throw DomainError("encoder geometry: lengths must be finite and >= 0");
  }
  if (!(std::hypot(rod_length, pulley_length) > 0.0) ||
      !std::isfinite(rod_length + pulley_length + vertical_offset +
                     horizontal_offset)) {
    throw DomainError("encoder geometry: rod and pulley cannot both be zero");
  }
}

SphericalAngles encoder_to_angles(const EncoderReading& reading,
                                  const EncoderGeometry& geo) {
  const double L1 = geo.rod_length, L2 = geo.pulley_length;
  const double L = std::hypot(L1, L2);
  const double theta_b = reading.theta_B - std::atan2(L1, L2);
  const double l1p = L * std::sin(theta_b);
  const double l2p = L * std::cos(theta_b) * std::cos(reading.phi_B) -
                     geo.horizontal_offset;
  const double l3p = L * std::cos(theta_b) * std::sin(reading.phi_B);
  const double horizontal = std::hypot(l2p, l3p);
  if (horizontal <= kVerticalTolerance * (L + geo.horizontal_offset)) {
    throw DegenerateError("encoder_to_angles: line direction is vertical");
  }
  return {std::atan((l1p + geo.vertical_offset) / horizontal),
          wrap_angle(std::atan2(l3p, l2p))};
}

Vec3 angles_to_position(double theta, double phi, double r) {
  if (!(r > 0.0)) throw DomainError("angles_to_position: r must be > 0");
  return spherical_to_cartesian({theta, phi, r});
}

double quantize_angle(double angle, int counts_per_rev) {
  if (counts_per_rev <= 0) return angle;
  const double step = 2.0 * kPi / counts_per_rev;
  return std::round(angle / step) * step;
}

EncoderReading angles_to_encoder(double theta, double phi,
                                 const EncoderGeometry& geo,
                                 int counts_per_rev) {
  geo.validate();
  EncoderReading x = initial_guess(theta, phi, geo);
  Eigen::Vector2d f = residual(x, theta, phi, geo);
  int iter = 0;
  while (f.lpNorm<Eigen::Infinity>() > kNewtonTolerance) {
    if (++iter > kMaxNewtonIterations) {
      throw NumericalError("angles_to_encoder: Newton iteration did not converge");
    }
    Eigen::Matrix2d J;
    for (int col = 0; col < 2; ++col) {
      EncoderReading hi = x, lo = x;
      (col == 0 ? hi.theta_B : hi.phi_B) += kJacobianStep;
      (col == 0 ? lo.theta_B : lo.phi_B) -= kJacobianStep;
      J.col(col) = (residual(hi, theta, phi, geo) - residual(lo, theta, phi, geo)) /
                   (2.0 * kJacobianStep);
    }
    const Eigen::Vector2d step = J.partialPivLu().solve(-f);
    if (!step.allFinite()) {
      throw NumericalError("angles_to_encoder: singular Jacobian");
    }
    // Backtrack until the residual shrinks.
    double damping = 1.0;
    EncoderReading trial;
    Eigen::Vector2d f_trial;
    for (;;) {
      trial = {x.theta_B + damping * step.x(), x.phi_B + damping * step.y()};
      f_trial = residual(trial, theta, phi, geo);
      if (f_trial.norm() < f.norm() || damping < 1e-6) break;
      damping *= 0.5;
    }
    x = trial;
    f = f_trial;
  }
  return {quantize_angle(x.theta_B, counts_per_rev),
          quantize_angle(x.phi_B, counts_per_rev)};
}

}  // namespace kitefusion
