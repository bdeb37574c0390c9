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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/frames.hpp"

namespace kitefusion {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

using AxisMask = std::array<bool, 3>;
inline constexpr AxisMask kAllAxes{true, true, true};

struct KinematicState {
  Vec3 p = Vec3::Zero();  // m
  Vec3 v = Vec3::Zero();  // m/s

  Vec6 stacked() const;
  static KinematicState from_stacked(const Vec6& x);
};

// Forward-difference discretization of three decoupled double integrators.
struct DoubleIntegratorModel {
  double Ts = 0.0;
  Mat6 A;
  Mat63 B;
  Mat36 C;
};

DoubleIntegratorModel build_system(double Ts);

// Per-axis ratios lambda_i = Q_ii / R_ii; R is normalized to the identity.
struct KfTuning {
  double Ts = 0.02;
  std::array<double, 3> lambda{10.0, 10.0, 10.0};

  void validate() const;
  Mat3 process_noise() const;
  Mat3 measurement_noise() const { return Mat3::Identity(); }
};

// Stabilizing solution of
//   P = A P A' - A P C' (C P C' + R)^-1 C P A' + B Q B'.
// Diagonal Q, R on an axis-decoupled system are solved as three 2x2
// fixed-point iterations; anything else falls back to the full-matrix
// iteration. Throws DomainError if R is not positive definite or Q is not
// positive semidefinite, NumericalError on non-convergence.
Mat6 solve_dare(const Mat6& A, const Mat63& B, const Mat36& C, const Mat3& Q,
                const Mat3& R);

// Frobenius norm of the Riccati residual at P.
double dare_residual(const Mat6& P, const Mat6& A, const Mat63& B,
                     const Mat36& C, const Mat3& Q, const Mat3& R);

double spectral_radius(const Eigen::MatrixXd& M);

struct KalmanGain {
  Mat63 K;
  Mat6 P_inf;
  double closed_loop_radius = 0.0;  // of (I - K C) A
};

// K = A P C' (C P C' + R)^-1. Throws NumericalError when C P C' + R is
// singular.
KalmanGain kalman_gain(const Mat6& P_inf, const Mat6& A, const Mat36& C,
                       const Mat3& R);

// solve_dare + kalman_gain for the normalized tuning. Throws NumericalError
// if the closed loop is not strictly stable.
KalmanGain synthesize_gain(const KfTuning& tuning);

KinematicState time_update(const KinematicState& s, const Vec3& a_G, double Ts);

// x = x- + K (p - C x-), restricted to the measured axes. With a gain that
// has the axis-decoupled structure the restriction is exact.
KinematicState measurement_update(const KinematicState& prior,
                                  const Vec3& p_meas, const KalmanGain& gain,
                                  const AxisMask& axes = kAllAxes);

struct KfFrequencyResponse {
  std::vector<double> mag_fu;  // acceleration -> filtered position
  std::vector<double> mag_fy;  // position measurement -> filtered position
};

// Magnitudes of the single-axis closed-loop transfer functions at
// z = exp(j 2 pi f Ts). Throws DomainError unless 0 < f < 1 / (2 Ts).
KfFrequencyResponse kf_frequency_response(const KfTuning& tuning, int axis,
                                          std::span<const double> freqs_hz);

// Lowest frequency on a fine log grid where |F_y| drops below 1/sqrt(2).
double kf_crossover_frequency(const KfTuning& tuning, int axis);

}  // namespace kitefusion
