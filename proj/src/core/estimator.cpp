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

#include "core/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

constexpr double kDareRelTolerance = 1e-13;
constexpr long kDareMaxIterations = 1'000'000;

// True when A, B, C only couple states that belong to the same axis
// (state i and i + 3 belong to axis i) and Q, R are diagonal.
bool axis_decoupled(const Mat6& A, const Mat63& B, const Mat36& C,
                    const Mat3& Q, const Mat3& R) {
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      if (r % 3 != c % 3 && A(r, c) != 0.0) return false;
    }
    for (int c = 0; c < 3; ++c) {
      if (r % 3 != c && B(r, c) != 0.0) return false;
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 6; ++c) {
      if (c % 3 != r && C(r, c) != 0.0) return false;
    }
    for (int c = 0; c < 3; ++c) {
      if (r != c && (Q(r, c) != 0.0 || R(r, c) != 0.0)) return false;
    }
  }
  return true;
}

template <typename MatA, typename MatB, typename MatC, typename MatQ,
          typename MatR>
MatA riccati_map(const MatA& P, const MatA& A, const MatB& B, const MatC& C,
                 const MatQ& Q, const MatR& R) {
  const auto S = (C * P * C.transpose() + R).eval();
  const auto APCt = (A * P * C.transpose()).eval();
  MatA next = A * P * A.transpose() -
              APCt * S.ldlt().solve(APCt.transpose()) +
              B * Q * B.transpose();
  return 0.5 * (next + next.transpose());
}

template <typename MatA, typename MatB, typename MatC, typename MatQ,
          typename MatR>
MatA fixed_point_dare(const MatA& A, const MatB& B, const MatC& C,
                      const MatQ& Q, const MatR& R) {
  MatA P = B * Q * B.transpose();
  for (long it = 0; it < kDareMaxIterations; ++it) {
    const MatA next = riccati_map(P, A, B, C, Q, R);
    const double change = (next - P).norm();
    P = next;
    if (change <= kDareRelTolerance * P.norm()) return P;
  }
  throw NumericalError("solve_dare: fixed-point iteration did not converge in " +
                       std::to_string(kDareMaxIterations) + " iterations");
}

std::complex<double> unit_circle(double f_hz, double Ts) {
  return std::polar(1.0, 2.0 * kPi * f_hz * Ts);
}

}  // namespace

Vec6 KinematicState::stacked() const {
  Vec6 x;
  x << p, v;
  return x;
}

KinematicState KinematicState::from_stacked(const Vec6& x) {
  return {x.head<3>(), x.tail<3>()};
}

DoubleIntegratorModel build_system(double Ts) {
  if (!(Ts > 0.0)) throw DomainError("build_system: Ts must be > 0");
  DoubleIntegratorModel m;
  m.Ts = Ts;
  m.A.setIdentity();
  m.A.topRightCorner<3, 3>() = Ts * Mat3::Identity();
  m.B.setZero();
  m.B.bottomRows<3>() = Ts * Mat3::Identity();
  m.C.setZero();
  m.C.leftCols<3>().setIdentity();
  return m;
}

void KfTuning::validate() const {
  if (!(Ts > 0.0)) throw DomainError("KfTuning: Ts must be > 0");
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw DomainError("KfTuning: lambda must be positive and finite");
    }
  }
}

Mat3 KfTuning::process_noise() const {
  return Eigen::Vector3d(lambda[0], lambda[1], lambda[2]).asDiagonal();
}

Mat6 solve_dare(const Mat6& A, const Mat63& B, const Mat36& C, const Mat3& Q,
                const Mat3& R) {
  Eigen::LLT<Mat3> llt(R);
  if (llt.info() != Eigen::Success || !R.isApprox(R.transpose())) {
    throw DomainError("solve_dare: R must be symmetric positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> qeig(0.5 * (Q + Q.transpose()));
  if (qeig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.norm())) {
    throw DomainError("solve_dare: Q must be positive semidefinite");
  }

  if (!axis_decoupled(A, B, C, Q, R)) return fixed_point_dare(A, B, C, Q, R);

  Mat6 P = Mat6::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    const int idx[2] = {axis, axis + 3};
    Eigen::Matrix2d Ai;
    Eigen::Vector2d Bi;
    Eigen::RowVector2d Ci;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) Ai(r, c) = A(idx[r], idx[c]);
      Bi(r) = B(idx[r], axis);
      Ci(r) = C(axis, idx[r]);
    }
    const Eigen::Matrix<double, 1, 1> Qi(Q(axis, axis));
    const Eigen::Matrix<double, 1, 1> Ri(R(axis, axis));
    const Eigen::Matrix2d Pi = fixed_point_dare(Ai, Bi, Ci, Qi, Ri);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) P(idx[r], idx[c]) = Pi(r, c);
    }
  }
  return P;
}

double dare_residual(const Mat6& P, const Mat6& A, const Mat63& B,
                     const Mat36& C, const Mat3& Q, const Mat3& R) {
  return (P - riccati_map(P, A, B, C, Q, R)).norm();
}

double spectral_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

KalmanGain kalman_gain(const Mat6& P_inf, const Mat6& A, const Mat36& C,
                       const Mat3& R) {
  const Mat3 S = C * P_inf * C.transpose() + R;
  Eigen::FullPivLU<Mat3> lu(S);
  if (!lu.isInvertible()) {
    throw NumericalError("kalman_gain: innovation covariance is singular");
  }
  KalmanGain g;
  g.P_inf = P_inf;
  g.K = A * P_inf * C.transpose() * lu.inverse();
  g.closed_loop_radius = spectral_radius((Mat6::Identity() - g.K * C) * A);
  return g;
}

KalmanGain synthesize_gain(const KfTuning& tuning) {
  tuning.validate();
  const DoubleIntegratorModel sys = build_system(tuning.Ts);
  const Mat3 Q = tuning.process_noise();
  const Mat3 R = tuning.measurement_noise();
  KalmanGain g = kalman_gain(solve_dare(sys.A, sys.B, sys.C, Q, R), sys.A,
                             sys.C, R);
  if (!(g.closed_loop_radius < 1.0)) {
    throw NumericalError("synthesize_gain: closed loop is not stable");
  }
  return g;
}

KinematicState time_update(const KinematicState& s, const Vec3& a_G,
                           double Ts) {
  return {s.p + Ts * s.v, s.v + Ts * a_G};
}

KinematicState measurement_update(const KinematicState& prior,
                                  const Vec3& p_meas, const KalmanGain& gain,
                                  const AxisMask& axes) {
  Vec3 innovation = p_meas - prior.p;
  for (int i = 0; i < 3; ++i) {
    if (!axes[i]) innovation(i) = 0.0;
  }
  return KinematicState::from_stacked(prior.stacked() + gain.K * innovation);
}

KfFrequencyResponse kf_frequency_response(const KfTuning& tuning, int axis,
                                          std::span<const double> freqs_hz) {
  if (axis < 0 || axis > 2) throw DomainError("kf_frequency_response: axis");
  const KalmanGain g = synthesize_gain(tuning);
  const double Ts = tuning.Ts;
  const double nyquist = 0.5 / Ts;

  using Mat2c = Eigen::Matrix2cd;
  using Vec2c = Eigen::Vector2cd;
  Eigen::Matrix2d A;
  A << 1.0, Ts, 0.0, 1.0;
  const Eigen::Vector2d B(0.0, Ts);
  const Eigen::Vector2d K(g.K(axis, axis), g.K(axis + 3, axis));
  const Eigen::RowVector2d C(1.0, 0.0);
  const Eigen::Matrix2d IKC = Eigen::Matrix2d::Identity() - K * C;
  const Eigen::Matrix2d M = IKC * A;

  KfFrequencyResponse out;
  out.mag_fu.reserve(freqs_hz.size());
  out.mag_fy.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (!(f > 0.0 && f < nyquist)) {
      throw DomainError("kf_frequency_response: frequency outside (0, Nyquist)");
    }
    const std::complex<double> z = unit_circle(f, Ts);
    const Mat2c G = z * (z * Mat2c::Identity() - M.cast<std::complex<double>>())
                            .inverse();
    const Vec2c fu = G * (IKC * B).cast<std::complex<double>>();
    const Vec2c fy = G * K.cast<std::complex<double>>();
    out.mag_fu.push_back(std::abs(fu(0)));
    out.mag_fy.push_back(std::abs(fy(0)));
  }
  return out;
}

double kf_crossover_frequency(const KfTuning& tuning, int axis) {
  const double nyquist = 0.5 / tuning.Ts;
  constexpr int kPoints = 4000;
  const double lo = std::log10(1e-3), hi = std::log10(nyquist * 0.999);
  std::vector<double> freqs(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    freqs[i] = std::pow(10.0, lo + (hi - lo) * i / (kPoints - 1));
  }
  const KfFrequencyResponse fr = kf_frequency_response(tuning, axis, freqs);
  const double half_power = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < kPoints; ++i) {
    if (fr.mag_fy[i] < half_power) return freqs[i];
  }
  return nyquist;
}

}  // namespace kitefusion
