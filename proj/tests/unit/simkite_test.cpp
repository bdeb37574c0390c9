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

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "core/errors.hpp"
#include "core/simkite.hpp"
#include "support/oracles.hpp"

namespace kitefusion {
namespace {

double AngularDistance(const Quat& a, const Quat& b) {
  return Eigen::Quaterniond(a.q1, a.q2, a.q3, a.q4)
      .angularDistance(Eigen::Quaterniond(b.q1, b.q2, b.q3, b.q4));
}

NoiseSpec NoBiasNoClip() {
  NoiseSpec n;
  n.accel_bias = 0.0;
  n.gyro_bias = 0.0;
  n.accel_range = 0.0;
  n.gyro_range = 0.0;
  return n;
}

TEST(TrajectoryParams, Validation) {
  EXPECT_NO_THROW(TrajectoryParams{}.validate());
  TrajectoryParams p;
  p.theta0 = 1.5;
  EXPECT_THROW(p.validate(), DomainError);
  p = TrajectoryParams{};
  p.speed_scale = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = TrajectoryParams{};
  p.r = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = TrajectoryParams{};
  p.duration = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_THROW(truth_at(TrajectoryParams{}, 60.5), DomainError);
  EXPECT_THROW(truth_at(TrajectoryParams{}, -0.1), DomainError);
}

TEST(TruthAt, OnSphereWithTangentVelocity) {
  const TrajectoryParams p;
  for (double t = 0.0; t <= p.duration; t += 0.37) {
    const TruthSample s = truth_at(p, t);
    EXPECT_NEAR(s.p.norm(), p.r, 1e-12);
    EXPECT_NEAR(s.p.dot(s.v), 0.0, 1e-9);
    EXPECT_LT((s.p - spherical_to_cartesian({s.theta, s.phi, p.r})).norm(), 1e-12);
    EXPECT_NEAR(s.q.norm(), 1.0, 1e-12);
    EXPECT_GT(s.gamma, -kPi);
    EXPECT_LE(s.gamma, kPi);
  }
}

TEST(TruthAt, DerivativesMatchFiniteDifferences) {
  const TrajectoryParams p;
  const double h = 1e-4;
  for (double t = 0.5; t < 59.0; t += 1.3) {
    const TruthSample s = truth_at(p, t);
    const TruthSample a = truth_at(p, t - h), b = truth_at(p, t + h);
    EXPECT_LT((s.v - (b.p - a.p) / (2 * h)).norm(), 1e-6);
    EXPECT_LT((s.a - (b.v - a.v) / (2 * h)).norm(), 1e-6);
  }
}

TEST(TruthAt, AttitudeFollowsVelocityAndLine) {
  const TrajectoryParams p;
  for (double t = 0.0; t <= p.duration; t += 1.1) {
    const TruthSample s = truth_at(p, t);
    // Columns of the wing-to-G rotation: K_x along v, K_z toward the origin.
    const Mat3 R = rot_ned_to_g(p.phi_G) * quat_to_rot(s.q);
    EXPECT_LT((R.col(0) - s.v.normalized()).norm(), 1e-9);
    EXPECT_LT((R.col(2) + s.p.normalized()).norm(), 1e-9);
  }
}

TEST(TruthAt, SpeedScalesTime) {
  TrajectoryParams slow, fast;
  fast.speed_scale = 2.0 * slow.speed_scale;
  for (double t = 0.0; t <= 25.0; t += 0.7) {
    const TruthSample s = truth_at(slow, 2.0 * t), f = truth_at(fast, t);
    EXPECT_LT((s.p - f.p).norm(), 1e-9);
    EXPECT_LT((2.0 * s.v - f.v).norm(), 1e-9);
    EXPECT_LT((4.0 * s.a - f.a).norm(), 1e-8);
  }
  fast.speed_scale = 4.0 * slow.speed_scale;
  EXPECT_NEAR(fast.angular_rate(), 4.0 * slow.angular_rate(), 1e-12);
}

TEST(TruthAt, GammaOscillatesAtLoopFrequency) {
  TrajectoryParams p;
  p.duration = 62.5;  // ten loops
  const double Ts = 0.02;
  const int n = static_cast<int>(p.duration / Ts);
  std::vector<double> gamma(n);
  double unwrapped = truth_at(p, 0.0).gamma;
  gamma[0] = unwrapped;
  for (int k = 1; k < n; ++k) {
    const double g = truth_at(p, k * Ts).gamma;
    unwrapped += wrap_angle(g - wrap_angle(unwrapped));
    gamma[k] = unwrapped;
  }
  int best = 0;
  double best_mag = 0.0;
  for (int bin = 1; bin < 60; ++bin) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n; ++k) acc += gamma[k] * std::polar(1.0, -2.0 * kPi * bin * k / n);
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = bin;
    }
  }
  EXPECT_NEAR(best / p.duration, p.f_loop, 1e-12);
}

TEST(Synthesize, FrameCountsAndSchedules) {
  const SimulationResult sim = synthesize({}, NoiseSpec{}, {});
  ASSERT_EQ(sim.frames.size(), 3001u);
  ASSERT_EQ(sim.truth.size(), 3001u);
  EXPECT_EQ(sim.rng, kRngIdentity);
  int gps = 0, baro = 0;
  for (size_t k = 0; k < sim.frames.size(); ++k) {
    const SensorFrame& f = sim.frames[k];
    EXPECT_NEAR(f.t, 0.02 * k, 1e-12);
    EXPECT_TRUE(f.accel_K && f.gyro_K && f.quat && f.encoder && f.wind_speed);
    gps += f.gps_xy.has_value();
    baro += f.baro_z.has_value();
  }
  EXPECT_EQ(gps, 241);
  EXPECT_EQ(baro, 541);
}

TEST(Synthesize, DeterministicInSeed) {
  const SimulationResult a = synthesize({}, NoiseSpec{}, {});
  const SimulationResult b = synthesize({}, NoiseSpec{}, {});
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.truth, b.truth);
  NoiseSpec other;
  other.seed = 2;
  EXPECT_NE(synthesize({}, other, {}).frames, a.frames);
}

TEST(Synthesize, NoiselessChannelsRecoverTruth) {
  const TrajectoryParams params;
  const SimulationResult sim = synthesize(params, NoiseSpec::zero(), {});
  for (size_t k = 0; k < sim.frames.size(); ++k) {
    const SensorFrame& f = sim.frames[k];
    const TruthSample& s = sim.truth[k];
    EXPECT_LT((accel_to_inertial(*f.accel_K, *f.quat, params.phi_G) - s.a).norm(), 1e-9);
    EXPECT_LT(AngularDistance(*f.quat, s.q), 1e-12);
    if (f.baro_z) EXPECT_NEAR(*f.baro_z, s.p.z(), 1e-12);
    if (f.gps_xy) {
      EXPECT_NEAR(f.gps_xy->x, s.p.x(), 1e-12);
      EXPECT_NEAR(f.gps_xy->y, s.p.y(), 1e-12);
    }
    const SphericalAngles back = encoder_to_angles(*f.encoder, {});
    EXPECT_NEAR(back.theta, s.theta, 1e-9);
    EXPECT_NEAR(wrap_angle(back.phi - s.phi), 0.0, 1e-9);
  }
}

TEST(Synthesize, GpsLatencyAndEncoderQuantization) {
  const TrajectoryParams params;
  NoiseSpec noise = NoiseSpec::zero();
  noise.gps_latency = 0.2;
  noise.encoder_cpr = kDefaultCountsPerRev;
  const SimulationResult sim = synthesize(params, noise, {});
  const double step = 2.0 * kPi / kDefaultCountsPerRev;
  for (size_t k = 0; k < sim.frames.size(); ++k) {
    const SensorFrame& f = sim.frames[k];
    if (f.gps_xy && f.t >= 0.2) {
      const TruthSample delayed = truth_at(params, f.t - 0.2);
      EXPECT_NEAR(f.gps_xy->x, delayed.p.x(), 1e-9);
      EXPECT_NEAR(f.gps_xy->y, delayed.p.y(), 1e-9);
    }
    EXPECT_NEAR(f.encoder->theta_B / step, std::round(f.encoder->theta_B / step), 1e-9);
    const SphericalAngles back = encoder_to_angles(*f.encoder, {});
    EXPECT_LE(std::abs(back.theta - sim.truth[k].theta), step);
    EXPECT_LE(std::abs(wrap_angle(back.phi - sim.truth[k].phi)), step);
  }
}

TEST(Synthesize, GyroConsistentWithAttitude) {
  const SimulationResult sim = synthesize({}, NoiseSpec::zero(), {});
  for (size_t k = 0; k + 1 < sim.frames.size(); k += 7) {
    const BodyRates& a = *sim.frames[k].gyro_K;
    const BodyRates& b = *sim.frames[k + 1].gyro_K;
    const BodyRates mid{0.5 * (a.wx + b.wx), 0.5 * (a.wy + b.wy), 0.5 * (a.wz + b.wz)};
    const Quat next = quat_propagate(sim.truth[k].q, mid, 0.02);
    EXPECT_LT(AngularDistance(next, sim.truth[k + 1].q), 1e-4) << k;
  }
}

TEST(Synthesize, AccelerometerWhiteNoiseLevel) {
  const TrajectoryParams params;
  const SimulationResult sim = synthesize(params, NoBiasNoClip(), {});
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;
  for (size_t k = 0; k < sim.frames.size(); ++k) {
    const Vec3 clean = inertial_to_accel(sim.truth[k].a, sim.truth[k].q, params.phi_G);
    const Vec3 e = *sim.frames[k].accel_K - clean;
    for (int i = 0; i < 3; ++i, ++n) {
      sum += e(i);
      sum_sq += e(i) * e(i);
    }
  }
  const double mean = sum / n;
  const double sigma = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(sigma / (1.25e-3 * kGravity), 1.0, 0.05);
  EXPECT_LT(std::abs(mean), 4.0 * 1.25e-3 * kGravity / std::sqrt(n));
}

TEST(Synthesize, BarometerQuantized) {
  const SimulationResult sim = synthesize({}, NoiseSpec{}, {});
  for (size_t k = 0; k < sim.frames.size(); ++k) {
    if (!sim.frames[k].baro_z) continue;
    const double z = *sim.frames[k].baro_z;
    EXPECT_NEAR(z / 0.2, std::round(z / 0.2), 1e-9);
    EXPECT_LE(std::abs(z - sim.truth[k].p.z()), 0.1 + 1e-9);
  }
}

TEST(Synthesize, GpsErrorLevel) {
  const TrajectoryParams params;
  const SimulationResult sim = synthesize(params, NoiseSpec{}, {});
  double sum_sq = 0.0;
  int n = 0;
  for (const SensorFrame& f : sim.frames) {
    if (!f.gps_xy) continue;
    const TruthSample delayed = truth_at(params, std::max(0.0, f.t - 0.2));
    if (f.t < 0.2) continue;
    sum_sq += std::pow(f.gps_xy->x - delayed.p.x(), 2) + std::pow(f.gps_xy->y - delayed.p.y(), 2);
    n += 2;
  }
  EXPECT_NEAR(std::sqrt(sum_sq / n), 2.5, 0.4);
}

TEST(Synthesize, Saturation) {
  NoiseSpec noise;
  noise.accel_range = 0.5;
  noise.gyro_range = 20.0;
  const SimulationResult sim = synthesize({}, noise, {});
  bool hit_accel = false, hit_gyro = false;
  const double a_lim = 0.5 * kGravity, w_lim = 20.0 * kPi / 180.0;
  for (const SensorFrame& f : sim.frames) {
    for (int i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs((*f.accel_K)(i)), a_lim);
      hit_accel |= std::abs((*f.accel_K)(i)) == a_lim;
    }
    for (double w : {f.gyro_K->wx, f.gyro_K->wy, f.gyro_K->wz}) {
      EXPECT_LE(std::abs(w), w_lim);
      hit_gyro |= std::abs(w) == w_lim;
    }
  }
  EXPECT_TRUE(hit_accel);
  EXPECT_TRUE(hit_gyro);
}

TEST(Synthesize, InvalidInputsRejected) {
  NoiseSpec n;
  n.gps_rate = -1.0;
  EXPECT_THROW(synthesize({}, n, {}), DomainError);
  EXPECT_THROW(synthesize({}, NoiseSpec{}, {}, 0.0), DomainError);
  EXPECT_THROW(synthesize({}, NoiseSpec{}, {0.0, 0.0, 0.1, 0.1}), DomainError);
}

}  // namespace
}  // namespace kitefusion
