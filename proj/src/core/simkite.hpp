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

#include <cstdint>
#include <string>
#include <vector>

#include "core/attitude.hpp"
#include "core/frames.hpp"
#include "core/lineangle.hpp"
#include "core/pipelines.hpp"

namespace kitefusion {

// Kinematic figure-eight on the sphere of radius r:
//   theta(t) = theta0 + a_theta sin(2 w t),  phi(t) = phi0 + a_phi sin(w t)
// with w = 2 pi f_loop * speed_scale / speed_ref. speed_scale stands in for
// the wind speed: the pattern is flown at f_loop when speed_scale equals
// speed_ref, and velocities scale linearly with it.
//
// The default pattern is representative of the flight envelope, not a
// recorded flight.
struct TrajectoryParams {
  double r = 30.0;          // m
  double theta0 = 0.7;      // rad
  double phi0 = 0.0;        // rad
  double a_theta = 0.15;    // rad
  double a_phi = 0.75;      // rad
  double f_loop = 0.16;     // Hz
  double speed_scale = 3.0;
  double speed_ref = 3.0;
  double duration = 60.0;   // s
  double phi_G = 0.0;       // rad

  // Throws DomainError if the pattern leaves theta in (0, pi/2) or any
  // parameter is out of range.
  void validate() const;
  double angular_rate() const;  // w, rad/s
};

struct TruthSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Quat q;
  double theta = 0.0;
  double phi = 0.0;
  double gamma = 0.0;

  bool operator==(const TruthSample&) const = default;
};

// Closed-form state at time t. The wing frame has K_x along the velocity and
// K_z pointing at the ground unit. Throws DomainError for t outside
// [0, duration].
TruthSample truth_at(const TrajectoryParams& params, double t);

// Sensor error model. Defaults follow the data sheet of the wing IMU, GPS,
// barometer and line angle encoders.
struct NoiseSpec {
  double accel_noise_density = 2.5e-4;  // g/sqrt(Hz)
  double accel_bias = 4e-3;             // g, per-axis bias drawn in [-b, b]
  double accel_range = 5.0;             // g, 0 disables clipping
  double gyro_noise_density = 5e-2;     // deg/s/sqrt(Hz)
  double gyro_bias = 0.1;               // deg/s
  double gyro_range = 300.0;            // deg/s
  double gps_sigma_xy = 2.5;            // m
  double gps_rate = 4.0;                // Hz
  double gps_latency = 0.2;             // s
  double gps_speed_inflation = 0.0;     // extra m of sigma per m/s of speed
  double baro_resolution = 0.2;         // m
  double baro_rate = 9.0;               // Hz
  double attitude_rms = 1.0;            // deg, per axis
  int encoder_cpr = kDefaultCountsPerRev;  // 0 disables quantization
  std::uint64_t seed = 1;

  // Same rates and ranges, every error source switched off.
  static NoiseSpec zero();
  void validate() const;
};

struct SimulationResult {
  std::vector<SensorFrame> frames;
  std::vector<TruthSample> truth;
  std::string rng;  // generator identity, recorded in log metadata
};

inline constexpr const char* kRngIdentity = "mt19937_64+polar-normal";

// 50 Hz (1 / Ts) frames with time-aligned truth. Deterministic in
// (params, noise, geometry, Ts).
SimulationResult synthesize(const TrajectoryParams& params,
                            const NoiseSpec& noise,
                            const EncoderGeometry& geometry, double Ts = 0.02);

}  // namespace kitefusion
