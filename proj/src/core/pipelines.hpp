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
#include <optional>
#include <span>
#include <vector>

#include "core/attitude.hpp"
#include "core/estimator.hpp"
#include "core/frames.hpp"
#include "core/lineangle.hpp"

namespace kitefusion {

// GPS fix relative to the ground unit, horizontal components only.
struct GpsFix {
  double x = 0.0;  // m
  double y = 0.0;  // m

  bool operator==(const GpsFix&) const = default;
};

// One timestamped sample of everything the sensors delivered. Absent
// optionals are measurements that did not arrive in this sample.
struct SensorFrame {
  double t = 0.0;  // s
  std::optional<Vec3> accel_K;  // m/s^2
  std::optional<BodyRates> gyro_K;
  std::optional<Quat> quat;
  std::optional<GpsFix> gps_xy;
  std::optional<double> baro_z;  // m
  std::optional<EncoderReading> encoder;
  std::optional<double> wind_speed;  // metadata only

  bool operator==(const SensorFrame&) const = default;
};

enum class Approach {
  kGpsBaro = 1,           // GPS for X, Y and barometer for Z
  kGpsBaroCorrected = 2,  // as above, GPS projected onto the sphere
  kLineAngle = 3,         // line angle sensor at every sample
};

Approach approach_from_int(int n);

using LuenbergerGain = std::array<double, 2>;

struct EstimatorConfig {
  double r = 30.0;      // m
  double phi_G = 0.0;   // rad
  double Ts = 0.02;     // s
  std::array<double, 3> lambda{500.0, 500.0, 500.0};
  LuenbergerGain K_gamma{0.4, 0.9};
  EncoderGeometry geometry;
  Approach approach = Approach::kLineAngle;
  bool use_imu = true;

  // Tuning used in the experiments: lambda = 10 for the GPS approaches and
  // 500 for the line angle sensor.
  static EstimatorConfig defaults_for(Approach approach);
  void validate() const;
};

struct EstimateOutput {
  double t = 0.0;
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  double theta_hat = 0.0;
  double phi_hat = 0.0;
  double gamma_hat = 0.0;       // (-pi, pi]
  double gamma_dot_hat = 0.0;   // rad/s

  bool operator==(const EstimateOutput&) const = default;
};

struct PositionMeasurement {
  Vec3 p = Vec3::Zero();
  AxisMask axes{false, false, false};
};

// GPS for X, Y and barometer for Z; either half may be missing. Returns
// nullopt when the frame carries no position data at all. GPS altitude is
// never used.
std::optional<PositionMeasurement> assemble_position_approach1(
    const SensorFrame& f);

// Rescales the horizontal GPS components so that the measurement lies on the
// sphere of radius r at the barometric elevation. Throws DegenerateError for
// a zero horizontal component and DomainError when |p_Z| > r.
Vec3 geometric_correction(const Vec3& p_tilde, double r);

// Velocity angle of v_hat after rotating it into the local frame at
// (theta_hat, phi_hat). Throws DegenerateError for zero horizontal velocity.
double gamma_unfiltered(const Vec3& v_hat, double theta_hat, double phi_hat);

struct LuenbergerState {
  double gamma = 0.0;      // unwrapped
  double gamma_dot = 0.0;
};

// One step of the velocity-angle observer
//   x+ = [1 Ts; 0 1] x + K_gamma * wrap(gamma_tilde - gamma).
LuenbergerState luenberger_step(const LuenbergerState& s, double gamma_tilde,
                                const LuenbergerGain& K, double Ts);

// Spectral radius of the observer error dynamics [1-k1 Ts; -k2 1].
double luenberger_spectral_radius(const LuenbergerGain& K, double Ts);

struct LoFrequencyResponse {
  std::vector<double> mag_fy1;  // gamma_tilde -> gamma_hat
  std::vector<double> mag_fy2;  // gamma_tilde -> gamma_dot_hat
};

LoFrequencyResponse lo_frequency_response(const LuenbergerGain& K, double Ts,
                                          std::span<const double> freqs_hz);

// Sequential state machine that turns a frame stream into estimates. One
// instance per stream; not safe for concurrent use.
class Pipeline {
 public:
  explicit Pipeline(const EstimatorConfig& cfg);

  // Throws InputFormatError if f.t precedes the previous frame.
  EstimateOutput step(const SensorFrame& f);

  const EstimatorConfig& config() const { return cfg_; }
  const KalmanGain& gain() const { return gain_; }

 private:
  std::optional<PositionMeasurement> position_measurement(const SensorFrame& f);
  void apply_measurement(const PositionMeasurement& m);
  void update_gamma(int steps);

  EstimatorConfig cfg_;
  KalmanGain gain_;
  KinematicState state_;
  AxisMask initialized_{false, false, false};
  std::optional<double> last_t_;
  std::optional<double> last_baro_;
  SphericalAngles angles_;
  std::optional<LuenbergerState> observer_;
};

std::vector<EstimateOutput> run_pipeline(const EstimatorConfig& cfg,
                                         std::span<const SensorFrame> frames);

}  // namespace kitefusion
