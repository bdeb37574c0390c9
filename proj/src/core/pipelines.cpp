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

#include "core/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

constexpr double kSphereTolerance = 1e-9;

}  // namespace

Approach approach_from_int(int n) {
  switch (n) {
    case 1: return Approach::kGpsBaro;
    case 2: return Approach::kGpsBaroCorrected;
    case 3: return Approach::kLineAngle;
    default:
      throw DomainError("approach must be 1, 2 or 3, got " + std::to_string(n));
  }
}

EstimatorConfig EstimatorConfig::defaults_for(Approach approach) {
  EstimatorConfig cfg;
  cfg.approach = approach;
  const double lambda = approach == Approach::kLineAngle ? 500.0 : 10.0;
  cfg.lambda = {lambda, lambda, lambda};
  return cfg;
}

void EstimatorConfig::validate() const {
  if (!(r > 0.0)) throw DomainError("estimator config: r must be > 0");
  KfTuning{Ts, lambda}.validate();
  geometry.validate();
  if (!(luenberger_spectral_radius(K_gamma, Ts) < 1.0)) {
    throw DomainError("estimator config: K_gamma does not stabilize the observer");
  }
}

std::optional<PositionMeasurement> assemble_position_approach1(
    const SensorFrame& f) {
  if (!f.gps_xy && !f.baro_z) return std::nullopt;
  PositionMeasurement m;
  if (f.gps_xy) {
    m.p.x() = f.gps_xy->x;
    m.p.y() = f.gps_xy->y;
    m.axes[0] = m.axes[1] = true;
  }
  if (f.baro_z) {
    m.p.z() = *f.baro_z;
    m.axes[2] = true;
  }
  return m;
}

Vec3 geometric_correction(const Vec3& p_tilde, double r) {
  if (!(r > 0.0)) throw DomainError("geometric_correction: r must be > 0");
  const double horizontal = std::hypot(p_tilde.x(), p_tilde.y());
  if (horizontal == 0.0) {
    throw DegenerateError("geometric_correction: zero horizontal position");
  }
  if (std::abs(p_tilde.z()) > r * (1.0 + kSphereTolerance)) {
    throw DomainError("geometric_correction: |p_Z| exceeds the line length");
  }
  const double theta = std::asin(std::clamp(p_tilde.z() / r, -1.0, 1.0));
  const double scale = r * std::cos(theta) / horizontal;
  return {p_tilde.x() * scale, p_tilde.y() * scale, p_tilde.z()};
}

double gamma_unfiltered(const Vec3& v_hat, double theta_hat, double phi_hat) {
  return velocity_angle(rot_g_to_l(theta_hat, phi_hat) * v_hat);
}

LuenbergerState luenberger_step(const LuenbergerState& s, double gamma_tilde,
                                const LuenbergerGain& K, double Ts) {
  const double innovation = wrap_angle(gamma_tilde - s.gamma);
  return {s.gamma + Ts * s.gamma_dot + K[0] * innovation,
          s.gamma_dot + K[1] * innovation};
}

double luenberger_spectral_radius(const LuenbergerGain& K, double Ts) {
  Eigen::Matrix2d M;
  M << 1.0 - K[0], Ts, -K[1], 1.0;
  return spectral_radius(M);
}

LoFrequencyResponse lo_frequency_response(const LuenbergerGain& K, double Ts,
                                          std::span<const double> freqs_hz) {
  if (!(Ts > 0.0)) throw DomainError("lo_frequency_response: Ts must be > 0");
  const double nyquist = 0.5 / Ts;
  Eigen::Matrix2cd M;
  M << 1.0 - K[0], Ts, -K[1], 1.0;
  const Eigen::Vector2cd gain(K[0], K[1]);
  LoFrequencyResponse out;
  for (double f : freqs_hz) {
    if (!(f > 0.0 && f < nyquist)) {
      throw DomainError("lo_frequency_response: frequency outside (0, Nyquist)");
    }
    const std::complex<double> z = std::polar(1.0, 2.0 * kPi * f * Ts);
    const Eigen::Vector2cd h =
        (z * Eigen::Matrix2cd::Identity() - M).inverse() * gain;
    out.mag_fy1.push_back(std::abs(h(0)));
    out.mag_fy2.push_back(std::abs(h(1)));
  }
  return out;
}

Pipeline::Pipeline(const EstimatorConfig& cfg)
    : cfg_(cfg), gain_((cfg.validate(), synthesize_gain({cfg.Ts, cfg.lambda}))) {}

std::optional<PositionMeasurement> Pipeline::position_measurement(
    const SensorFrame& f) {
  switch (cfg_.approach) {
    case Approach::kGpsBaro:
      return assemble_position_approach1(f);
    case Approach::kGpsBaroCorrected: {
      if (f.baro_z) last_baro_ = f.baro_z;
      auto m = assemble_position_approach1(f);
      if (!m || !m->axes[0] || !last_baro_) return m;
      try {
        const Vec3 corrected = geometric_correction(
            {m->p.x(), m->p.y(), *last_baro_}, cfg_.r);
        m->p.x() = corrected.x();
        m->p.y() = corrected.y();
      } catch (const DomainError&) {
        // Barometer above the sphere or GPS at the origin: nothing to
        // project onto, use the raw fix.
      }
      return m;
    }
    case Approach::kLineAngle: {
      if (!f.encoder) return std::nullopt;
      const SphericalAngles a = encoder_to_angles(*f.encoder, cfg_.geometry);
      return PositionMeasurement{angles_to_position(a.theta, a.phi, cfg_.r),
                                 kAllAxes};
    }
  }
  return std::nullopt;
}

void Pipeline::apply_measurement(const PositionMeasurement& m) {
  AxisMask update{false, false, false};
  for (int i = 0; i < 3; ++i) {
    if (!m.axes[i]) continue;
    if (initialized_[i]) {
      update[i] = true;
    } else {
      state_.p(i) = m.p(i);
      state_.v(i) = 0.0;
      initialized_[i] = true;
    }
  }
  state_ = measurement_update(state_, m.p, gain_, update);
}

void Pipeline::update_gamma(int steps) {
  const Vec3& p = state_.p;
  if (p.x() != 0.0 || p.y() != 0.0) {
    angles_ = {std::asin(std::clamp(p.z() / cfg_.r, -1.0, 1.0)),
               wrap_angle(std::atan2(p.y(), p.x()))};
  }
  std::optional<double> gamma_tilde;
  try {
    gamma_tilde = gamma_unfiltered(state_.v, angles_.theta, angles_.phi);
  } catch (const DegenerateError&) {
    // Motion inversion: hold the estimate and let the observer predict.
  }
  if (!observer_) {
    if (gamma_tilde) observer_ = LuenbergerState{*gamma_tilde, 0.0};
    return;
  }
  for (int i = 0; i < steps; ++i) {
    const bool last = i + 1 == steps;
    const double input =
        last && gamma_tilde ? *gamma_tilde : observer_->gamma;
    observer_ = luenberger_step(*observer_, input, cfg_.K_gamma, cfg_.Ts);
  }
}

EstimateOutput Pipeline::step(const SensorFrame& f) {
  if (last_t_ && f.t < *last_t_) {
    throw InputFormatError("pipeline: frame at t=" + std::to_string(f.t) +
                           " precedes t=" + std::to_string(*last_t_));
  }
  const int steps =
      last_t_ ? static_cast<int>(std::lround((f.t - *last_t_) / cfg_.Ts)) : 0;

  Vec3 a_G = Vec3::Zero();
  if (cfg_.use_imu && f.accel_K && f.quat) {
    a_G = accel_to_inertial(*f.accel_K, *f.quat, cfg_.phi_G);
  }
  for (int i = 0; i < steps; ++i) state_ = time_update(state_, a_G, cfg_.Ts);

  if (const auto m = position_measurement(f)) apply_measurement(*m);
  last_t_ = f.t;

  const bool ready = initialized_[0] && initialized_[1] && initialized_[2];
  if (ready) update_gamma(std::max(steps, 1));

  EstimateOutput out;
  out.t = f.t;
  out.p_hat = state_.p;
  out.v_hat = state_.v;
  out.theta_hat = angles_.theta;
  out.phi_hat = angles_.phi;
  if (observer_) {
    out.gamma_hat = wrap_angle(observer_->gamma);
    out.gamma_dot_hat = observer_->gamma_dot;
  }
  return out;
}

std::vector<EstimateOutput> run_pipeline(const EstimatorConfig& cfg,
                                         std::span<const SensorFrame> frames) {
  Pipeline pipeline(cfg);
  std::vector<EstimateOutput> out;
  out.reserve(frames.size());
  for (const SensorFrame& f : frames) out.push_back(pipeline.step(f));
  return out;
}

}  // namespace kitefusion
