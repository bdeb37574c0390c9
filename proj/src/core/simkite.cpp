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

#include "core/simkite.hpp"

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

constexpr double kDegToRad = kPi / 180.0;
constexpr double kScheduleEps = 1e-9;
constexpr double kGyroDiffStep = 1e-5;  // s

// Reproducible across platforms: mt19937_64 output is fixed by the
// standard, and the conversions below do not depend on the library's
// distribution implementations.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double symmetric(double half_width) {
    return half_width * (2.0 * uniform() - 1.0);
  }

  // Marsaglia polar method; the second variate is discarded.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  Vec3 normal3(double sigma) {
    const double x = normal(), y = normal(), z = normal();
    return sigma * Vec3(x, y, z);
  }

 private:
  std::mt19937_64 engine_;
};

struct Kinematics {
  Vec3 p, v, a;
  double theta, phi;
};

Kinematics kinematics(const TrajectoryParams& prm, double t) {
  const double w = prm.angular_rate();
  const double s1 = std::sin(w * t), c1 = std::cos(w * t);
  const double s2 = std::sin(2.0 * w * t), c2 = std::cos(2.0 * w * t);

  const double th = prm.theta0 + prm.a_theta * s2;
  const double th_d = 2.0 * w * prm.a_theta * c2;
  const double th_dd = -4.0 * w * w * prm.a_theta * s2;
  const double ph = prm.phi0 + prm.a_phi * s1;
  const double ph_d = w * prm.a_phi * c1;
  const double ph_dd = -w * w * prm.a_phi * s1;

  const double st = std::sin(th), ct = std::cos(th);
  const double sp = std::sin(ph), cp = std::cos(ph);
  const Vec3 u(ct * cp, ct * sp, st);
  const Vec3 u_t(-st * cp, -st * sp, ct);
  const Vec3 u_p(-ct * sp, ct * cp, 0.0);
  const Vec3 u_tp(st * sp, -st * cp, 0.0);
  const Vec3 u_pp(-ct * cp, -ct * sp, 0.0);

  Kinematics k;
  k.theta = th;
  k.phi = ph;
  k.p = prm.r * u;
  k.v = prm.r * (u_t * th_d + u_p * ph_d);
  k.a = prm.r * (-u * th_d * th_d + 2.0 * u_tp * th_d * ph_d +
                 u_pp * ph_d * ph_d + u_t * th_dd + u_p * ph_dd);
  return k;
}

Quat attitude_of(const Kinematics& k, double phi_G) {
  const Vec3 kx = k.v.normalized();
  const Vec3 kz = -k.p.normalized();
  const Vec3 ky = kz.cross(kx);
  Mat3 k_to_g;
  k_to_g << kx, ky, kz;
  return rot_to_quat(rot_ned_to_g(phi_G) * k_to_g);
}

Quat same_hemisphere(const Quat& q, const Quat& ref) {
  const double dot = q.q1 * ref.q1 + q.q2 * ref.q2 + q.q3 * ref.q3 + q.q4 * ref.q4;
  return dot < 0.0 ? -q : q;
}

TruthSample truth_unchecked(const TrajectoryParams& prm, double t) {
  const Kinematics k = kinematics(prm, t);
  TruthSample s;
  s.t = t;
  s.p = k.p;
  s.v = k.v;
  s.a = k.a;
  s.theta = k.theta;
  s.phi = k.phi;
  s.q = attitude_of(k, prm.phi_G);
  s.gamma = velocity_angle(rot_g_to_l(k.theta, k.phi) * k.v);
  return s;
}

BodyRates true_body_rates(const TrajectoryParams& prm, double t,
                          const Quat& q) {
  const double h = kGyroDiffStep;
  const Quat qp = same_hemisphere(attitude_of(kinematics(prm, t + h), prm.phi_G), q);
  const Quat qm = same_hemisphere(attitude_of(kinematics(prm, t - h), prm.phi_G), q);
  const QuatRate q_dot{(qp.q1 - qm.q1) / (2.0 * h), (qp.q2 - qm.q2) / (2.0 * h),
                       (qp.q3 - qm.q3) / (2.0 * h), (qp.q4 - qm.q4) / (2.0 * h)};
  return body_rates_from_derivative(q, q_dot);
}

bool scheduled(long k, double Ts, double rate) {
  if (rate <= 0.0) return false;
  if (k == 0) return true;
  return std::floor(k * Ts * rate + kScheduleEps) >
         std::floor((k - 1) * Ts * rate + kScheduleEps);
}

double saturate(double x, double limit) {
  if (limit <= 0.0) return x;
  return std::clamp(x, -limit, limit);
}

}  // namespace

void TrajectoryParams::validate() const {
  if (!(r > 0.0)) throw DomainError("trajectory: r must be > 0");
  if (!(f_loop > 0.0)) throw DomainError("trajectory: f_loop must be > 0");
  if (!(speed_scale > 0.0) || !(speed_ref > 0.0)) {
    throw DomainError("trajectory: speed_scale and speed_ref must be > 0");
  }
  if (!(duration >= 0.0)) throw DomainError("trajectory: duration must be >= 0");
  if (a_theta < 0.0 || a_phi <= 0.0) {
    throw DomainError("trajectory: a_theta must be >= 0 and a_phi > 0");
  }
  if (!(theta0 - a_theta > 0.0) || !(theta0 + a_theta < kPi / 2.0)) {
    throw DomainError("trajectory: pattern leaves the hemisphere 0 < theta < pi/2");
  }
}

double TrajectoryParams::angular_rate() const {
  return 2.0 * kPi * f_loop * speed_scale / speed_ref;
}

TruthSample truth_at(const TrajectoryParams& params, double t) {
  params.validate();
  if (!(t >= 0.0 && t <= params.duration)) {
    throw DomainError("truth_at: t outside [0, duration]");
  }
  return truth_unchecked(params, t);
}

NoiseSpec NoiseSpec::zero() {
  NoiseSpec n;
  n.accel_noise_density = 0.0;
  n.accel_bias = 0.0;
  n.gyro_noise_density = 0.0;
  n.gyro_bias = 0.0;
  n.gps_sigma_xy = 0.0;
  n.gps_latency = 0.0;
  n.gps_speed_inflation = 0.0;
  n.baro_resolution = 0.0;
  n.attitude_rms = 0.0;
  n.encoder_cpr = 0;
  return n;
}

void NoiseSpec::validate() const {
  const double values[] = {accel_noise_density, accel_bias, accel_range,
                           gyro_noise_density, gyro_bias, gyro_range,
                           gps_sigma_xy, gps_rate, gps_latency,
                           gps_speed_inflation, baro_resolution, baro_rate,
                           attitude_rms};
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("noise spec: all values must be finite and >= 0");
    }
  }
  if (encoder_cpr < 0) throw DomainError("noise spec: encoder_cpr must be >= 0");
}

SimulationResult synthesize(const TrajectoryParams& params,
                            const NoiseSpec& noise,
                            const EncoderGeometry& geometry, double Ts) {
  params.validate();
  noise.validate();
  geometry.validate();
  if (!(Ts > 0.0)) throw DomainError("synthesize: Ts must be > 0");

  NoiseSource rng(noise.seed);
  const double bandwidth = 0.5 / Ts;
  const double accel_sigma =
      noise.accel_noise_density * std::sqrt(bandwidth) * kGravity;
  const double gyro_sigma =
      noise.gyro_noise_density * std::sqrt(bandwidth) * kDegToRad;
  const double attitude_sigma = noise.attitude_rms * kDegToRad;
  const double accel_limit = noise.accel_range * kGravity;
  const double gyro_limit = noise.gyro_range * kDegToRad;

  Vec3 accel_bias;
  for (int i = 0; i < 3; ++i) accel_bias(i) = rng.symmetric(noise.accel_bias * kGravity);
  Vec3 gyro_bias;
  for (int i = 0; i < 3; ++i) gyro_bias(i) = rng.symmetric(noise.gyro_bias * kDegToRad);

  const long count = static_cast<long>(std::floor(params.duration / Ts + kScheduleEps)) + 1;
  SimulationResult out;
  out.rng = kRngIdentity;
  out.frames.reserve(count);
  out.truth.reserve(count);

  Quat previous_q;
  for (long k = 0; k < count; ++k) {
    const double t = k * Ts;
    TruthSample truth = truth_unchecked(params, t);
    if (k > 0) truth.q = same_hemisphere(truth.q, previous_q);
    previous_q = truth.q;

    SensorFrame f;
    f.t = t;
    f.wind_speed = params.speed_scale;

    Vec3 accel = inertial_to_accel(truth.a, truth.q, params.phi_G) + accel_bias +
                 rng.normal3(accel_sigma);
    for (int i = 0; i < 3; ++i) accel(i) = saturate(accel(i), accel_limit);
    f.accel_K = accel;

    const BodyRates w = true_body_rates(params, t, truth.q);
    const Vec3 gyro = Vec3(w.wx, w.wy, w.wz) + gyro_bias + rng.normal3(gyro_sigma);
    f.gyro_K = BodyRates{saturate(gyro.x(), gyro_limit),
                         saturate(gyro.y(), gyro_limit),
                         saturate(gyro.z(), gyro_limit)};

    const Vec3 tilt = rng.normal3(attitude_sigma);
    const Quat error = Quat{1.0, 0.5 * tilt.x(), 0.5 * tilt.y(), 0.5 * tilt.z()}
                           .normalized();
    f.quat = quat_multiply(error, truth.q).normalized();

    if (scheduled(k, Ts, noise.gps_rate)) {
      const TruthSample delayed = truth_unchecked(params, t - noise.gps_latency);
      const double sigma =
          noise.gps_sigma_xy + noise.gps_speed_inflation * truth.v.norm();
      const double ex = rng.normal(), ey = rng.normal();
      f.gps_xy = GpsFix{delayed.p.x() + sigma * ex, delayed.p.y() + sigma * ey};
    }
    if (scheduled(k, Ts, noise.baro_rate)) {
      double z = truth.p.z();
      if (noise.baro_resolution > 0.0) {
        z = std::round(z / noise.baro_resolution) * noise.baro_resolution;
      }
      f.baro_z = z;
    }
    f.encoder = angles_to_encoder(truth.theta, truth.phi, geometry,
                                  noise.encoder_cpr);

    out.frames.push_back(std::move(f));
    out.truth.push_back(truth);
  }
  return out;
}

}  // namespace kitefusion
