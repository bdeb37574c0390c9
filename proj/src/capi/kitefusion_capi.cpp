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

#include "kitefusion/kitefusion.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "core/evalio.hpp"
#include "core/pipelines.hpp"
#include "core/simkite.hpp"

struct kf_settings {
  kitefusion::Settings value;
};

struct kf_pipeline {
  explicit kf_pipeline(const kitefusion::EstimatorConfig& cfg) : value(cfg) {}
  kitefusion::Pipeline value;
};

namespace {

thread_local std::string g_last_error;

kf_status fail(kf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

kf_status guarded(const std::function<void()>& body) {
  using namespace kitefusion;
  try {
    body();
    g_last_error.clear();
    return KF_OK;
  } catch (const InputFormatError& e) {
    return fail(KF_ERR_INPUT_FORMAT, e.what());
  } catch (const NumericalError& e) {
    return fail(KF_ERR_NUMERICAL, e.what());
  } catch (const DomainError& e) {
    return fail(KF_ERR_DOMAIN, e.what());
  } catch (const IoError& e) {
    return fail(KF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KF_ERR_INTERNAL, "unknown error");
  }
}

kitefusion::Approach resolve_approach(const kitefusion::Settings& s, int approach) {
  if (approach == 0) return s.estimator.approach;
  return kitefusion::approach_from_int(approach);
}

bool valid_approach(int approach) { return approach >= 0 && approach <= 3; }

// Writes through body to path, or to stdout when path is null. Files are
// written in full or not at all.
void write_output(const char* path, const std::function<void(std::ostream&)>& body) {
  if (path == nullptr) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  const std::string target(path);
  const std::string tmp = target + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw kitefusion::IoError("cannot open '" + tmp + "' for writing");
    body(out);
    out.flush();
    if (!out) throw kitefusion::IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), target.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw kitefusion::IoError("cannot move output to '" + target + "'");
  }
}

kitefusion::SensorFrame to_frame(const kf_frame& f) {
  using namespace kitefusion;
  SensorFrame out;
  out.t = f.t;
  if (f.present & KF_HAS_ACCEL) out.accel_K = Vec3(f.accel[0], f.accel[1], f.accel[2]);
  if (f.present & KF_HAS_GYRO) out.gyro_K = BodyRates{f.gyro[0], f.gyro[1], f.gyro[2]};
  if (f.present & KF_HAS_QUAT) out.quat = Quat{f.quat[0], f.quat[1], f.quat[2], f.quat[3]};
  if (f.present & KF_HAS_GPS) out.gps_xy = GpsFix{f.gps_xy[0], f.gps_xy[1]};
  if (f.present & KF_HAS_BARO) out.baro_z = f.baro_z;
  if (f.present & KF_HAS_ENCODER) out.encoder = EncoderReading{f.encoder[0], f.encoder[1]};
  if (f.present & KF_HAS_WIND) out.wind_speed = f.wind;
  return out;
}

}  // namespace

extern "C" {

const char* kf_version(void) { return "0.1.0"; }

const char* kf_status_name(kf_status status) {
  switch (status) {
    case KF_OK: return "ok";
    case KF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KF_ERR_INPUT_FORMAT: return "input format error";
    case KF_ERR_NUMERICAL: return "numerical failure";
    case KF_ERR_DOMAIN: return "domain error";
    case KF_ERR_IO: return "i/o error";
    case KF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kf_last_error(void) { return g_last_error.c_str(); }

kf_status kf_settings_create(kf_settings** out) {
  if (out == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null output pointer");
  *out = nullptr;
  return guarded([&] { *out = new kf_settings{}; });
}

kf_status kf_settings_load(const char* path, kf_settings** out) {
  if (path == nullptr || out == nullptr) {
    return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] { *out = new kf_settings{kitefusion::load_settings(path)}; });
}

kf_status kf_settings_set(kf_settings* s, const char* key, const char* value) {
  if (s == nullptr || key == nullptr || value == nullptr) {
    return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { kitefusion::apply_setting(s->value, key, value); });
}

kf_status kf_settings_validate(const kf_settings* s) {
  if (s == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null settings");
  return guarded([&] { s->value.validate(); });
}

void kf_settings_destroy(kf_settings* s) { delete s; }

kf_status kf_pipeline_create(const kf_settings* s, int approach, kf_pipeline** out) {
  if (s == nullptr || out == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  if (!valid_approach(approach)) return fail(KF_ERR_INVALID_ARGUMENT, "approach must be 0-3");
  *out = nullptr;
  return guarded([&] {
    *out = new kf_pipeline(s->value.estimator_for(resolve_approach(s->value, approach)));
  });
}

kf_status kf_pipeline_step(kf_pipeline* p, const kf_frame* frame, kf_estimate* out) {
  if (p == nullptr || frame == nullptr || out == nullptr) {
    return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const kitefusion::EstimateOutput e = p->value.step(to_frame(*frame));
    out->t = e.t;
    for (int i = 0; i < 3; ++i) {
      out->p[i] = e.p_hat(i);
      out->v[i] = e.v_hat(i);
    }
    out->theta = e.theta_hat;
    out->phi = e.phi_hat;
    out->gamma = e.gamma_hat;
    out->gamma_dot = e.gamma_dot_hat;
  });
}

void kf_pipeline_destroy(kf_pipeline* p) { delete p; }

kf_status kf_kalman_gain(const kf_settings* s, int approach, double gain[18],
                         double* radius) {
  if (s == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null settings");
  if (!valid_approach(approach)) return fail(KF_ERR_INVALID_ARGUMENT, "approach must be 0-3");
  return guarded([&] {
    const auto cfg = s->value.estimator_for(resolve_approach(s->value, approach));
    cfg.validate();
    const kitefusion::KalmanGain g = kitefusion::synthesize_gain({cfg.Ts, cfg.lambda});
    if (gain != nullptr) {
      for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 3; ++c) gain[3 * r + c] = g.K(r, c);
      }
    }
    if (radius != nullptr) *radius = g.closed_loop_radius;
  });
}

kf_status kf_simulate(const kf_settings* s, const char* log_path) {
  if (s == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null settings");
  return guarded([&] {
    using namespace kitefusion;
    s->value.validate();
    const SimulationResult sim = synthesize(s->value.trajectory, s->value.noise,
                                            s->value.estimator.geometry,
                                            s->value.estimator.Ts);
    const LogData log = log_from_simulation(sim, s->value);
    write_output(log_path, [&](std::ostream& out) { write_log(log, out); });
  });
}

kf_status kf_estimate_log(const kf_settings* s, const char* log_path, int approach,
                          const char* out_path) {
  if (s == nullptr || log_path == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  if (!valid_approach(approach)) return fail(KF_ERR_INVALID_ARGUMENT, "approach must be 0-3");
  return guarded([&] {
    using namespace kitefusion;
    const auto cfg = s->value.estimator_for(resolve_approach(s->value, approach));
    const LogData log = read_log(std::string(log_path));
    const auto est = run_pipeline(cfg, log.frames);
    write_output(out_path, [&](std::ostream& out) { write_estimates(est, out); });
  });
}

kf_status kf_evaluate_log(const kf_settings* s, const char* log_path,
                          const char* report_path) {
  if (s == nullptr || log_path == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    using namespace kitefusion;
    const LogData log = read_log(std::string(log_path));
    const RmseReport report = compare_approaches(log, s->value);
    write_output(report_path, [&](std::ostream& out) { write_report(report, out); });
  });
}

kf_status kf_bode(const kf_settings* s, const char* out_path) {
  if (s == nullptr) return fail(KF_ERR_INVALID_ARGUMENT, "null settings");
  return guarded([&] {
    const kitefusion::BodeTable table = kitefusion::bode_table(s->value);
    write_output(out_path, [&](std::ostream& out) { kitefusion::write_bode(table, out); });
  });
}

}  // extern "C"
