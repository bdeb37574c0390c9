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

/* C interface to the kitefusion estimation library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns a kf_status; on failure kf_last_error() returns a
 * message for the calling thread that stays valid until its next call.
 */
#ifndef KITEFUSION_KITEFUSION_H_
#define KITEFUSION_KITEFUSION_H_

#include <stdint.h>

#if defined(_WIN32)
#if defined(KITEFUSION_BUILDING)
#define KF_API __declspec(dllexport)
#else
#define KF_API __declspec(dllimport)
#endif
#else
#define KF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kf_status {
  KF_OK = 0,
  KF_ERR_INVALID_ARGUMENT = 1, /* null handle or pointer, bad enum value */
  KF_ERR_INPUT_FORMAT = 2,     /* malformed settings, log or report */
  KF_ERR_NUMERICAL = 3,        /* solver did not converge, singular matrix */
  KF_ERR_DOMAIN = 4,           /* value outside an operation's domain */
  KF_ERR_IO = 5,
  KF_ERR_INTERNAL = 6
} kf_status;

KF_API const char* kf_version(void);
KF_API const char* kf_status_name(kf_status status);
KF_API const char* kf_last_error(void);

/* Settings -------------------------------------------------------------- */

typedef struct kf_settings kf_settings;

/* Defaults: r = 30 m, Ts = 0.02 s, lambda 10 (GPS) and 500 (line angle),
 * K_gamma = [0.4, 0.9], approach 3, IMU enabled. */
KF_API kf_status kf_settings_create(kf_settings** out);
KF_API kf_status kf_settings_load(const char* path, kf_settings** out);
KF_API kf_status kf_settings_set(kf_settings* s, const char* key,
                                 const char* value);
KF_API kf_status kf_settings_validate(const kf_settings* s);
KF_API void kf_settings_destroy(kf_settings* s);

/* Streaming estimation ---------------------------------------------------- */

enum {
  KF_HAS_ACCEL = 1u << 0,
  KF_HAS_GYRO = 1u << 1,
  KF_HAS_QUAT = 1u << 2,
  KF_HAS_GPS = 1u << 3,
  KF_HAS_BARO = 1u << 4,
  KF_HAS_ENCODER = 1u << 5,
  KF_HAS_WIND = 1u << 6
};

/* One sensor sample. Fields whose KF_HAS_* bit is clear are ignored. */
typedef struct kf_frame {
  double t;          /* s */
  uint32_t present;  /* KF_HAS_* bits */
  double accel[3];   /* m/s^2, wing frame */
  double gyro[3];    /* rad/s, wing frame */
  double quat[4];    /* scalar first, wing frame relative to NED */
  double gps_xy[2];  /* m, ground frame */
  double baro_z;     /* m */
  double encoder[2]; /* theta_B, phi_B in rad */
  double wind;       /* m/s */
} kf_frame;

typedef struct kf_estimate {
  double t;
  double p[3];  /* m, ground frame */
  double v[3];  /* m/s */
  double theta;
  double phi;
  double gamma;     /* (-pi, pi] */
  double gamma_dot; /* rad/s */
} kf_estimate;

typedef struct kf_pipeline kf_pipeline;

/* approach is 1 (GPS + barometer), 2 (GPS projected on the sphere +
 * barometer) or 3 (line angle sensor); 0 uses the settings' approach. */
KF_API kf_status kf_pipeline_create(const kf_settings* s, int approach,
                                    kf_pipeline** out);
/* Frames must arrive in non-decreasing time order. */
KF_API kf_status kf_pipeline_step(kf_pipeline* p, const kf_frame* frame,
                                  kf_estimate* out);
KF_API void kf_pipeline_destroy(kf_pipeline* p);

/* Steady-state Kalman gain for the given approach, row-major 6x3 over the
 * state [p; v]. radius receives the closed-loop spectral radius. Either
 * output may be null. */
KF_API kf_status kf_kalman_gain(const kf_settings* s, int approach,
                                double gain[18], double* radius);

/* File operations. A null output path writes to standard output. -------- */

KF_API kf_status kf_simulate(const kf_settings* s, const char* log_path);
KF_API kf_status kf_estimate_log(const kf_settings* s, const char* log_path,
                                 int approach, const char* out_path);
KF_API kf_status kf_evaluate_log(const kf_settings* s, const char* log_path,
                                 const char* report_path);
KF_API kf_status kf_bode(const kf_settings* s, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* KITEFUSION_KITEFUSION_H_ */
