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

#include "core/frames.hpp"

namespace kitefusion {

// Sensor-head geometry of the two-encoder line angle sensor. rod_length and
// pulley_length are the metal rod and the pulley on top of it; the offsets
// locate the line attachment point P1 relative to the encoder axis P2.
//
// The defaults are placeholders for a desk-scale head, not measured values.
struct EncoderGeometry {
  double rod_length = 0.25;        // L1, m
  double pulley_length = 0.05;     // L2, m
  double vertical_offset = 0.10;   // l1, m
  double horizontal_offset = 0.10; // l2, m

  // All lengths >= 0, rod and pulley not both zero.
  void validate() const;
};

inline constexpr int kDefaultCountsPerRev = 400;

// Raw encoder angles. When produced by angles_to_encoder with a positive
// count resolution, both are integer multiples of 2*pi/counts_per_rev.
struct EncoderReading {
  double theta_B = 0.0;  // rod elevation, rad
  double phi_B = 0.0;    // rod azimuth, rad

  bool operator==(const EncoderReading&) const = default;
};

// Line direction from the encoder readings. Throws DegenerateError when the
// pulley end sits straight above the attachment point.
SphericalAngles encoder_to_angles(const EncoderReading& reading,
                                  const EncoderGeometry& geo);

// Position on the sphere of radius r measured by the line angle sensor.
Vec3 angles_to_position(double theta, double phi, double r);

// Rounds an angle to the nearest encoder count. counts_per_rev <= 0
// disables quantization.
double quantize_angle(double angle, int counts_per_rev);

// Encoder readings that produce (theta, phi), found by damped Newton on the
// two-dimensional residual of encoder_to_angles, then quantized. Newton
// starts from the ray/sphere construction of the sensor head. Throws
// NumericalError if the iteration does not reach 1e-12 within 50 steps.
EncoderReading angles_to_encoder(double theta, double phi,
                                 const EncoderGeometry& geo,
                                 int counts_per_rev = kDefaultCountsPerRev);

}  // namespace kitefusion
