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

#include <stdexcept>
#include <string>

namespace kitefusion {

// Base of every error thrown by the core library. The C API maps each
// subclass onto one kf_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's mathematical domain (|p_Z| > r, a
// non-unit quaternion, a frequency above Nyquist, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input is geometrically degenerate: azimuth of a point on the Z axis,
// velocity angle of a vertical velocity, and similar.
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed configuration, log, or report file.
class InputFormatError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to converge or a matrix was singular.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kitefusion
