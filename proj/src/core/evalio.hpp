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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/pipelines.hpp"
#include "core/simkite.hpp"

namespace kitefusion {

// Everything a run needs, loaded from a flat `key = value  # comment` file.
// Keys are listed in config/default.conf. `r`, `phi_G` and `Ts` are shared
// by the simulator and the estimator.
struct Settings {
  TrajectoryParams trajectory;
  NoiseSpec noise;
  EstimatorConfig estimator;  // lambda is taken from lambda_gps/lambda_line
  std::array<double, 3> lambda_gps{10.0, 10.0, 10.0};
  std::array<double, 3> lambda_line{500.0, 500.0, 500.0};
  std::vector<double> speed_bins{2.0, 3.0, 4.0};  // bin edges, increasing
  double eval_warmup = 2.0;  // s, excluded from RMSE
  double bode_fmin = 0.01;   // Hz
  int bode_points = 200;

  // Estimator configuration for one approach with its lambda ratios.
  EstimatorConfig estimator_for(Approach approach) const;
  void validate() const;
};

// Throws InputFormatError for an unknown key or an unparsable value.
void apply_setting(Settings& s, std::string_view key, std::string_view value);

// Errors carry the 1-based line number.
Settings parse_settings(std::istream& in);
Settings load_settings(const std::string& path);

struct LogTruth {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double gamma = 0.0;

  bool operator==(const LogTruth&) const = default;
};

struct LogData {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<SensorFrame> frames;
  std::optional<std::vector<LogTruth>> truth;  // one entry per frame

  bool operator==(const LogData&) const = default;
};

LogData log_from_simulation(const SimulationResult& sim,
                            const Settings& settings);

// CSV with optional `# key=value` metadata lines before the header. Values
// are written with 17 significant digits so that reading them back is
// lossless. Absent measurements are empty cells.
void write_log(const LogData& log, std::ostream& out);
void write_log(const LogData& log, const std::string& path);

// Throws InputFormatError naming the line for malformed rows, partially
// filled channel groups and non-increasing timestamps.
LogData read_log(std::istream& in);
LogData read_log(const std::string& path);

void write_estimates(std::span<const EstimateOutput> est, std::ostream& out);

// sqrt(mean((a - b)^2)); with angular set the differences are wrapped into
// (-pi, pi] first. Throws DomainError on a length mismatch or empty input.
double rmse(std::span<const double> a, std::span<const double> b,
            bool angular = false);

struct RmseReport {
  struct Row {
    std::string variable;  // p_X, p_Y, p_Z or gamma
    int approach = 0;
    std::vector<double> values;  // one per speed bin, NaN for empty bins

    bool operator==(const Row&) const = default;
  };

  std::string reference;  // "truth" or "approach3"
  std::vector<std::string> bins;
  std::vector<Row> rows;

  // Throws DomainError if the row does not exist.
  const Row& row(std::string_view variable, int approach) const;
};

// Runs the three approaches over the log and compares each against the
// truth columns, or against approach 3 when the log has none. Frames are
// binned by their wind column (falling back to trajectory.speed_scale).
// Throws InputFormatError if a channel required by the approaches never
// appears in the log.
RmseReport compare_approaches(const LogData& log, const Settings& settings);

// Numeric cells use 9 significant digits.
void write_report(const RmseReport& report, std::ostream& out);
RmseReport read_report(std::istream& in);

struct BodeTable {
  std::vector<double> f;
  std::vector<double> kf_fu_gps, kf_fy_gps;
  std::vector<double> kf_fu_line, kf_fy_line;
  std::vector<double> double_integrator;  // |Ts^2 / (z - 1)^2|
  std::vector<double> lo_fy1, lo_fy2;
  std::vector<double> discrete_derivative;  // |(z - 1) / Ts|
};

// Log-spaced from bode_fmin to just below Nyquist, X axis tuning.
BodeTable bode_table(const Settings& settings);
void write_bode(const BodeTable& table, std::ostream& out);

}  // namespace kitefusion
