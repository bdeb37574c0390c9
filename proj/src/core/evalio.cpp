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

#include "core/evalio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"

namespace kitefusion {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string at_line(size_t line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

// --- settings -------------------------------------------------------------

double parse_scalar(std::string_view key, std::string_view value) {
  const auto v = to_double(value);
  if (!v || !std::isfinite(*v)) {
    throw InputFormatError("setting '" + std::string(key) +
                           "': expected a number, got '" + std::string(value) + "'");
  }
  return *v;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::string normalized(value);
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_scalar(key, token));
  return out;
}

long long parse_integer(std::string_view key, std::string_view value) {
  value = trim(value);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InputFormatError("setting '" + std::string(key) +
                           "': expected an integer, got '" + std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw InputFormatError("setting '" + std::string(key) +
                         "': expected true or false, got '" + std::string(value) + "'");
}

std::array<double, 3> parse_lambda(std::string_view key, std::string_view value) {
  const auto v = parse_list(key, value);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw InputFormatError("setting '" + std::string(key) + "': expected 1 or 3 values");
}

using Setter = std::function<void(Settings&, std::string_view, std::string_view)>;

Setter scalar(double TrajectoryParams::*m) {
  return [m](Settings& s, auto k, auto v) { s.trajectory.*m = parse_scalar(k, v); };
}

Setter noise_scalar(double NoiseSpec::*m) {
  return [m](Settings& s, auto k, auto v) { s.noise.*m = parse_scalar(k, v); };
}

Setter geometry_scalar(double EncoderGeometry::*m) {
  return [m](Settings& s, auto k, auto v) {
    s.estimator.geometry.*m = parse_scalar(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"r", [](Settings& s, auto k, auto v) {
         s.trajectory.r = s.estimator.r = parse_scalar(k, v);
       }},
      {"phi_G", [](Settings& s, auto k, auto v) {
         s.trajectory.phi_G = s.estimator.phi_G = parse_scalar(k, v);
       }},
      {"Ts", [](Settings& s, auto k, auto v) { s.estimator.Ts = parse_scalar(k, v); }},
      {"lambda_gps", [](Settings& s, auto k, auto v) { s.lambda_gps = parse_lambda(k, v); }},
      {"lambda_line", [](Settings& s, auto k, auto v) { s.lambda_line = parse_lambda(k, v); }},
      {"K_gamma", [](Settings& s, auto k, auto v) {
         const auto g = parse_list(k, v);
         if (g.size() != 2) {
           throw InputFormatError("setting 'K_gamma': expected 2 values");
         }
         s.estimator.K_gamma = {g[0], g[1]};
       }},
      {"use_imu", [](Settings& s, auto k, auto v) { s.estimator.use_imu = parse_bool(k, v); }},
      {"approach", [](Settings& s, auto k, auto v) {
         try {
           s.estimator.approach = approach_from_int(static_cast<int>(parse_integer(k, v)));
         } catch (const DomainError& e) {
           throw InputFormatError(std::string("setting 'approach': ") + e.what());
         }
       }},
      {"enc_L1", geometry_scalar(&EncoderGeometry::rod_length)},
      {"enc_L2", geometry_scalar(&EncoderGeometry::pulley_length)},
      {"enc_l1", geometry_scalar(&EncoderGeometry::vertical_offset)},
      {"enc_l2", geometry_scalar(&EncoderGeometry::horizontal_offset)},
      {"encoder_cpr", [](Settings& s, auto k, auto v) {
         s.noise.encoder_cpr = static_cast<int>(parse_integer(k, v));
       }},
      {"theta0", scalar(&TrajectoryParams::theta0)},
      {"phi0", scalar(&TrajectoryParams::phi0)},
      {"a_theta", scalar(&TrajectoryParams::a_theta)},
      {"a_phi", scalar(&TrajectoryParams::a_phi)},
      {"f_loop", scalar(&TrajectoryParams::f_loop)},
      {"speed_scale", scalar(&TrajectoryParams::speed_scale)},
      {"speed_ref", scalar(&TrajectoryParams::speed_ref)},
      {"duration", scalar(&TrajectoryParams::duration)},
      {"accel_noise_density", noise_scalar(&NoiseSpec::accel_noise_density)},
      {"accel_bias", noise_scalar(&NoiseSpec::accel_bias)},
      {"accel_range", noise_scalar(&NoiseSpec::accel_range)},
      {"gyro_noise_density", noise_scalar(&NoiseSpec::gyro_noise_density)},
      {"gyro_bias", noise_scalar(&NoiseSpec::gyro_bias)},
      {"gyro_range", noise_scalar(&NoiseSpec::gyro_range)},
      {"gps_sigma_xy", noise_scalar(&NoiseSpec::gps_sigma_xy)},
      {"gps_rate", noise_scalar(&NoiseSpec::gps_rate)},
      {"gps_latency", noise_scalar(&NoiseSpec::gps_latency)},
      {"gps_speed_inflation", noise_scalar(&NoiseSpec::gps_speed_inflation)},
      {"baro_resolution", noise_scalar(&NoiseSpec::baro_resolution)},
      {"baro_rate", noise_scalar(&NoiseSpec::baro_rate)},
      {"attitude_rms", noise_scalar(&NoiseSpec::attitude_rms)},
      {"seed", [](Settings& s, auto k, auto v) {
         const long long seed = parse_integer(k, v);
         if (seed < 0) throw InputFormatError("setting 'seed': must be >= 0");
         s.noise.seed = static_cast<std::uint64_t>(seed);
       }},
      {"speed_bins", [](Settings& s, auto k, auto v) { s.speed_bins = parse_list(k, v); }},
      {"eval_warmup", [](Settings& s, auto k, auto v) { s.eval_warmup = parse_scalar(k, v); }},
      {"bode_fmin", [](Settings& s, auto k, auto v) { s.bode_fmin = parse_scalar(k, v); }},
      {"bode_points", [](Settings& s, auto k, auto v) {
         s.bode_points = static_cast<int>(parse_integer(k, v));
       }},
  };
  return table;
}

// --- log columns ----------------------------------------------------------

constexpr std::array<std::string_view, 17> kLogColumns = {
    "t", "ax", "ay", "az", "wx", "wy", "wz", "q1", "q2", "q3", "q4",
    "gps_x", "gps_y", "baro_z", "enc_theta", "enc_phi", "wind"};
constexpr std::array<std::string_view, 7> kTruthColumns = {
    "truth_px", "truth_py", "truth_pz", "truth_vx", "truth_vy", "truth_vz",
    "truth_gamma"};

struct Group {
  const char* name;
  size_t first;
  size_t count;
};
constexpr std::array<Group, 7> kGroups = {{{"accelerometer", 1, 3},
                                           {"gyroscope", 4, 3},
                                           {"quaternion", 7, 4},
                                           {"gps", 11, 2},
                                           {"barometer", 13, 1},
                                           {"encoder", 14, 2},
                                           {"wind", 16, 1}}};

void append(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (v) line += format_number(*v, 17);
}

std::string join_header(bool with_truth) {
  std::string h;
  for (auto c : kLogColumns) {
    if (!h.empty()) h += ',';
    h += c;
  }
  if (with_truth) {
    for (auto c : kTruthColumns) {
      h += ',';
      h += c;
    }
  }
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::string bin_label(const std::vector<double>& edges, size_t i) {
  if (edges.empty()) return "all";
  if (i == 0) return "<" + format_number(edges.front(), 6);
  if (i == edges.size()) return ">" + format_number(edges.back(), 6);
  return format_number(edges[i - 1], 6) + "-" + format_number(edges[i], 6);
}

size_t bin_index(const std::vector<double>& edges, double speed) {
  return static_cast<size_t>(
      std::upper_bound(edges.begin(), edges.end(), speed) - edges.begin());
}

constexpr std::array<const char*, 4> kVariables = {"p_X", "p_Y", "p_Z", "gamma"};

}  // namespace

// --- settings -------------------------------------------------------------

EstimatorConfig Settings::estimator_for(Approach approach) const {
  EstimatorConfig cfg = estimator;
  cfg.approach = approach;
  cfg.lambda = approach == Approach::kLineAngle ? lambda_line : lambda_gps;
  return cfg;
}

void Settings::validate() const {
  trajectory.validate();
  noise.validate();
  for (int a = 1; a <= 3; ++a) estimator_for(approach_from_int(a)).validate();
  if (trajectory.r != estimator.r || trajectory.phi_G != estimator.phi_G) {
    throw DomainError("settings: simulator and estimator disagree on r or phi_G");
  }
  for (size_t i = 0; i < speed_bins.size(); ++i) {
    if (!std::isfinite(speed_bins[i]) || (i > 0 && !(speed_bins[i] > speed_bins[i - 1]))) {
      throw DomainError("settings: speed_bins must be finite and strictly increasing");
    }
  }
  if (!(eval_warmup >= 0.0)) throw DomainError("settings: eval_warmup must be >= 0");
  if (!(bode_fmin > 0.0 && bode_fmin < 0.5 / estimator.Ts)) {
    throw DomainError("settings: bode_fmin must lie in (0, Nyquist)");
  }
  if (bode_points < 2) throw DomainError("settings: bode_points must be >= 2");
}

void apply_setting(Settings& s, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end()) {
    throw InputFormatError("unknown setting '" + std::string(trim(key)) + "'");
  }
  it->second(s, it->first, trim(value));
}

Settings parse_settings(std::istream& in) {
  Settings s;
  std::string raw;
  size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw InputFormatError(at_line(line, "expected 'key = value'"));
    }
    try {
      apply_setting(s, text.substr(0, eq), text.substr(eq + 1));
    } catch (const InputFormatError& e) {
      throw InputFormatError(at_line(line, e.what()));
    }
  }
  return s;
}

Settings load_settings(const std::string& path) {
  auto in = open_in(path);
  return parse_settings(in);
}

// --- log ------------------------------------------------------------------

LogData log_from_simulation(const SimulationResult& sim,
                            const Settings& settings) {
  LogData log;
  log.metadata = {{"rng", sim.rng},
                  {"seed", std::to_string(settings.noise.seed)},
                  {"speed_scale", format_number(settings.trajectory.speed_scale, 17)},
                  {"Ts", format_number(settings.estimator.Ts, 17)}};
  log.frames = sim.frames;
  std::vector<LogTruth> truth;
  truth.reserve(sim.truth.size());
  for (const TruthSample& t : sim.truth) truth.push_back({t.p, t.v, t.gamma});
  log.truth = std::move(truth);
  return log;
}

void write_log(const LogData& log, std::ostream& out) {
  if (log.truth && log.truth->size() != log.frames.size()) {
    throw DomainError("write_log: truth and frame counts differ");
  }
  for (const auto& [key, value] : log.metadata) {
    out << "# " << key << '=' << value << '\n';
  }
  out << join_header(log.truth.has_value()) << '\n';
  std::string line;
  for (size_t i = 0; i < log.frames.size(); ++i) {
    const SensorFrame& f = log.frames[i];
    line = format_number(f.t, 17);
    for (int k = 0; k < 3; ++k) {
      append(line, f.accel_K ? std::optional<double>((*f.accel_K)(k)) : std::nullopt);
    }
    const auto gyro = [&](double BodyRates::*m) {
      return f.gyro_K ? std::optional<double>((*f.gyro_K).*m) : std::nullopt;
    };
    append(line, gyro(&BodyRates::wx));
    append(line, gyro(&BodyRates::wy));
    append(line, gyro(&BodyRates::wz));
    const auto quat = [&](double Quat::*m) {
      return f.quat ? std::optional<double>((*f.quat).*m) : std::nullopt;
    };
    append(line, quat(&Quat::q1));
    append(line, quat(&Quat::q2));
    append(line, quat(&Quat::q3));
    append(line, quat(&Quat::q4));
    append(line, f.gps_xy ? std::optional<double>(f.gps_xy->x) : std::nullopt);
    append(line, f.gps_xy ? std::optional<double>(f.gps_xy->y) : std::nullopt);
    append(line, f.baro_z);
    append(line, f.encoder ? std::optional<double>(f.encoder->theta_B) : std::nullopt);
    append(line, f.encoder ? std::optional<double>(f.encoder->phi_B) : std::nullopt);
    append(line, f.wind_speed);
    if (log.truth) {
      const LogTruth& t = (*log.truth)[i];
      for (int k = 0; k < 3; ++k) append(line, t.p(k));
      for (int k = 0; k < 3; ++k) append(line, t.v(k));
      append(line, t.gamma);
    }
    out << line << '\n';
  }
  if (!out) throw IoError("write_log: stream error");
}

void write_log(const LogData& log, const std::string& path) {
  auto out = open_out(path);
  write_log(log, out);
}

LogData read_log(std::istream& in) {
  LogData log;
  std::string raw;
  size_t line = 0;
  bool have_header = false;
  bool with_truth = false;
  std::optional<double> last_t;
  std::vector<LogTruth> truth;

  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (!have_header) {
      if (!text.empty() && text.front() == '#') {
        const std::string_view body = trim(text.substr(1));
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
          log.metadata.emplace_back(std::string(body), "");
        } else {
          log.metadata.emplace_back(std::string(trim(body.substr(0, eq))),
                                    std::string(trim(body.substr(eq + 1))));
        }
        continue;
      }
      if (text == join_header(false)) {
        with_truth = false;
      } else if (text == join_header(true)) {
        with_truth = true;
      } else {
        throw InputFormatError(at_line(line, "unrecognized header"));
      }
      have_header = true;
      continue;
    }
    if (trim(text).empty()) {
      throw InputFormatError(at_line(line, "empty row"));
    }

    const auto cells = split(text, ',');
    const size_t expected = kLogColumns.size() + (with_truth ? kTruthColumns.size() : 0);
    if (cells.size() != expected) {
      throw InputFormatError(at_line(line, "expected " + std::to_string(expected) +
                                               " columns, got " +
                                               std::to_string(cells.size())));
    }
    std::vector<std::optional<double>> v(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      if (trim(cells[c]).empty()) continue;
      v[c] = to_double(cells[c]);
      if (!v[c] || !std::isfinite(*v[c])) {
        const std::string_view name =
            c < kLogColumns.size() ? kLogColumns[c] : kTruthColumns[c - kLogColumns.size()];
        throw InputFormatError(at_line(line, "bad number in column '" +
                                                 std::string(name) + "'"));
      }
    }
    if (!v[0]) throw InputFormatError(at_line(line, "missing timestamp"));
    if (last_t && !(*v[0] > *last_t)) {
      throw InputFormatError(at_line(line, "timestamp " + format_number(*v[0], 17) +
                                               " is not after " +
                                               format_number(*last_t, 17)));
    }
    last_t = v[0];

    for (const Group& g : kGroups) {
      size_t present = 0;
      for (size_t c = g.first; c < g.first + g.count; ++c) present += v[c].has_value();
      if (present != 0 && present != g.count) {
        throw InputFormatError(at_line(line, std::string("partially filled ") +
                                                 g.name + " columns"));
      }
    }

    SensorFrame f;
    f.t = *v[0];
    if (v[1]) f.accel_K = Vec3(*v[1], *v[2], *v[3]);
    if (v[4]) f.gyro_K = BodyRates{*v[4], *v[5], *v[6]};
    if (v[7]) f.quat = Quat{*v[7], *v[8], *v[9], *v[10]};
    if (v[11]) f.gps_xy = GpsFix{*v[11], *v[12]};
    if (v[13]) f.baro_z = *v[13];
    if (v[14]) f.encoder = EncoderReading{*v[14], *v[15]};
    if (v[16]) f.wind_speed = *v[16];
    log.frames.push_back(f);

    if (with_truth) {
      const size_t b = kLogColumns.size();
      for (size_t c = b; c < expected; ++c) {
        if (!v[c]) throw InputFormatError(at_line(line, "missing truth value"));
      }
      truth.push_back({Vec3(*v[b], *v[b + 1], *v[b + 2]),
                       Vec3(*v[b + 3], *v[b + 4], *v[b + 5]), *v[b + 6]});
    }
  }
  if (!have_header) throw InputFormatError(at_line(line + 1, "missing header"));
  if (with_truth) log.truth = std::move(truth);
  return log;
}

LogData read_log(const std::string& path) {
  auto in = open_in(path);
  return read_log(in);
}

void write_estimates(std::span<const EstimateOutput> est, std::ostream& out) {
  out << "t,px,py,pz,vx,vy,vz,theta,phi,gamma,gamma_dot\n";
  std::string line;
  for (const EstimateOutput& e : est) {
    line = format_number(e.t, 17);
    for (int k = 0; k < 3; ++k) append(line, e.p_hat(k));
    for (int k = 0; k < 3; ++k) append(line, e.v_hat(k));
    append(line, e.theta_hat);
    append(line, e.phi_hat);
    append(line, e.gamma_hat);
    append(line, e.gamma_dot_hat);
    out << line << '\n';
  }
  if (!out) throw IoError("write_estimates: stream error");
}

// --- evaluation -----------------------------------------------------------

double rmse(std::span<const double> a, std::span<const double> b, bool angular) {
  if (a.size() != b.size()) {
    throw DomainError("rmse: series lengths differ (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw DomainError("rmse: empty series");
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = angular ? wrap_angle(a[i] - b[i]) : a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

const RmseReport::Row& RmseReport::row(std::string_view variable, int approach) const {
  for (const Row& r : rows) {
    if (r.variable == variable && r.approach == approach) return r;
  }
  throw DomainError("report has no row " + std::string(variable) + " for approach " +
                    std::to_string(approach));
}

RmseReport compare_approaches(const LogData& log, const Settings& settings) {
  settings.validate();
  if (log.frames.empty()) throw InputFormatError("log has no frames");
  if (log.truth && log.truth->size() != log.frames.size()) {
    throw InputFormatError("log truth and frame counts differ");
  }
  const auto has = [&](auto member) {
    return std::any_of(log.frames.begin(), log.frames.end(),
                       [&](const SensorFrame& f) { return (f.*member).has_value(); });
  };
  std::vector<std::string> missing;
  if (!has(&SensorFrame::gps_xy)) missing.push_back("gps");
  if (!has(&SensorFrame::baro_z)) missing.push_back("barometer");
  if (!has(&SensorFrame::encoder)) missing.push_back("encoder");
  if (settings.estimator.use_imu) {
    if (!has(&SensorFrame::accel_K)) missing.push_back("accelerometer");
    if (!has(&SensorFrame::quat)) missing.push_back("quaternion");
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw InputFormatError("log is missing channels: " + names);
  }

  std::array<std::vector<EstimateOutput>, 3> est;
  for (int a = 0; a < 3; ++a) {
    est[a] = run_pipeline(settings.estimator_for(approach_from_int(a + 1)), log.frames);
  }

  // Reference series per variable.
  const size_t n = log.frames.size();
  std::array<std::vector<double>, 4> ref;
  for (auto& r : ref) r.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 p = log.truth ? (*log.truth)[i].p : est[2][i].p_hat;
    const double g = log.truth ? (*log.truth)[i].gamma : est[2][i].gamma_hat;
    ref[0][i] = p.x();
    ref[1][i] = p.y();
    ref[2][i] = p.z();
    ref[3][i] = g;
  }

  const std::vector<double>& edges = settings.speed_bins;
  const size_t nbins = edges.size() + 1;
  std::vector<std::vector<size_t>> members(nbins);
  const double t_start = log.frames.front().t + settings.eval_warmup;
  for (size_t i = 0; i < n; ++i) {
    const SensorFrame& f = log.frames[i];
    if (f.t < t_start) continue;
    const double speed = f.wind_speed.value_or(settings.trajectory.speed_scale);
    members[bin_index(edges, speed)].push_back(i);
  }

  RmseReport report;
  report.reference = log.truth ? "truth" : "approach3";
  for (size_t b = 0; b < nbins; ++b) report.bins.push_back(bin_label(edges, b));
  for (int var = 0; var < 4; ++var) {
    for (int a = 0; a < 3; ++a) {
      RmseReport::Row row{kVariables[var], a + 1, {}};
      for (size_t b = 0; b < nbins; ++b) {
        if (members[b].empty()) {
          row.values.push_back(std::numeric_limits<double>::quiet_NaN());
          continue;
        }
        std::vector<double> x, y;
        for (size_t i : members[b]) {
          const EstimateOutput& e = est[a][i];
          x.push_back(var < 3 ? e.p_hat(var) : e.gamma_hat);
          y.push_back(ref[var][i]);
        }
        row.values.push_back(rmse(x, y, var == 3));
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_report(const RmseReport& report, std::ostream& out) {
  out << "# reference=" << report.reference << '\n';
  out << "variable,approach";
  for (const auto& b : report.bins) out << ',' << b;
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.variable << ',' << row.approach;
    for (double v : row.values) out << ',' << format_number(v, 9);
    out << '\n';
  }
  if (!out) throw IoError("write_report: stream error");
}

RmseReport read_report(std::istream& in) {
  RmseReport report;
  std::string raw;
  size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (!have_header && !text.empty() && text.front() == '#') {
      const std::string_view body = trim(text.substr(1));
      if (body.starts_with("reference=")) {
        report.reference = std::string(body.substr(10));
      }
      continue;
    }
    const auto cells = split(text, ',');
    if (!have_header) {
      if (cells.size() < 3 || cells[0] != "variable" || cells[1] != "approach") {
        throw InputFormatError(at_line(line, "unrecognized report header"));
      }
      for (size_t c = 2; c < cells.size(); ++c) report.bins.emplace_back(cells[c]);
      have_header = true;
      continue;
    }
    if (cells.size() != report.bins.size() + 2) {
      throw InputFormatError(at_line(line, "wrong number of columns"));
    }
    RmseReport::Row row;
    row.variable = std::string(cells[0]);
    const auto a = to_double(cells[1]);
    if (!a) throw InputFormatError(at_line(line, "bad approach"));
    row.approach = static_cast<int>(*a);
    for (size_t c = 2; c < cells.size(); ++c) {
      if (trim(cells[c]) == "nan") {
        row.values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = to_double(cells[c]);
      if (!v) throw InputFormatError(at_line(line, "bad number"));
      row.values.push_back(*v);
    }
    report.rows.push_back(std::move(row));
  }
  if (!have_header) throw InputFormatError("report has no header");
  return report;
}

// --- frequency responses --------------------------------------------------

BodeTable bode_table(const Settings& settings) {
  settings.validate();
  const double Ts = settings.estimator.Ts;
  const double fmax = 0.999 * 0.5 / Ts;
  BodeTable t;
  const int n = settings.bode_points;
  const double ratio = std::log(fmax / settings.bode_fmin);
  for (int i = 0; i < n; ++i) {
    t.f.push_back(settings.bode_fmin * std::exp(ratio * i / (n - 1)));
  }
  const auto gps = kf_frequency_response({Ts, settings.lambda_gps}, 0, t.f);
  const auto line = kf_frequency_response({Ts, settings.lambda_line}, 0, t.f);
  const auto lo = lo_frequency_response(settings.estimator.K_gamma, Ts, t.f);
  t.kf_fu_gps = gps.mag_fu;
  t.kf_fy_gps = gps.mag_fy;
  t.kf_fu_line = line.mag_fu;
  t.kf_fy_line = line.mag_fy;
  t.lo_fy1 = lo.mag_fy1;
  t.lo_fy2 = lo.mag_fy2;
  for (double f : t.f) {
    const std::complex<double> z = std::polar(1.0, 2.0 * kPi * f * Ts);
    const double d = std::abs(z - 1.0);
    t.double_integrator.push_back(Ts * Ts / (d * d));
    t.discrete_derivative.push_back(d / Ts);
  }
  return t;
}

void write_bode(const BodeTable& t, std::ostream& out) {
  out << "f,kf_fu_gps,kf_fy_gps,kf_fu_line,kf_fy_line,double_integrator,"
         "lo_fy1,lo_fy2,discrete_derivative\n";
  for (size_t i = 0; i < t.f.size(); ++i) {
    out << format_number(t.f[i], 9) << ',' << format_number(t.kf_fu_gps[i], 9) << ','
        << format_number(t.kf_fy_gps[i], 9) << ',' << format_number(t.kf_fu_line[i], 9)
        << ',' << format_number(t.kf_fy_line[i], 9) << ','
        << format_number(t.double_integrator[i], 9) << ','
        << format_number(t.lo_fy1[i], 9) << ',' << format_number(t.lo_fy2[i], 9) << ','
        << format_number(t.discrete_derivative[i], 9) << '\n';
  }
  if (!out) throw IoError("write_bode: stream error");
}

}  // namespace kitefusion
