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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <Eigen/Eigenvalues>

#include "core/errors.hpp"
#include "core/estimator.hpp"
#include "core/evalio.hpp"
#include "core/frames.hpp"
#include "core/lineangle.hpp"
#include "core/pipelines.hpp"
#include "core/simkite.hpp"
#include "support/oracles.hpp"

namespace kf = kitefusion;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string runtime_note(double elapsed, double limit, bool& pass) {
  pass = pass && elapsed < limit;
  return "runtime " + fmt("%.2f", elapsed) + " s (limit " + fmt("%g", limit) + " s)";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return f;
}

// 1. Frame algebra.
Outcome frame_algebra() {
  Timer timer;
  kf::testing::Gen gen(1001);
  double ortho = 0.0, det = 0.0, ang_rt = 0.0, cart_rt = 0.0, local = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = gen.uniform(-kf::kPi / 2, kf::kPi / 2);
    const double phi = gen.uniform(-kf::kPi, kf::kPi);
    const double r = gen.uniform(1.0, 100.0);
    const kf::Mat3 R = kf::rot_g_to_l(theta, phi);
    ortho = std::max(ortho, (R.transpose() * R - kf::Mat3::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(R.determinant() - 1.0));
    const kf::Vec3 p = kf::spherical_to_cartesian({theta, phi, r});
    const kf::SphericalAngles back = kf::cartesian_to_spherical(p, r);
    // Azimuth is measured as an arc so that it stays meaningful at the poles.
    ang_rt = std::max({ang_rt, std::abs(back.theta - theta),
                       std::abs(kf::wrap_angle(back.phi - phi)) * std::cos(theta)});
    const kf::Vec3 again = kf::spherical_to_cartesian({back.theta, back.phi, r});
    cart_rt = std::max(cart_rt, (again - p).cwiseAbs().maxCoeff() / r);
    local = std::max(local, (R * p - kf::Vec3(0, 0, -r)).cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = ortho < 1e-12 && det < 1e-12 && ang_rt < 1e-12 && cart_rt < 1e-12 && local < 1e-9;
  o.detail = "1000 samples: |R'R - I| " + fmt("%.2e", ortho) + ", |det - 1| " + fmt("%.2e", det) +
             " (tol 1e-12); angle round trip " + fmt("%.2e", ang_rt) + ", cartesian round trip " +
             fmt("%.2e", cart_rt) + " (tol 1e-12); |R p - [0,0,-r]| " + fmt("%.2e", local) +
             " (tol 1e-9); " + runtime_note(timer.seconds(), 1.0, o.pass);
  return o;
}

// 2. DARE correctness against an independent full-matrix iteration.
Outcome dare_correctness() {
  Timer timer;
  const kf::DoubleIntegratorModel m = kf::build_system(0.02);
  Outcome o;
  o.pass = true;
  std::string detail;
  for (double lambda : {0.1, 10.0, 500.0, 1e4}) {
    const kf::KfTuning tuning{0.02, {lambda, lambda, lambda}};
    const kf::Mat3 Q = tuning.process_noise(), R = tuning.measurement_noise();
    const kf::KalmanGain g = kf::synthesize_gain(tuning);
    const double residual = kf::dare_residual(g.P_inf, m.A, m.B, m.C, Q, R);
    const double res_tol = 1e-9 * (1.0 + g.P_inf.norm());
    const kf::Mat6 oracle = kf::testing::fixed_point_dare_full<6, 3, 3>(m.A, m.B, m.C, Q, R);
    const double diff = (g.P_inf - oracle).cwiseAbs().maxCoeff();
    const kf::Mat6 closed = (kf::Mat6::Identity() - g.K * m.C) * m.A;
    const double radius = closed.eigenvalues().cwiseAbs().maxCoeff();
    const bool ok = residual < res_tol && radius < 1.0 && diff < 1e-8;
    o.pass = o.pass && ok;
    detail += "lambda " + fmt("%g", lambda) + ": residual " + fmt("%.2e", residual) + " (tol " +
              fmt("%.1e", res_tol) + "), radius " + fmt("%.6f", radius) + ", |P - oracle| " +
              fmt("%.2e", diff) + " (tol 1e-8); ";
  }
  o.detail = detail + runtime_note(timer.seconds(), 5.0, o.pass);
  return o;
}

// 3. Kalman filter frequency-response shape.
Outcome kf_shape() {
  Timer timer;
  const double Ts = 0.02;
  const kf::KfTuning line{Ts, {500, 500, 500}}, gps{Ts, {10, 10, 10}};
  const std::vector<double> low = log_grid(1e-3, 0.05, 60);
  const kf::KfFrequencyResponse lo = kf::kf_frequency_response(line, 0, low);
  double fy_dev = 0.0;
  for (double m : lo.mag_fy) fy_dev = std::max(fy_dev, std::abs(m - 1.0));
  const std::vector<double> high = log_grid(10.0, 24.9, 40);
  const kf::KfFrequencyResponse hi = kf::kf_frequency_response(line, 0, high);
  double fu_dev = 0.0, fu_at = 0.0;
  for (size_t i = 0; i < high.size(); ++i) {
    const double w = 2.0 * kf::kPi * high[i] * Ts;
    const double di = Ts * Ts / std::norm(std::polar(1.0, w) - 1.0);
    const double dev = std::abs(hi.mag_fu[i] / di - 1.0);
    if (dev > fu_dev) {
      fu_dev = dev;
      fu_at = high[i];
    }
  }
  const double c500 = kf::kf_crossover_frequency(line, 0);
  const double c10 = kf::kf_crossover_frequency(gps, 0);
  Outcome o;
  o.pass = fy_dev <= 0.01 && fu_dev <= 0.05 && c500 > c10;
  o.detail = "max ||F_y| - 1| for f <= 0.05 Hz " + fmt("%.2e", fy_dev) +
             " (tol 0.01); max |F_u| / |Ts^2/(z-1)^2| deviation for f >= 10 Hz " +
             fmt("%.3f", fu_dev) + " at " + fmt("%.2f", fu_at) + " Hz (tol 0.05); crossover " +
             fmt("%.3f", c500) + " Hz at lambda 500 vs " + fmt("%.3f", c10) +
             " Hz at lambda 10; " + runtime_note(timer.seconds(), 1.0, o.pass);
  return o;
}

// 4. Velocity-angle observer frequency-response shape.
Outcome lo_shape() {
  Timer timer;
  const double Ts = 0.02;
  const kf::LuenbergerGain K{0.4, 0.9};
  const std::vector<double> f016{0.16};
  const double fy1 = kf::lo_frequency_response(K, Ts, f016).mag_fy1[0];
  const std::vector<double> above = log_grid(3.0, 24.9, 80);
  const kf::LoFrequencyResponse a = kf::lo_frequency_response(K, Ts, above);
  bool monotone = true;
  double worst_step = -1e300;
  for (size_t i = 1; i < above.size(); ++i) {
    worst_step = std::max(worst_step, a.mag_fy1[i] - a.mag_fy1[i - 1]);
    monotone = monotone && a.mag_fy1[i] < a.mag_fy1[i - 1];
  }
  const std::vector<double> band = log_grid(0.1, 1.0, 40);
  const kf::LoFrequencyResponse b = kf::lo_frequency_response(K, Ts, band);
  double fy2_dev = 0.0, fy2_at = 0.0;
  for (size_t i = 0; i < band.size(); ++i) {
    const double d = std::abs(std::polar(1.0, 2.0 * kf::kPi * band[i] * Ts) - 1.0) / Ts;
    const double dev = std::abs(b.mag_fy2[i] / d - 1.0);
    if (dev > fy2_dev) {
      fy2_dev = dev;
      fy2_at = band[i];
    }
  }
  Outcome o;
  o.pass = std::abs(fy1 - 1.0) <= 0.1 && monotone && fy2_dev <= 0.1;
  o.detail = "|F_y1(0.16 Hz)| " + fmt("%.4f", fy1) + " (within 0.1 of 1); |F_y1| " +
             (monotone ? "strictly decreasing" : "not monotone") + " on 3-25 Hz (largest step " +
             fmt("%.2e", worst_step) + "); max |F_y2| / |(z-1)/Ts| deviation on 0.1-1 Hz " +
             fmt("%.3f", fy2_dev) + " at " + fmt("%.2f", fy2_at) + " Hz (tol 0.1); " +
             runtime_note(timer.seconds(), 1.0, o.pass);
  return o;
}

// 5. Noiseless end-to-end run of the line angle approach.
Outcome noiseless_end_to_end() {
  Timer timer;
  const kf::TrajectoryParams params;
  const kf::SimulationResult sim = kf::synthesize(params, kf::NoiseSpec::zero(), {});
  const auto est = kf::run_pipeline(kf::EstimatorConfig{}, sim.frames);
  double pos = 0.0, gam = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    if (est[i].t < 2.0) continue;
    pos = std::max(pos, (est[i].p_hat - sim.truth[i].p).norm());
    gam = std::max(gam, std::abs(kf::wrap_angle(est[i].gamma_hat - sim.truth[i].gamma)));
  }
  Outcome o;
  o.pass = pos < 0.01 && gam < 0.02;
  o.detail = "60 s, after 2 s: max position error " + fmt("%.2e", pos) +
             " m (tol 0.01); max |wrap(gamma_hat - gamma)| " + fmt("%.4f", gam) +
             " rad (tol 0.02); " + runtime_note(timer.seconds(), 5.0, o.pass);
  return o;
}

// 6. Ordering of the evaluation table over seeds and speeds.
Outcome table_ordering() {
  Timer timer;
  const std::vector<double> speeds{1.5, 2.5, 3.5, 4.5};
  const char* vars[] = {"p_X", "p_Y", "p_Z", "gamma"};
  // med[var][approach][speed index]
  std::map<std::string, std::map<int, std::vector<double>>> med;
  for (size_t si = 0; si < speeds.size(); ++si) {
    std::map<std::string, std::map<int, std::vector<double>>> samples;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      kf::Settings s;
      s.trajectory.speed_scale = speeds[si];
      s.noise.seed = seed;
      const kf::SimulationResult sim =
          kf::synthesize(s.trajectory, s.noise, s.estimator.geometry, s.estimator.Ts);
      const kf::RmseReport r = kf::compare_approaches(kf::log_from_simulation(sim, s), s);
      for (const char* v : vars) {
        for (int a = 1; a <= 3; ++a) samples[v][a].push_back(r.row(v, a).values[si]);
      }
    }
    for (const char* v : vars) {
      for (int a = 1; a <= 3; ++a) med[v][a].push_back(median(samples[v][a]));
    }
  }
  std::vector<std::string> failures;
  for (const char* v : {"p_X", "p_Y", "gamma"}) {
    for (size_t si = 0; si < speeds.size(); ++si) {
      if (!(med[v][3][si] < med[v][2][si])) {
        failures.push_back(std::string(v) + " a3<a2 @" + fmt("%g", speeds[si]));
      }
    }
  }
  for (size_t si = 2; si < speeds.size(); ++si) {
    if (!(med["p_X"][2][si] <= med["p_X"][1][si])) {
      failures.push_back("p_X a2<=a1 @" + fmt("%g", speeds[si]));
    }
  }
  for (const char* v : vars) {
    for (int a = 1; a <= 3; ++a) {
      for (size_t si = 1; si < speeds.size(); ++si) {
        if (med[v][a][si] < med[v][a][si - 1]) {
          failures.push_back(std::string(v) + " a" + std::to_string(a) + " rises " +
                             fmt("%g", speeds[si - 1]) + "->" + fmt("%g", speeds[si]));
        }
      }
    }
  }
  std::string table;
  for (const char* v : vars) {
    for (int a = 1; a <= 3; ++a) {
      table += std::string(v) + "/a" + std::to_string(a) + "=[";
      for (size_t si = 0; si < speeds.size(); ++si) {
        table += (si ? " " : "") + fmt("%.3g", med[v][a][si]);
      }
      table += "] ";
    }
  }
  Outcome o;
  o.pass = failures.empty();
  std::string failed;
  for (const auto& f : failures) failed += (failed.empty() ? "" : ", ") + f;
  o.detail = "20 seeds x speed_scale {1.5, 2.5, 3.5, 4.5}, medians " + table +
             (failed.empty() ? "; all orderings hold; " : "; violated: " + failed + "; ") +
             runtime_note(timer.seconds(), 120.0, o.pass);
  return o;
}

struct LagAndError {
  double lag_s = 0.0;
  double pos_rmse = 0.0;
};

// Lag maximizing the circular cross-correlation Re sum exp(i (est[k+L] -
// truth[k])), refined by a parabola through the peak.
LagAndError lag_and_error(const kf::SimulationResult& sim, bool use_imu) {
  kf::EstimatorConfig cfg;
  cfg.use_imu = use_imu;
  const auto est = kf::run_pipeline(cfg, sim.frames);
  const size_t start = 100;  // 2 s
  const int max_lag = 150;
  std::vector<double> corr(2 * max_lag + 1);
  for (int L = -max_lag; L <= max_lag; ++L) {
    std::complex<double> acc = 0.0;
    int n = 0;
    for (size_t k = start + max_lag; k + max_lag < est.size(); ++k) {
      acc += std::polar(1.0, est[k + L].gamma_hat - sim.truth[k].gamma);
      ++n;
    }
    corr[L + max_lag] = acc.real() / n;
  }
  const int peak = int(std::max_element(corr.begin(), corr.end()) - corr.begin());
  double offset = 0.0;
  if (peak > 0 && peak < 2 * max_lag) {
    const double a = corr[peak - 1], b = corr[peak], c = corr[peak + 1];
    const double denom = a - 2.0 * b + c;
    if (denom != 0.0) offset = 0.5 * (a - c) / denom;
  }
  LagAndError out;
  out.lag_s = (peak - max_lag + offset) * sim.frames[1].t;
  double sq = 0.0;
  for (size_t k = start; k < est.size(); ++k) sq += (est[k].p_hat - sim.truth[k].p).squaredNorm();
  out.pos_rmse = std::sqrt(sq / (est.size() - start));
  return out;
}

// 7. Contribution of the IMU.
Outcome imu_contribution() {
  Timer timer;
  const kf::SimulationResult sim = kf::synthesize({}, kf::NoiseSpec{}, {});
  const LagAndError with = lag_and_error(sim, true);
  const LagAndError without = lag_and_error(sim, false);
  Outcome o;
  o.pass = without.lag_s > with.lag_s && without.pos_rmse > with.pos_rmse;
  o.detail = "gamma lag " + fmt("%.4f", with.lag_s) + " s with IMU vs " +
             fmt("%.4f", without.lag_s) + " s without; position RMSE " +
             fmt("%.4f", with.pos_rmse) + " m vs " + fmt("%.4f", without.pos_rmse) + " m; " +
             runtime_note(timer.seconds(), 30.0, o.pass);
  return o;
}

// 8. Line angle sensor inversion round trip.
Outcome line_angle_inversion() {
  Timer timer;
  kf::testing::Gen gen(1008);
  const kf::EncoderGeometry geo;
  const double step = 2.0 * kf::kPi / kf::kDefaultCountsPerRev;
  double worst_theta = 0.0, worst_phi = 0.0, worst_phi_at = 0.0, worst_arc = 0.0;
  double lowest_over = kf::kPi;
  int over = 0, errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = gen.uniform(0.0, kf::kPi / 2), phi = gen.uniform(-kf::kPi, kf::kPi);
    try {
      const kf::SphericalAngles back =
          kf::encoder_to_angles(kf::angles_to_encoder(theta, phi, geo), geo);
      const double dt = std::abs(back.theta - theta);
      const double dp = std::abs(kf::wrap_angle(back.phi - phi));
      worst_theta = std::max(worst_theta, dt);
      if (dp > worst_phi) {
        worst_phi = dp;
        worst_phi_at = theta;
      }
      worst_arc = std::max(worst_arc, dp * std::cos(theta));
      if (dt > step || dp > step) {
        ++over;
        lowest_over = std::min(lowest_over, theta);
      }
    } catch (const kf::Error&) {
      ++errors;
    }
  }
  Outcome o;
  o.pass = over == 0 && errors == 0;
  o.detail = "1000 samples, theta in [0, pi/2), default geometry: max |dtheta| " +
             fmt("%.2f", worst_theta / step) + " steps, max |dphi| " +
             fmt("%.2f", worst_phi / step) + " steps (at theta " + fmt("%.3f", worst_phi_at) +
             "), max cos(theta)|dphi| " + fmt("%.2f", worst_arc / step) + " steps; " +
             std::to_string(over) + " pairs beyond one step" +
             (over ? " (lowest theta " + fmt("%.3f", lowest_over) + ")" : std::string()) + ", " +
             std::to_string(errors) + " inversion errors; " +
             runtime_note(timer.seconds(), 2.0, o.pass);
  return o;
}

// 9. Projection of GPS measurements onto the sphere.
Outcome sphere_projection() {
  Timer timer;
  kf::testing::Gen gen(1009);
  const double r = 30.0;
  double worst_norm = 0.0;
  int z_changed = 0;
  for (int i = 0; i < 1000; ++i) {
    kf::Vec3 p(gen.uniform(-50, 50), gen.uniform(-50, 50), gen.uniform(-r, r));
    if (p.x() == 0.0 && p.y() == 0.0) p.x() = 1.0;
    const kf::Vec3 out = kf::geometric_correction(p, r);
    worst_norm = std::max(worst_norm, std::abs(out.norm() - r));
    z_changed += out.z() != p.z();
  }
  Outcome o;
  o.pass = worst_norm < 1e-9 && z_changed == 0;
  o.detail = "1000 samples: max |norm - r| " + fmt("%.2e", worst_norm) + " (tol 1e-9); " +
             std::to_string(z_changed) + " Z components changed; " +
             runtime_note(timer.seconds(), 1.0, o.pass);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 10. Byte-identical CLI output for identical inputs.
Outcome cli_determinism(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kitefusion_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " 2>>\"" + (dir / "stderr.txt").string() + "\"";
    return std::system(cmd.c_str());
  };
  int status = 0;
  for (const char* tag : {"a", "b"}) {
    const std::string log = (dir / (std::string("log_") + tag + ".csv")).string();
    const std::string est = (dir / (std::string("est_") + tag + ".csv")).string();
    status |= run("simulate --seed 42 -o \"" + log + "\"");
    status |= run("estimate -l \"" + log + "\" -a 3 -o \"" + est + "\"");
  }
  const std::string la = slurp(dir / "log_a.csv"), lb = slurp(dir / "log_b.csv");
  const std::string ea = slurp(dir / "est_a.csv"), eb = slurp(dir / "est_b.csv");
  Outcome o;
  o.pass = status == 0 && !la.empty() && !ea.empty() && la == lb && ea == eb;
  o.detail = "simulate + estimate twice, seed 42: logs " + std::string(la == lb ? "identical" : "differ") +
             " (" + std::to_string(la.size()) + " bytes), estimates " +
             (ea == eb ? "identical" : "differ") + " (" + std::to_string(ea.size()) +
             " bytes), exit status " + std::to_string(status);
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kitefusion acceptance checks"};
  std::vector<int> selected;
  std::string cli = KITEFUSION_CLI_PATH;
  app.add_option("-n,--criterion", selected, "Criterion number(s), default all")
      ->check(CLI::Range(1, 10));
  app.add_option("--cli", cli, "Path of the kitefusion-cli executable");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"frame algebra", frame_algebra}},
      {2, {"DARE correctness", dare_correctness}},
      {3, {"Kalman filter frequency response", kf_shape}},
      {4, {"velocity angle observer frequency response", lo_shape}},
      {5, {"noiseless end-to-end", noiseless_end_to_end}},
      {6, {"RMSE table ordering", table_ordering}},
      {7, {"IMU contribution", imu_contribution}},
      {8, {"line angle inversion", line_angle_inversion}},
      {9, {"projection onto the sphere", sphere_projection}},
      {10, {"CLI determinism", [&] { return cli_determinism(cli); }}},
  };

  bool all = true;
  for (int n : selected) {
    const auto& [name, fn] = criteria.at(n);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
