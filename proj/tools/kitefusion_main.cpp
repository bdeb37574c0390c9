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

// Command-line front end. Talks to the library only through the C API.
//
//   kitefusion simulate [--config F] [--set k=v]... [--seed N] [--out LOG]
//   kitefusion estimate --log LOG [--config F] [--approach N] [--no-imu] [--out CSV]
//   kitefusion evaluate --log LOG [--config F] [--out CSV]
//   kitefusion bode [--config F] [--out CSV]
//
// Exit codes: 0 success, 2 malformed input, 3 numerical failure, 1 otherwise.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kitefusion/kitefusion.h"

namespace {

struct SettingsDeleter {
  void operator()(kf_settings* s) const { kf_settings_destroy(s); }
};
using SettingsPtr = std::unique_ptr<kf_settings, SettingsDeleter>;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

int exit_code(kf_status status) {
  switch (status) {
    case KF_OK: return 0;
    case KF_ERR_INPUT_FORMAT: return 2;
    case KF_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

int report(kf_status status) {
  if (status != KF_OK) {
    std::fprintf(stderr, "kitefusion: %s: %s\n", kf_status_name(status), kf_last_error());
  }
  return exit_code(status);
}

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("-c,--config", c.config, "Settings file (key = value)");
  cmd->add_option("--set", c.overrides, "Override one setting, key=value")
      ->take_all();
  if (with_out) cmd->add_option("-o,--out", c.out, "Output file (default stdout)");
}

// Loads the settings and applies --set overrides.
kf_status load(const Common& c, SettingsPtr& out) {
  kf_settings* raw = nullptr;
  const kf_status st =
      c.config.empty() ? kf_settings_create(&raw) : kf_settings_load(c.config.c_str(), &raw);
  if (st != KF_OK) return st;
  out.reset(raw);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "kitefusion: --set expects key=value, got '%s'\n", kv.c_str());
      return KF_ERR_INPUT_FORMAT;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (const kf_status s = kf_settings_set(out.get(), key.c_str(), value.c_str()); s != KF_OK) {
      return s;
    }
  }
  return KF_OK;
}

const char* out_path(const Common& c) { return c.out.empty() ? nullptr : c.out.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Position and velocity angle estimation for tethered wings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kf_version());

  Common sim_opts, est_opts, eval_opts, bode_opts;
  std::optional<long long> seed;
  std::string est_log, eval_log;
  int approach = 0;
  bool no_imu = false;

  auto* simulate = app.add_subcommand("simulate", "Write a simulated flight log");
  add_common(simulate, sim_opts);
  simulate->add_option("--seed", seed, "Noise seed (overrides the settings)");

  auto* estimate = app.add_subcommand("estimate", "Run one estimator over a log");
  add_common(estimate, est_opts);
  estimate->add_option("-l,--log", est_log, "Input log")->required();
  estimate->add_option("-a,--approach", approach,
                       "1 GPS+barometer, 2 corrected GPS+barometer, 3 line angle")
      ->check(CLI::Range(1, 3));
  estimate->add_flag("--no-imu", no_imu, "Ignore the accelerometer");

  auto* evaluate = app.add_subcommand("evaluate", "RMSE of the three approaches per speed bin");
  add_common(evaluate, eval_opts);
  evaluate->add_option("-l,--log", eval_log, "Input log")->required();

  auto* bode = app.add_subcommand("bode", "Frequency responses of the filters");
  add_common(bode, bode_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  SettingsPtr settings;
  if (simulate->parsed()) {
    if (kf_status st = load(sim_opts, settings); st != KF_OK) return report(st);
    if (seed) {
      const std::string value = std::to_string(*seed);
      if (kf_status st = kf_settings_set(settings.get(), "seed", value.c_str()); st != KF_OK) {
        return report(st);
      }
    }
    return report(kf_simulate(settings.get(), out_path(sim_opts)));
  }
  if (estimate->parsed()) {
    if (kf_status st = load(est_opts, settings); st != KF_OK) return report(st);
    if (no_imu) {
      if (kf_status st = kf_settings_set(settings.get(), "use_imu", "false"); st != KF_OK) {
        return report(st);
      }
    }
    return report(kf_estimate_log(settings.get(), est_log.c_str(), approach, out_path(est_opts)));
  }
  if (evaluate->parsed()) {
    if (kf_status st = load(eval_opts, settings); st != KF_OK) return report(st);
    return report(kf_evaluate_log(settings.get(), eval_log.c_str(), out_path(eval_opts)));
  }
  if (kf_status st = load(bode_opts, settings); st != KF_OK) return report(st);
  return report(kf_bode(settings.get(), out_path(bode_opts)));
}
