// Command-line front end: run sessions, verify against the plaintext
// oracle, estimate leak probabilities, emit curves and traces.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "encrand/encrand.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitProtocolAbort = 3;
constexpr int kExitVerificationMismatch = 4;

void print_result(const encrand::RunResult& rr) {
  const encrand::PublicResult& result = *rr.result;
  std::cout << "selected ttp: " << rr.selected_ttp << "\n";
  std::cout << "aggregate (" << encrand::aggregate_name(result.aggregate_kind) << ") over "
            << result.n_blocks << " blocks:";
  for (uint64_t v : result.values) std::cout << ' ' << v;
  std::cout << "\n";
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(rr.transcript.digest()));
  std::cout << "transcript digest: " << digest << "\n";
}

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed_override) {
  encrand::SessionConfig config = encrand::load_config_file(config_path);
  if (seed_override) config.master_seed = *seed_override;
  encrand::RunResult rr =
      encrand::run_protocol(config, encrand::synthetic_blocks(config));
  if (!rr.ok) {
    std::cerr << "protocol aborted: " << rr.transcript.abort_reason << "\n";
    return kExitProtocolAbort;
  }
  print_result(rr);
  return kExitOk;
}

int cmd_verify(const std::string& config_path, uint64_t sessions) {
  encrand::SessionConfig base = encrand::load_config_file(config_path);
  encrand::validate_config(base);
  uint64_t failures = 0;
  for (uint64_t k = 0; k < sessions; ++k) {
    encrand::SessionConfig config = base;
    config.master_seed = encrand::derive_seed(base.master_seed, "verify", k);
    bool ok = encrand::verify_against_oracle(config, encrand::synthetic_blocks(config));
    if (!ok) {
      ++failures;
      std::cerr << "session " << k << ": result differs from the plaintext aggregate\n";
    }
  }
  std::cout << (sessions - failures) << "/" << sessions
            << " sessions matched the plaintext oracle\n";
  return failures == 0 ? kExitOk : kExitVerificationMismatch;
}

int cmd_mc(uint32_t n, uint32_t m, uint32_t r, uint32_t x, uint64_t trials, uint64_t seed) {
  encrand::LeakEstimate est = encrand::monte_carlo_leak(n, m, r, x, trials, seed);
  std::cout << "analytic:  " << encrand::detail::format_probability(est.analytic) << "\n";
  std::cout << "empirical: " << encrand::detail::format_probability(est.empirical) << " +/- "
            << encrand::detail::format_probability(est.ci_halfwidth) << " (95% ci, "
            << est.trials << " trials)\n";
  return kExitOk;
}

int cmd_curve(uint32_t n_min, uint32_t n_max, uint32_t m, uint32_t x, uint32_t r,
              const std::string& out_path, uint64_t trials, uint64_t seed) {
  auto analytic = encrand::leak_curve(n_min, n_max, m, x, r);
  std::vector<encrand::CurvePoint> points;
  points.reserve(analytic.size());
  for (auto [n, p] : analytic) {
    encrand::CurvePoint point;
    point.n = n;
    point.m = m;
    point.x = x;
    point.r = r;
    point.analytic = p;
    if (trials > 0) {
      encrand::LeakEstimate est =
          encrand::monte_carlo_leak(n, m, r, x, trials, encrand::derive_seed(seed, "curve", n));
      point.empirical = est.empirical;
      point.ci_low = est.empirical - est.ci_halfwidth;
      point.ci_high = est.empirical + est.ci_halfwidth;
    }
    points.push_back(point);
  }
  encrand::emit_curve(points, out_path);
  std::cout << "wrote " << points.size() << " points to " << out_path << "\n";
  return kExitOk;
}

int cmd_trace(const std::string& config_path, const std::string& out_path) {
  encrand::SessionConfig config = encrand::load_config_file(config_path);
  encrand::RunResult rr =
      encrand::run_protocol(config, encrand::synthetic_blocks(config));
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw encrand::IoError("cannot open " + out_path + " for writing");
  encrand::write_trace(rr.transcript, out);
  if (!rr.ok) {
    std::cerr << "protocol aborted: " << rr.transcript.abort_reason << "\n";
    return kExitProtocolAbort;
  }
  std::cout << "wrote " << rr.transcript.events.size() << " events to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic simulator for masked-packet random-dissemination aggregation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<uint64_t> seed_override;
  uint64_t sessions = 100;
  uint32_t n = 4, m = 4, r = 1, x = 4, n_min = 3, n_max = 50;
  uint64_t trials = 0, seed = 1;

  CLI::App* run = app.add_subcommand("run", "run one protocol session");
  run->add_option("--config", config_path, "session config file")->required();
  run->add_option("--seed", seed_override, "override master_seed");

  CLI::App* verify = app.add_subcommand("verify", "check sessions against the plaintext oracle");
  verify->add_option("--config", config_path, "session config file")->required();
  verify->add_option("--sessions", sessions, "number of seeded sessions")->required();

  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo leak estimate vs the closed form");
  mc->add_option("--n", n, "party count")->required();
  mc->add_option("--m", m, "computing-node count")->required();
  mc->add_option("--r", r, "coalition size")->required();
  mc->add_option("--x", x, "packets per party")->required();
  mc->add_option("--trials", trials, "trial count")->required();
  mc->add_option("--seed", seed, "estimator seed")->required();

  CLI::App* curve = app.add_subcommand("curve", "emit the leak-probability curve as CSV");
  curve->add_option("--n-min", n_min, "smallest party count")->required();
  curve->add_option("--n-max", n_max, "largest party count")->required();
  curve->add_option("--m", m, "computing-node count")->required();
  curve->add_option("--x", x, "packets per party")->required();
  curve->add_option("--r", r, "coalition size")->required();
  curve->add_option("--out", out_path, "output CSV path")->required();
  curve->add_option("--trials", trials, "add Monte-Carlo columns with this many trials");
  curve->add_option("--seed", seed, "estimator seed");

  CLI::App* trace = app.add_subcommand("trace", "run a session and write its event trace");
  trace->add_option("--config", config_path, "session config file")->required();
  trace->add_option("--out", out_path, "output trace path (one record per line)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed_override);
    if (verify->parsed()) return cmd_verify(config_path, sessions);
    if (mc->parsed()) return cmd_mc(n, m, r, x, trials, seed);
    if (curve->parsed()) return cmd_curve(n_min, n_max, m, x, r, out_path, trials, seed);
    if (trace->parsed()) return cmd_trace(config_path, out_path);
  } catch (const encrand::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const encrand::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProtocolAbort;
  }
  return kExitConfigError;
}
