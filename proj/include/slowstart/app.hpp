#pragma once

// Pipelines behind the command-line tool: each reads a Config, validates it
// before any work, runs, and writes its outputs plus a manifest.

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "slowstart/io.hpp"

namespace slowstart::app {

/// Acceptance bars, read from a key=value file whose hash goes into every
/// report.
struct Calibration {
  std::map<std::string, double> bars;
  std::string sha256;

  /// Throws std::runtime_error when the bar is missing.
  double bar(const std::string& name) const;
};

Calibration load_calibration(const std::filesystem::path& path);
/// $SLOWSTART_CALIBRATION, else the file shipped with the sources.
std::filesystem::path default_calibration_path();
/// $SLOWSTART_OUT_DIR, else "out".
std::string default_out_dir();

struct Context {
  io::Config config{io::config_keys()};
  int threads = 0;  // 0 = OpenMP default
  Calibration calibration;
};

struct Outcome {
  std::string command;
  std::filesystem::path out_dir;
  nlohmann::ordered_json report;  // content of report.json (null if none)
  bool passed = true;             // every acceptance bar met
};

Outcome simulate(Context& ctx);
/// which: velocity, poisson, decay, critical, condensation, crossings.
Outcome stats(Context& ctx, const std::string& which);
/// regime: supercritical, critical.
Outcome scaling(Context& ctx, const std::string& regime);
Outcome equivalence(Context& ctx);
/// kind: coalescing, reflected, meeting, convergence.
Outcome oracle(Context& ctx, const std::string& kind);

/// Runs a command line such as "stats velocity" with the given context.
Outcome dispatch(Context& ctx, const std::string& command);

/// Re-runs the command recorded in a manifest into `out_dir` and checks the
/// checksums of every listed file; passed is false on any mismatch.
Outcome replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
               int threads, const Calibration& calibration);

}  // namespace slowstart::app
