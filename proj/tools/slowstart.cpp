#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "slowstart/app.hpp"

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kAcceptance = 3 };

void print_outcome(const slowstart::app::Outcome& o) {
  std::cout << o.command << " -> " << o.out_dir.string() << "\n";
  if (!o.report.is_null()) {
    for (const auto& bar : o.report["bars"]) {
      std::cout << "  " << (bar["passed"].get<bool>() ? "pass" : "FAIL") << "  "
                << bar["name"].get<std::string>() << " = " << bar["value"].dump();
      if (bar.contains("bar")) {
        std::cout << " (" << bar["op"].get<std::string>() << " " << bar["bar"].dump() << ")";
      }
      std::cout << "\n";
    }
  }
  std::cout << (o.passed ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = slowstart::app;
  namespace io = slowstart::io;

  CLI::App cli{"Simulator and statistics laboratory for the slow-to-start traffic model"};
  cli.require_subcommand(1, 1);

  std::string config_file;
  std::string calibration_file;
  int threads = 0;
  std::string positional;
  std::map<std::string, std::string> flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "Flat key=value config file (flags win)");
    sub->add_option("--threads", threads, "Replica threads, 0 = OpenMP default")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--calibration", calibration_file, "Acceptance bar file");
    for (const auto& key : io::config_keys()) {
      sub->add_option("--" + key, flags[key], "Config key " + key);
    }
    return sub;
  };

  auto* simulate = common(cli.add_subcommand("simulate", "Jams, trajectories and walks"));
  auto* stats = common(cli.add_subcommand("stats", "Monte Carlo estimators"));
  stats->add_option("which", positional,
                    "velocity, poisson, decay, critical, condensation or crossings")
      ->required();
  auto* scaling = common(cli.add_subcommand("scaling", "Rescaled lattice vs continuum oracle"));
  scaling->add_option("regime", positional, "supercritical or critical")->required();
  auto* equivalence =
      common(cli.add_subcommand("equivalence", "Schedule vs walk construction, exact"));
  auto* oracle = common(cli.add_subcommand("oracle", "Continuum oracles"));
  oracle->add_option("kind", positional, "coalescing, reflected, meeting or convergence")
      ->required();
  auto* replay = common(cli.add_subcommand("replay", "Re-run a manifest and verify checksums"));
  replay->add_option("manifest", positional, "manifest.json of an earlier run")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    app::Context ctx;
    ctx.threads = threads;
    ctx.calibration = app::load_calibration(
        calibration_file.empty() ? app::default_calibration_path()
                                 : std::filesystem::path(calibration_file));
    CLI::App* sub = cli.get_subcommands().front();
    if (!config_file.empty()) ctx.config = io::Config::load(config_file, io::config_keys());
    for (const auto& key : io::config_keys()) {
      if (sub->count("--" + key) > 0) ctx.config.set(key, flags[key]);
    }

    app::Outcome outcome;
    if (sub == simulate) {
      outcome = app::simulate(ctx);
    } else if (sub == stats) {
      outcome = app::stats(ctx, positional);
    } else if (sub == scaling) {
      outcome = app::scaling(ctx, positional);
    } else if (sub == equivalence) {
      outcome = app::equivalence(ctx);
    } else if (sub == oracle) {
      outcome = app::oracle(ctx, positional);
    } else {
      const std::string out = ctx.config.get_string("out_dir", app::default_out_dir());
      outcome = app::replay(positional, out, threads, ctx.calibration);
      std::cout << "checksums " << (outcome.passed ? "match" : "DIFFER") << "\n";
    }
    print_outcome(outcome);
    return outcome.passed ? kOk : kAcceptance;
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
