// Command-line front end: simulate, spectrogram, variance-curve,
// inject-clicks and rerun.
#include "uosf/commands.hpp"
#include "uosf/error.hpp"
#include "uosf/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int exit_config = 2;
constexpr int exit_ingestion = 3;

struct Common {
  std::string config;
  std::optional<unsigned long long> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config file, or a manifest.json to rerun");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out-dir", c.out_dir, "Output directory (default uosf_out, or the manifest's)");
  cmd->add_option("--set", c.overrides, "Override a config entry: section.key=value")->take_all();
}

uosf::RunRequest base_request(uosf::Command command, const Common& c, bool& from_manifest) {
  uosf::RunRequest req;
  from_manifest = false;
  if (!c.config.empty()) {
    if (uosf::is_manifest_file(c.config)) {
      req = uosf::request_from_manifest(c.config);
      if (req.command != command) {
        throw uosf::ConfigError("manifest was written by '" + uosf::to_string(req.command) + "', not '" +
                                uosf::to_string(command) + "'");
      }
      from_manifest = true;
    } else {
      req.settings = uosf::Settings::from_file(c.config);
    }
  }
  req.command = command;
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw uosf::ConfigError("--set expects section.key=value, got '" + kv + "'");
    req.settings.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) req.settings.set("run.seed", std::to_string(*c.seed));
  if (!c.out_dir.empty()) req.out_dir = c.out_dir;
  return req;
}

void set_if(uosf::Settings& s, const std::string& key, const std::optional<std::string>& v) {
  if (v) s.set(key, *v);
}

int run(const uosf::RunRequest& req) {
  const auto summary = uosf::execute(req);
  std::cout << summary.report;
  std::cout << "wrote";
  for (const auto& f : summary.files) std::cout << ' ' << (req.out_dir / f).string();
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal order statistics filters for robust PSD estimation"};
  app.set_version_flag("--version", std::string(uosf::software_name) + " " + uosf::software_version);
  app.require_subcommand(1);

  Common sim_c;
  std::optional<std::string> trials;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study on the exponential mixture");
  add_common(sim, sim_c);
  sim->add_option("--trials", trials, "Number of trials");

  Common spec_c;
  std::optional<std::string> input, estimators, R, Q, c, tau;
  bool db = false, linear = false, as_json = false, shared = false;
  auto* spec = app.add_subcommand("spectrogram", "Spectrogram estimates of a WAV file");
  add_common(spec, spec_c);
  spec->add_option("--input", input, "Input WAV file");
  spec->add_option("--estimators", estimators, "Comma list of raw, wosa, usawp, utlosf");
  spec->add_option("--R", R, "Periodograms per PSD estimate");
  spec->add_option("--Q", Q, "Hop between PSD estimates, in periodograms");
  spec->add_option("--c", c, "Blend sensitivity c");
  spec->add_option("--tau", tau, "Loss window tau");
  auto* db_flag = spec->add_flag("--db", db, "Write 10 log10(power) (default)");
  spec->add_flag("--linear", linear, "Write linear power")->excludes(db_flag);
  spec->add_flag("--json", as_json, "Write JSON matrices instead of CSV");
  spec->add_flag("--shared-blend", shared, "One blend per time step for all bins");

  Common var_c;
  std::optional<std::string> var_R, mc;
  auto* var = app.add_subcommand("variance-curve", "Normalized variance of every fixed-rank filter");
  add_common(var, var_c);
  var->add_option("--R", var_R, "Window length R");
  var->add_option("--monte-carlo", mc, "Also estimate each variance from this many trials");

  Common inj_c;
  std::optional<std::string> inj_input, count, level, seconds;
  auto* inj = app.add_subcommand("inject-clicks", "Add broadband clicks to a WAV file or to synthetic noise");
  add_common(inj, inj_c);
  inj->add_option("--input", inj_input, "Input WAV file (default: synthesize white noise)");
  inj->add_option("--count", count, "Number of random clicks");
  inj->add_option("--level-db", level, "Click level over background power");
  inj->add_option("--seconds", seconds, "Length of synthesized noise");

  std::string manifest;
  std::string rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Re-execute the run recorded in a manifest.json");
  rerun->add_option("manifest", manifest, "Manifest file")->required();
  rerun->add_option("--out-dir", rerun_out, "Output directory (default: the manifest's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    bool from_manifest = false;
    if (*sim) {
      auto req = base_request(uosf::Command::simulate, sim_c, from_manifest);
      set_if(req.settings, "simulate.trials", trials);
      return run(req);
    }
    if (*spec) {
      auto req = base_request(uosf::Command::spectrogram, spec_c, from_manifest);
      if (input) req.input = *input;
      if (!req.input) throw uosf::ConfigError("spectrogram needs --input");
      set_if(req.settings, "pipeline.estimators", estimators);
      set_if(req.settings, "pipeline.R", R);
      set_if(req.settings, "pipeline.Q", Q);
      set_if(req.settings, "pipeline.c", c);
      set_if(req.settings, "pipeline.tau", tau);
      if (linear) req.settings.set("output.db", "false");
      if (db) req.settings.set("output.db", "true");
      if (as_json) req.settings.set("output.format", "json");
      if (shared) req.settings.set("pipeline.shared_blend", "true");
      return run(req);
    }
    if (*var) {
      auto req = base_request(uosf::Command::variance_curve, var_c, from_manifest);
      set_if(req.settings, "variance.R", var_R);
      set_if(req.settings, "variance.trials", mc);
      return run(req);
    }
    if (*inj) {
      auto req = base_request(uosf::Command::inject_clicks, inj_c, from_manifest);
      if (inj_input) req.input = *inj_input;
      set_if(req.settings, "clicks.count", count);
      set_if(req.settings, "clicks.level_db", level);
      set_if(req.settings, "noise.seconds", seconds);
      return run(req);
    }
    if (*rerun) {
      auto req = uosf::request_from_manifest(manifest);
      if (!rerun_out.empty()) req.out_dir = rerun_out;
      return run(req);
    }
  } catch (const uosf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const uosf::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << '\n';
    return exit_ingestion;
  } catch (const uosf::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
