#include "uosf/commands.hpp"

#include "uosf/clicks.hpp"
#include "uosf/error.hpp"
#include "uosf/osf.hpp"
#include "uosf/output.hpp"
#include "uosf/simulate.hpp"
#include "uosf/spectrogram.hpp"
#include "uosf/version.hpp"
#include "uosf/wav.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace uosf {

using json = nlohmann::ordered_json;

std::string to_string(Command c) {
  switch (c) {
    case Command::simulate:
      return "simulate";
    case Command::spectrogram:
      return "spectrogram";
    case Command::variance_curve:
      return "variance-curve";
    case Command::inject_clicks:
      return "inject-clicks";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "spectrogram") return Command::spectrogram;
  if (name == "variance-curve") return Command::variance_curve;
  if (name == "inject-clicks") return Command::inject_clicks;
  throw ConfigError("unknown command: " + name);
}

namespace {

std::string db_text(double v) { return format_double(to_db(v)); }

struct InputInfo {
  std::filesystem::path path;
  std::string digest;
  std::size_t samples = 0;
  double sample_rate_hz = 0.0;
};

TimeSeries load_input(const std::filesystem::path& path, InputInfo& info) {
  info.path = std::filesystem::absolute(path).lexically_normal();
  info.digest = "fnv1a64:" + file_digest(path);
  TimeSeries s = read_wav(path);
  info.samples = s.samples.size();
  info.sample_rate_hz = s.sample_rate_hz;
  return s;
}

void write_manifest(const RunRequest& req, const std::optional<InputInfo>& input,
                    std::vector<std::string>& files) {
  json m;
  m["schema_version"] = manifest_schema_version;
  m["software"] = software_name;
  m["version"] = software_version;
  m["command"] = to_string(req.command);
  m["seed"] = req.settings.seed();
  json config = json::object();
  for (const auto& [key, value] : req.settings.entries()) {
    const auto dot = key.find('.');
    config[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  m["config"] = std::move(config);
  if (input) {
    m["input"] = {{"path", input->path.string()},
                  {"digest", input->digest},
                  {"samples", input->samples},
                  {"sample_rate_hz", input->sample_rate_hz}};
  } else {
    m["input"] = nullptr;
  }
  m["outputs"] = files;
  write_text_file(req.out_dir / "manifest.json", m.dump(2) + "\n");
  files.push_back("manifest.json");
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());
}

RunSummary run_simulate(const RunRequest& req) {
  const Settings& s = req.settings;
  const MixtureConfig mix = s.mixture();
  const UniversalConfig univ = s.simulation_universal();
  if (univ.R != mix.R) throw ConfigError("simulate.R mismatch");
  const auto checkpoints = s.checkpoints();
  const std::size_t trials = s.trials();

  const StudyResult study = run_study(mix, univ, trials, checkpoints);
  prepare_dir(req.out_dir);

  std::ostringstream metrics;
  metrics << "checkpoint,rho,estimator_kind,rank_or_universal,variance,bias,mse,variance_db,mse_db\n";
  for (const auto& cp : study.metrics.checkpoints) {
    for (const auto& e : cp.estimators) {
      metrics << cp.checkpoint << ',' << format_double(cp.rho) << ',' << to_string(e.kind) << ','
              << (e.universal() ? std::string("universal") : std::to_string(e.rank)) << ','
              << format_double(e.variance) << ',' << format_double(e.bias) << ','
              << format_double(e.mse) << ',' << db_text(e.variance) << ',' << db_text(e.mse) << '\n';
    }
  }
  write_text_file(req.out_dir / "metrics.csv", metrics.str());

  std::ostringstream trace;
  trace << "estimator_kind,t,rank,mean_mu,mean_log_mu\n";
  for (const BlendTrace* tr : {&study.sawp_trace, &study.tlosf_trace}) {
    const std::string kind = to_string(tr->kind);
    for (std::size_t t = 0; t < tr->T; ++t) {
      for (int r = 1; r <= tr->R; ++r) {
        trace << kind << ',' << t << ',' << r << ',' << format_double(tr->at(t, r)) << ','
              << format_double(tr->log_at(t, r)) << '\n';
      }
    }
  }
  write_text_file(req.out_dir / "blend_trace.csv", trace.str());

  RunSummary out;
  out.files = {"metrics.csv", "blend_trace.csv"};
  write_manifest(req, std::nullopt, out.files);

  std::ostringstream rep;
  rep << "trials " << trials << ", R " << mix.R << ", T " << mix.T << "\n";
  rep << "checkpoint  rho    best_sawp(r)  usawp_gap_dB  best_tlosf(r)  utlosf_gap_dB  argmax_usawp  argmax_utlosf\n";
  for (std::size_t i = 0; i < study.metrics.checkpoints.size(); ++i) {
    const auto& cp = study.metrics.checkpoints[i];
    const auto& bs = cp.best_fixed(OsfKind::sawp);
    const auto& bt = cp.best_fixed(OsfKind::tlosf);
    char line[200];
    std::snprintf(line, sizeof line, "%10zu  %.2f  %12d  %12.3f  %13d  %13.3f  %12d  %13d\n", cp.checkpoint,
                  cp.rho, bs.rank, to_db(cp.universal(OsfKind::sawp).mse) - to_db(bs.mse), bt.rank,
                  to_db(cp.universal(OsfKind::tlosf).mse) - to_db(bt.mse),
                  study.sawp_trace.checkpoint_argmax[i], study.tlosf_trace.checkpoint_argmax[i]);
    rep << line;
  }
  out.report = rep.str();
  return out;
}

RunSummary run_spectrogram_cmd(const RunRequest& req) {
  if (!req.input) throw ConfigError("spectrogram needs an input WAV file");
  const PipelineConfig cfg = req.settings.pipeline();
  const OutputOptions opts = req.settings.output();
  InputInfo info;
  const TimeSeries series = load_input(*req.input, info);

  SpectrogramSet result;
  try {
    result = run_spectrogram(series, cfg);
  } catch (const DataError& e) {
    throw IngestionError(e.what());
  }
  RunSummary out;
  out.files = emit_outputs(result, req.out_dir, opts);
  write_manifest(req, info, out.files);

  std::ostringstream rep;
  rep << "input " << info.samples << " samples at " << info.sample_rate_hz << " Hz\n";
  for (const auto& [est, s] : result) {
    rep << to_string(est) << ": " << s.rows() << " x " << s.cols() << "\n";
  }
  out.report = rep.str();
  return out;
}

RunSummary run_variance_curve(const RunRequest& req) {
  const int R = req.settings.variance_R();
  const std::size_t trials = req.settings.variance_trials();
  const std::uint64_t seed = req.settings.seed();
  const OsMoments moments = exponential_os_moments(R);
  prepare_dir(req.out_dir);

  std::ostringstream csv;
  csv << "kind,r0,variance,variance_db";
  if (trials > 0) csv << ",mc_variance,mc_rel_error";
  csv << '\n';
  std::vector<double> sawp_var;
  std::vector<double> tlosf_var;
  for (OsfKind kind : {OsfKind::sawp, OsfKind::tlosf}) {
    const auto curve = variance_curve(kind, moments);
    std::optional<MonteCarloCurve> mc;
    if (trials > 0) mc = monte_carlo_variance_curve(kind, R, trials, seed);
    for (const auto& p : curve) {
      (kind == OsfKind::sawp ? sawp_var : tlosf_var).push_back(p.variance);
      csv << to_string(kind) << ',' << p.rank << ',' << format_double(p.variance) << ','
          << db_text(p.variance);
      if (mc) {
        const double v = mc->variances[static_cast<std::size_t>(p.rank - 1)];
        csv << ',' << format_double(v) << ',' << format_double(std::abs(v - p.variance) / p.variance);
      }
      csv << '\n';
    }
  }
  write_text_file(req.out_dir / "variance_curve.csv", csv.str());

  RunSummary out;
  out.files = {"variance_curve.csv"};
  write_manifest(req, std::nullopt, out.files);

  const int sawp_best = variance_argmin(OsfKind::sawp, moments);
  const int tlosf_best = variance_argmin(OsfKind::tlosf, moments);
  const auto at = static_cast<std::size_t>(sawp_best - 1);
  std::ostringstream rep;
  rep << "R " << R << ": sawp argmin r0 = " << sawp_best << ", tlosf argmin r0 = " << tlosf_best << "\n";
  rep << "tlosf vs sawp at r0 = " << sawp_best << ": "
      << format_double(to_db(sawp_var[at]) - to_db(tlosf_var[at])) << " dB\n";
  out.report = rep.str();
  return out;
}

RunSummary run_inject_clicks(const RunRequest& req) {
  const Settings& s = req.settings;
  const std::uint64_t seed = s.seed();
  std::optional<InputInfo> info;
  TimeSeries clean;
  if (req.input) {
    info.emplace();
    clean = load_input(*req.input, *info);
  } else {
    Rng noise_rng(seed, 1);
    const double rate = s.noise_sample_rate();
    const auto n = static_cast<std::size_t>(std::llround(s.noise_seconds() * rate));
    clean = white_noise(n, rate, s.noise_sigma(), noise_rng);
  }

  ClickSpec spec = s.explicit_clicks(clean.sample_rate_hz);
  if (spec.onsets_s.empty()) {
    Rng place_rng(seed, 2);
    spec = random_clicks(clean.samples.size(), clean.sample_rate_hz, s.random_clicks(), place_rng);
  }
  Rng burst_rng(seed, 3);
  TimeSeries clicked;
  try {
    clicked = inject_clicks(clean, spec, burst_rng);
  } catch (const BoundsError& e) {
    throw ConfigError(e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  prepare_dir(req.out_dir);
  RunSummary out;
  if (!req.input) {
    write_wav(req.out_dir / "clean.wav", clean, WavSampleFormat::float32);
    out.files.push_back("clean.wav");
  }
  write_wav(req.out_dir / "clicked.wav", clicked, WavSampleFormat::float32);
  out.files.push_back("clicked.wav");

  std::ostringstream csv;
  csv << "index,onset_s,duration_samples,level_db\n";
  for (std::size_t i = 0; i < spec.onsets_s.size(); ++i) {
    csv << i << ',' << format_double(spec.onsets_s[i]) << ',' << spec.duration(i) << ','
        << format_double(spec.level_db) << '\n';
  }
  write_text_file(req.out_dir / "clicks.csv", csv.str());
  out.files.push_back("clicks.csv");
  write_manifest(req, info, out.files);

  std::ostringstream rep;
  rep << spec.onsets_s.size() << " clicks at " << format_double(spec.level_db) << " dB into "
      << clean.samples.size() << " samples\n";
  const PipelineConfig pcfg = s.pipeline();
  if (!clicks_fit_window(spec, pcfg.spectral, pcfg.R)) {
    rep << "warning: some clicks touch R or more periodograms at the configured L, D and R\n";
  }
  out.report = rep.str();
  return out;
}

}  // namespace

RunSummary execute(const RunRequest& request) {
  switch (request.command) {
    case Command::simulate:
      return run_simulate(request);
    case Command::spectrogram:
      return run_spectrogram_cmd(request);
    case Command::variance_curve:
      return run_variance_curve(request);
    case Command::inject_clicks:
      return run_inject_clicks(request);
  }
  throw ConfigError("unknown command");
}

bool is_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  char ch = 0;
  while (in.get(ch)) {
    if (!std::isspace(static_cast<unsigned char>(ch))) return ch == '{';
  }
  return false;
}

RunRequest request_from_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest " + manifest_path.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (m.at("schema_version").get<int>() != manifest_schema_version) {
      throw ConfigError("unsupported manifest schema version");
    }
    RunRequest req;
    req.command = command_from_string(m.at("command").get<std::string>());
    for (const auto& [section, body] : m.at("config").items()) {
      for (const auto& [key, value] : body.items()) {
        req.settings.set(section + "." + key, value.get<std::string>());
      }
    }
    const auto& input = m.at("input");
    if (!input.is_null()) {
      const std::filesystem::path path = input.at("path").get<std::string>();
      if (!std::filesystem::exists(path)) {
        throw IngestionError("manifest input " + path.string() + " does not exist");
      }
      const std::string digest = "fnv1a64:" + file_digest(path);
      if (digest != input.at("digest").get<std::string>()) {
        throw IngestionError("manifest input " + path.string() + " has changed (digest mismatch)");
      }
      req.input = path;
    }
    req.out_dir = manifest_path.parent_path().empty() ? std::filesystem::path(".")
                                                      : manifest_path.parent_path();
    return req;
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + manifest_path.string() + " is malformed: " + e.what());
  }
}

}  // namespace uosf
