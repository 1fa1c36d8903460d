#include "uosf/commands.hpp"
#include "uosf/error.hpp"
#include "uosf/wav.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace uosf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("uosf_cmd_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void check_same_files(const fs::path& a, const fs::path& b, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (n == "manifest.json") continue;
    INFO(n);
    CHECK(slurp(a / n) == slurp(b / n));
  }
}

Settings small_pipeline() {
  Settings s;
  s.set("spectral.segment_length", "64");
  s.set("spectral.segment_hop", "16");
  s.set("pipeline.R", "20");
  s.set("pipeline.tau", "30");
  s.set("noise.seconds", "3");
  s.set("noise.sample_rate", "8000");
  s.set("clicks.count", "3");
  s.set("clicks.margin_s", "0.2");
  return s;
}

}  // namespace

TEST_CASE("command names") {
  for (Command c : {Command::simulate, Command::spectrogram, Command::variance_curve,
                    Command::inject_clicks}) {
    CHECK(command_from_string(to_string(c)) == c);
  }
  CHECK(to_string(Command::variance_curve) == "variance-curve");
  CHECK_THROWS_AS(command_from_string("plot"), ConfigError);
}

TEST_CASE("simulate writes metrics, traces and a manifest") {
  const auto dir = temp_dir("sim");
  RunRequest req;
  req.command = Command::simulate;
  req.settings.set("simulate.trials", "4");
  req.settings.set("simulate.T", "600");
  req.settings.set("simulate.R", "6");
  req.settings.set("simulate.tau", "50");
  req.settings.set("simulate.rho_period", "200");
  req.out_dir = dir;
  const auto sum = execute(req);
  CHECK(sum.files == std::vector<std::string>{"metrics.csv", "blend_trace.csv", "manifest.json"});
  std::istringstream metrics(slurp(dir / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  CHECK(line == "checkpoint,rho,estimator_kind,rank_or_universal,variance,bias,mse,variance_db,mse_db");
  std::size_t rows = 0;
  while (std::getline(metrics, line)) ++rows;
  CHECK(rows == 3 * 2 * 7);  // checkpoints x kinds x (ranks + universal)
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["schema_version"] == manifest_schema_version);
  CHECK(m["command"] == "simulate");
  CHECK(m["input"].is_null());
  CHECK(m["config"]["simulate"]["trials"] == "4");
  CHECK(m["outputs"].size() == 2);

  const auto again = temp_dir("sim_again");
  auto rerun = request_from_manifest(dir / "manifest.json");
  CHECK(rerun.out_dir == dir);
  rerun.out_dir = again;
  execute(rerun);
  check_same_files(dir, again, sum.files);
  CHECK(slurp(dir / "manifest.json") == slurp(again / "manifest.json"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("variance-curve reports the argmins") {
  const auto dir = temp_dir("var");
  RunRequest req;
  req.command = Command::variance_curve;
  req.settings.set("variance.trials", "20000");
  req.out_dir = dir;
  const auto sum = execute(req);
  CHECK(sum.report.find("sawp argmin r0 = 80") != std::string::npos);
  CHECK(sum.report.find("tlosf argmin r0 = 100") != std::string::npos);
  std::istringstream csv(slurp(dir / "variance_curve.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "kind,r0,variance,variance_db,mc_variance,mc_rel_error");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 200);
  fs::remove_all(dir);
}

TEST_CASE("inject-clicks then spectrogram, rerun from manifests") {
  const auto dir = temp_dir("pipe");
  RunRequest inj;
  inj.command = Command::inject_clicks;
  inj.settings = small_pipeline();
  inj.out_dir = dir / "clicks";
  const auto a = execute(inj);
  CHECK(a.files == std::vector<std::string>{"clean.wav", "clicked.wav", "clicks.csv", "manifest.json"});
  const auto clean = read_wav(dir / "clicks" / "clean.wav");
  CHECK(clean.samples.size() == 24000);
  CHECK(clean.sample_rate_hz == 8000.0);

  RunRequest spec;
  spec.command = Command::spectrogram;
  spec.settings = small_pipeline();
  spec.settings.set("pipeline.sample_scale", "1");
  spec.settings.set("pipeline.c", "1");
  spec.input = dir / "clicks" / "clicked.wav";
  spec.out_dir = dir / "spec";
  const auto b = execute(spec);
  CHECK(b.files == std::vector<std::string>{"raw.csv", "wosa.csv", "usawp.csv", "utlosf.csv",
                                            "manifest.json"});
  const auto m = nlohmann::json::parse(slurp(dir / "spec" / "manifest.json"));
  CHECK(m["input"]["samples"] == 24000);
  CHECK(m["input"]["digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);

  for (const auto& [sub, files] : {std::pair{std::string("clicks"), a.files},
                                   std::pair{std::string("spec"), b.files}}) {
    auto req = request_from_manifest(dir / sub / "manifest.json");
    req.out_dir = dir / (sub + "_again");
    execute(req);
    check_same_files(dir / sub, req.out_dir, files);
    CHECK(slurp(dir / sub / "manifest.json") == slurp(req.out_dir / "manifest.json"));
  }

  // a changed input is refused
  TimeSeries other = clean;
  other.samples[0] += 0.5;
  write_wav(dir / "clicks" / "clicked.wav", other);
  CHECK_THROWS_AS(request_from_manifest(dir / "spec" / "manifest.json"), IngestionError);
  fs::remove(dir / "clicks" / "clicked.wav");
  CHECK_THROWS_AS(request_from_manifest(dir / "spec" / "manifest.json"), IngestionError);
  fs::remove_all(dir);
}

TEST_CASE("command errors") {
  const auto dir = temp_dir("err");
  RunRequest req;
  req.command = Command::spectrogram;
  req.out_dir = dir;
  CHECK_THROWS_AS(execute(req), ConfigError);
  req.input = dir / "missing.wav";
  CHECK_THROWS_AS(execute(req), IngestionError);
  std::ofstream(dir / "junk.wav") << "not a wav file";
  req.input = dir / "junk.wav";
  CHECK_THROWS_AS(execute(req), IngestionError);
  // valid WAV that is too short for R periodograms
  TimeSeries s;
  s.sample_rate_hz = 8000.0;
  s.samples.assign(1000, 0.1);
  write_wav(dir / "short.wav", s);
  req.input = dir / "short.wav";
  CHECK_THROWS_AS(execute(req), IngestionError);

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(request_from_manifest(dir / "bad.json"), ConfigError);
  CHECK(is_manifest_file(dir / "bad.json"));
  std::ofstream(dir / "cfg.ini") << "[run]\nseed = 2\n";
  CHECK_FALSE(is_manifest_file(dir / "cfg.ini"));

  RunRequest inj;
  inj.command = Command::inject_clicks;
  inj.settings = small_pipeline();
  inj.settings.set("clicks.onsets_s", "99");
  inj.out_dir = dir / "x";
  CHECK_THROWS_AS(execute(inj), ConfigError);
  fs::remove_all(dir);
}
