#include "uosf/config_file.hpp"
#include "uosf/error.hpp"
#include "uosf/output.hpp"

#include <doctest.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace uosf;
namespace fs = std::filesystem;

namespace {

Spectrogram synthetic(std::size_t T, std::size_t F) {
  Spectrogram s;
  s.estimator = Estimator::wosa;
  for (std::size_t r = 0; r < T; ++r) s.times_s.push_back(0.1 * static_cast<double>(r) + 1.0 / 3.0);
  for (std::size_t k = 0; k < F; ++k) s.freqs_hz.push_back(44100.0 * static_cast<double>(k) / 512.0);
  for (std::size_t r = 0; r < T; ++r) {
    for (std::size_t k = 0; k < F; ++k) s.power.push_back(static_cast<double>(r * F + k) * 0.7);
  }
  return s;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double parse(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("uosf_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("decibel conversion") {
  CHECK(to_db(1.0) == 0.0);
  CHECK(to_db(100.0) == doctest::Approx(20.0));
  CHECK(to_db(0.0) == db_floor);
  CHECK(to_db(-1.0) == db_floor);
  CHECK(to_db(1e-40) == db_floor);
  CHECK(to_db(std::numeric_limits<double>::denorm_min()) == db_floor);
}

TEST_CASE("shortest round-trip number text") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 1e300}) {
    CHECK(parse(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("csv layout: header row plus one row per time") {
  const auto s = synthetic(10, 257);
  const auto rows = parse_csv(spectrogram_csv(s, false));
  REQUIRE(rows.size() == 11);
  for (const auto& r : rows) CHECK(r.size() == 258);
  CHECK(rows[0][0] == "time_s");
  for (std::size_t k = 0; k < 257; ++k) CHECK(parse(rows[0][k + 1]) == s.freqs_hz[k]);
  for (std::size_t r = 0; r < 10; ++r) {
    CHECK(parse(rows[r + 1][0]) == s.times_s[r]);
    for (std::size_t k = 0; k < 257; ++k) CHECK(parse(rows[r + 1][k + 1]) == s.at(r, k));
  }
  const auto db_rows = parse_csv(spectrogram_csv(s, true));
  CHECK(parse(db_rows[1][1]) == db_floor);
  CHECK(parse(db_rows[2][5]) == to_db(s.at(1, 4)));
}

TEST_CASE("json layout") {
  const auto s = synthetic(3, 4);
  const auto j = nlohmann::json::parse(spectrogram_json(s, true));
  CHECK(j["estimator"] == "wosa");
  CHECK(j["unit"] == "dB");
  CHECK(j["times_s"].size() == 3);
  CHECK(j["freqs_hz"].size() == 4);
  REQUIRE(j["values"].size() == 3);
  CHECK(j["values"][2][3].get<double>() == to_db(s.at(2, 3)));
  CHECK(nlohmann::json::parse(spectrogram_json(s, false))["unit"] == "power");
}

TEST_CASE("emit_outputs writes one file per estimator") {
  const auto dir = temp_dir("emit");
  SpectrogramSet set;
  set[Estimator::raw] = synthetic(2, 3);
  set[Estimator::raw].estimator = Estimator::raw;
  set[Estimator::utlosf] = synthetic(2, 3);
  set[Estimator::utlosf].estimator = Estimator::utlosf;
  auto names = emit_outputs(set, dir / "nested", {});
  CHECK(names == std::vector<std::string>{"raw.csv", "utlosf.csv"});
  CHECK(fs::exists(dir / "nested" / "raw.csv"));
  names = emit_outputs(set, dir, {true, MatrixFormat::json});
  CHECK(names == std::vector<std::string>{"raw.json", "utlosf.json"});
  CHECK_THROWS_AS(emit_outputs({}, dir, {}), ArgumentError);
  // a regular file where the directory should be
  write_text_file(dir / "blocker", "x");
  CHECK_THROWS_AS(emit_outputs(set, dir / "blocker" / "sub", {}), OutputError);
  fs::remove_all(dir);
}

TEST_CASE("fnv-1a 64 reference vectors") {
  auto h = [](const std::string& s) {
    return fnv1a64_hex({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  CHECK(h("") == "cbf29ce484222325");
  CHECK(h("a") == "af63dc4c8601ec8c");
  CHECK(h("foobar") == "85944171f73967e8");
  const auto dir = temp_dir("digest");
  fs::create_directories(dir);
  write_text_file(dir / "f", "foobar");
  CHECK(file_digest(dir / "f") == "85944171f73967e8");
  CHECK_THROWS_AS(file_digest(dir / "missing"), IngestionError);
  fs::remove_all(dir);
}

TEST_CASE("settings defaults") {
  const Settings s;
  CHECK(s.seed() == 1);
  const auto p = s.pipeline();
  CHECK(p.spectral.segment_length == 512);
  CHECK(p.spectral.segment_hop == 128);
  CHECK(p.R == 100);
  CHECK(p.Q == 1);
  CHECK(p.c == 1e5);
  CHECK(p.tau == 500);
  CHECK(p.estimators.size() == 4);
  const auto m = s.mixture();
  CHECK(m.lambda == 1.0);
  CHECK(m.K == 200.0);
  CHECK(m.R == 20);
  CHECK(m.T == 3000);
  CHECK(m.rho.increment == 0.02);
  CHECK(m.rho.period == 500);
  const auto u = s.simulation_universal();
  CHECK(u.c == 1.0);
  CHECK(u.tau == 250);
  CHECK(s.trials() == 3000);
  CHECK(s.checkpoints() == std::vector<std::size_t>{499, 999, 1499, 1999, 2499, 2999});
  CHECK(s.output().db);
  CHECK(s.output().format == MatrixFormat::csv);
}

TEST_CASE("settings from text") {
  const auto s = Settings::from_text(
      "; comment\n[run]\nseed = 7\n[pipeline]\nR = 50\nestimators = raw, utlosf\n"
      "ranks = 10,20,50\n[output]\nformat = json\ndb = false\n");
  CHECK(s.seed() == 7);
  const auto p = s.pipeline();
  CHECK(p.R == 50);
  CHECK(p.ranks == std::vector<int>{10, 20, 50});
  CHECK(p.estimators == std::vector<Estimator>{Estimator::raw, Estimator::utlosf});
  CHECK(s.output().format == MatrixFormat::json);
  CHECK_FALSE(s.output().db);
  CHECK(s.has_section("pipeline"));
}

TEST_CASE("settings reject unknown or malformed entries") {
  CHECK_THROWS_AS(Settings::from_text("[pipeline]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(Settings::from_text("[nowhere]\nR = 1\n"), ConfigError);
  CHECK_THROWS_AS(Settings::from_text("R = 1\n"), ConfigError);
  CHECK_THROWS_AS(Settings::from_text("[pipeline\nR = 1\n"), ConfigError);
  Settings s;
  CHECK_THROWS_AS(s.set("pipeline.bogus", "1"), ConfigError);
  s.set("pipeline.R", "abc");
  CHECK_THROWS_AS(s.pipeline(), ConfigError);
  s.set("pipeline.R", "0");
  CHECK_THROWS_AS(s.pipeline(), ConfigError);
  s.set("pipeline.R", "100");
  s.set("pipeline.Q", "200");
  CHECK_THROWS_AS(s.pipeline(), ConfigError);
  s.set("pipeline.Q", "1");
  s.set("pipeline.estimators", "raw,median");
  CHECK_THROWS_AS(s.pipeline(), ConfigError);
  s.set("pipeline.estimators", "raw");
  s.set("spectral.window", "kaiser");
  CHECK_THROWS_AS(s.pipeline(), ConfigError);
  CHECK_THROWS_AS(Settings::from_file("/nonexistent/uosf.ini"), ConfigError);

  CHECK(parse_integer(" 42 ", "x") == 42);
  CHECK_THROWS_AS(parse_integer("4.2", "x"), ConfigError);
  CHECK(parse_real("1e5", "x") == 1e5);
  CHECK_THROWS_AS(parse_real("inf", "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("", "x"), ConfigError);
  CHECK(parse_bool("yes", "x"));
  CHECK_FALSE(parse_bool("0", "x"));
  CHECK_THROWS_AS(parse_bool("maybe", "x"), ConfigError);
  CHECK(split_list(" a, b ,,c ") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("ini text round trip") {
  Settings s;
  s.set("pipeline.R", "64");
  s.set("clicks.onsets_s", "1.5,2.5");
  s.set("spectral.frequency_bins", "0.1,0.2");
  const auto back = Settings::from_text(s.to_ini());
  CHECK(back.entries() == s.entries());
  CHECK(back.pipeline().spectral.frequency_bins == std::vector<double>{0.1, 0.2});
}
