#include "uosf/config_file.hpp"

#include "uosf/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace uosf {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"run.seed", "1"},

      {"spectral.segment_length", "512"},
      {"spectral.segment_hop", "128"},
      {"spectral.window", "hann"},
      {"spectral.frequency_bins", ""},
      {"spectral.compensate_window_energy", "false"},
      {"spectral.evaluation", "automatic"},

      {"pipeline.R", "100"},
      {"pipeline.Q", "1"},
      {"pipeline.c", "100000"},
      {"pipeline.tau", "500"},
      {"pipeline.ranks", ""},
      {"pipeline.estimators", "raw,wosa,usawp,utlosf"},
      {"pipeline.shared_blend", "false"},
      {"pipeline.sample_scale", "32768"},

      {"simulate.lambda", "1"},
      {"simulate.K", "200"},
      {"simulate.rho_initial", "0"},
      {"simulate.rho_increment", "0.02"},
      {"simulate.rho_period", "500"},
      {"simulate.R", "20"},
      {"simulate.T", "3000"},
      {"simulate.trials", "3000"},
      {"simulate.c", "1"},
      {"simulate.tau", "250"},
      {"simulate.ranks", ""},
      {"simulate.checkpoints", ""},

      {"clicks.count", "20"},
      {"clicks.level_db", "30"},
      {"clicks.min_duration_ms", "20"},
      {"clicks.max_duration_ms", "80"},
      {"clicks.margin_s", "0.5"},
      {"clicks.min_gap_s", "0"},
      {"clicks.onsets_s", ""},
      {"clicks.durations", ""},

      {"noise.seconds", "60"},
      {"noise.sample_rate", "44100"},
      {"noise.sigma", "0.00336"},

      {"variance.R", "100"},
      {"variance.trials", "0"},

      {"output.db", "true"},
      {"output.format", "csv"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T as_positive(long long v, const std::string& what) {
  if (v < 1) throw ConfigError(what + " must be at least 1");
  return static_cast<T>(v);
}

std::vector<int> parse_ranks(const std::string& text, const std::string& what) {
  std::vector<int> ranks;
  for (const auto& item : split_list(text)) {
    ranks.push_back(static_cast<int>(parse_integer(item, what)));
  }
  return ranks;
}

// Runs a validator, converting library argument errors into ConfigError.
template <class F>
void checked(F&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

long long parse_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(what + ": expected an integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(what + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Settings::Settings() : entries_(defaults()) {}

Settings Settings::from_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Settings s;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' is outside any [section]");
    }
    if (!s.has_section(section)) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      s.set(section + "." + key, value.get_value<std::string>());
    }
  }
  return s;
}

Settings Settings::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool Settings::has_section(const std::string& section) const {
  auto it = entries_.lower_bound(section + ".");
  return it != entries_.end() && it->first.compare(0, section.size() + 1, section + ".") == 0;
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = trim(value);
}

const std::string& Settings::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string Settings::to_ini() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::uint64_t Settings::seed() const {
  const long long v = parse_integer(get("run.seed"), "run.seed");
  if (v < 0) throw ConfigError("run.seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

PipelineConfig Settings::pipeline() const {
  PipelineConfig p;
  auto& sp = p.spectral;
  sp.segment_length = as_positive<std::size_t>(
      parse_integer(get("spectral.segment_length"), "spectral.segment_length"), "spectral.segment_length");
  sp.segment_hop = as_positive<std::size_t>(
      parse_integer(get("spectral.segment_hop"), "spectral.segment_hop"), "spectral.segment_hop");
  checked([&] { sp.window = window_kind_from_string(get("spectral.window")); });
  for (const auto& item : split_list(get("spectral.frequency_bins"))) {
    sp.frequency_bins.push_back(parse_real(item, "spectral.frequency_bins"));
  }
  sp.compensate_window_energy =
      parse_bool(get("spectral.compensate_window_energy"), "spectral.compensate_window_energy");
  const std::string& ev = get("spectral.evaluation");
  if (ev == "automatic") {
    sp.evaluation = Evaluation::automatic;
  } else if (ev == "direct") {
    sp.evaluation = Evaluation::direct;
  } else if (ev == "fft") {
    sp.evaluation = Evaluation::fft;
  } else {
    throw ConfigError("spectral.evaluation: expected automatic, direct or fft, got '" + ev + "'");
  }

  p.R = static_cast<int>(parse_integer(get("pipeline.R"), "pipeline.R"));
  p.Q = static_cast<int>(parse_integer(get("pipeline.Q"), "pipeline.Q"));
  p.c = parse_real(get("pipeline.c"), "pipeline.c");
  p.tau = static_cast<int>(parse_integer(get("pipeline.tau"), "pipeline.tau"));
  p.ranks = parse_ranks(get("pipeline.ranks"), "pipeline.ranks");
  checked([&] { p.estimators = parse_estimators(get("pipeline.estimators")); });
  p.shared_blend = parse_bool(get("pipeline.shared_blend"), "pipeline.shared_blend");
  p.sample_scale = parse_real(get("pipeline.sample_scale"), "pipeline.sample_scale");
  checked([&] { p.validate(); });
  return p;
}

MixtureConfig Settings::mixture() const {
  MixtureConfig m;
  m.lambda = parse_real(get("simulate.lambda"), "simulate.lambda");
  m.K = parse_real(get("simulate.K"), "simulate.K");
  m.rho.initial = parse_real(get("simulate.rho_initial"), "simulate.rho_initial");
  m.rho.increment = parse_real(get("simulate.rho_increment"), "simulate.rho_increment");
  m.rho.period = as_positive<std::size_t>(parse_integer(get("simulate.rho_period"), "simulate.rho_period"),
                                          "simulate.rho_period");
  m.R = static_cast<int>(parse_integer(get("simulate.R"), "simulate.R"));
  m.T = as_positive<std::size_t>(parse_integer(get("simulate.T"), "simulate.T"), "simulate.T");
  m.seed = seed();
  checked([&] { m.validate(); });
  return m;
}

UniversalConfig Settings::simulation_universal() const {
  UniversalConfig u;
  u.R = static_cast<int>(parse_integer(get("simulate.R"), "simulate.R"));
  u.c = parse_real(get("simulate.c"), "simulate.c");
  u.tau = static_cast<int>(parse_integer(get("simulate.tau"), "simulate.tau"));
  u.ranks = parse_ranks(get("simulate.ranks"), "simulate.ranks");
  checked([&] { u.validate(); });
  return u;
}

std::size_t Settings::trials() const {
  const long long v = parse_integer(get("simulate.trials"), "simulate.trials");
  if (v < 2) throw ConfigError("simulate.trials must be at least 2");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> Settings::checkpoints() const {
  const auto items = split_list(get("simulate.checkpoints"));
  if (items.empty()) return default_checkpoints(mixture());
  std::vector<std::size_t> out;
  const std::size_t T = mixture().T;
  for (const auto& item : items) {
    const long long v = parse_integer(item, "simulate.checkpoints");
    if (v < 0 || static_cast<std::size_t>(v) >= T) {
      throw ConfigError("simulate.checkpoints: " + item + " outside [0, T)");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

RandomClickOptions Settings::random_clicks() const {
  RandomClickOptions o;
  const long long count = parse_integer(get("clicks.count"), "clicks.count");
  if (count < 0) throw ConfigError("clicks.count must be non-negative");
  o.count = static_cast<std::size_t>(count);
  o.level_db = parse_real(get("clicks.level_db"), "clicks.level_db");
  o.min_duration_s = parse_real(get("clicks.min_duration_ms"), "clicks.min_duration_ms") / 1000.0;
  o.max_duration_s = parse_real(get("clicks.max_duration_ms"), "clicks.max_duration_ms") / 1000.0;
  o.margin_s = parse_real(get("clicks.margin_s"), "clicks.margin_s");
  o.min_gap_s = parse_real(get("clicks.min_gap_s"), "clicks.min_gap_s");
  if (!(o.min_duration_s > 0.0) || o.max_duration_s < o.min_duration_s) {
    throw ConfigError("clicks: durations need 0 < min_duration_ms <= max_duration_ms");
  }
  if (o.margin_s < 0.0 || o.min_gap_s < 0.0) throw ConfigError("clicks: margins must be non-negative");
  return o;
}

ClickSpec Settings::explicit_clicks(double sample_rate_hz) const {
  ClickSpec spec;
  spec.level_db = parse_real(get("clicks.level_db"), "clicks.level_db");
  for (const auto& item : split_list(get("clicks.onsets_s"))) {
    spec.onsets_s.push_back(parse_real(item, "clicks.onsets_s"));
  }
  for (const auto& item : split_list(get("clicks.durations"))) {
    const long long d = parse_integer(item, "clicks.durations");
    if (d < 1) throw ConfigError("clicks.durations must be positive sample counts");
    spec.durations.push_back(static_cast<std::size_t>(d));
  }
  if (!spec.onsets_s.empty() && spec.durations.empty()) {
    // Default to the midpoint of the random duration range.
    const auto o = random_clicks();
    spec.durations.push_back(static_cast<std::size_t>(
        std::lround(0.5 * (o.min_duration_s + o.max_duration_s) * sample_rate_hz)));
  }
  if (spec.onsets_s.empty() && !spec.durations.empty()) {
    throw ConfigError("clicks.durations given without clicks.onsets_s");
  }
  return spec;
}

double Settings::noise_seconds() const {
  const double v = parse_real(get("noise.seconds"), "noise.seconds");
  if (!(v > 0.0)) throw ConfigError("noise.seconds must be positive");
  return v;
}

double Settings::noise_sample_rate() const {
  const double v = parse_real(get("noise.sample_rate"), "noise.sample_rate");
  if (!(v > 0.0)) throw ConfigError("noise.sample_rate must be positive");
  return v;
}

double Settings::noise_sigma() const {
  const double v = parse_real(get("noise.sigma"), "noise.sigma");
  if (v < 0.0) throw ConfigError("noise.sigma must be non-negative");
  return v;
}

int Settings::variance_R() const {
  const long long v = parse_integer(get("variance.R"), "variance.R");
  if (v < 1) throw ConfigError("variance.R must be at least 1");
  return static_cast<int>(v);
}

std::size_t Settings::variance_trials() const {
  const long long v = parse_integer(get("variance.trials"), "variance.trials");
  if (v != 0 && v < 2) throw ConfigError("variance.trials must be 0 (analytic only) or at least 2");
  return static_cast<std::size_t>(v);
}

OutputOptions Settings::output() const {
  OutputOptions o;
  o.db = parse_bool(get("output.db"), "output.db");
  const std::string& f = get("output.format");
  if (f == "csv") {
    o.format = MatrixFormat::csv;
  } else if (f == "json") {
    o.format = MatrixFormat::json;
  } else {
    throw ConfigError("output.format: expected csv or json, got '" + f + "'");
  }
  return o;
}

}  // namespace uosf
