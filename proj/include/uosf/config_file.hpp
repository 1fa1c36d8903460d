#pragma once

#include "uosf/clicks.hpp"
#include "uosf/output.hpp"
#include "uosf/simulate.hpp"
#include "uosf/spectrogram.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace uosf {

// Run settings as flat "section.key" -> text entries. Every known key starts
// at its default; files and overrides replace entries, and unknown keys are
// rejected with ConfigError. The typed accessors parse and validate on
// demand, also throwing ConfigError.
//
// File format (INI style, ';' starts a comment):
//
//   [pipeline]
//   R = 100
//   estimators = raw,wosa,utlosf
class Settings {
 public:
  Settings();

  static Settings from_file(const std::filesystem::path& path);
  static Settings from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  bool has_section(const std::string& section) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string to_ini() const;

  std::uint64_t seed() const;
  PipelineConfig pipeline() const;
  MixtureConfig mixture() const;
  UniversalConfig simulation_universal() const;
  std::size_t trials() const;
  // Empty entry: the closing iteration of each rho level.
  std::vector<std::size_t> checkpoints() const;
  RandomClickOptions random_clicks() const;
  // Explicit onsets_s / durations, empty when no onsets are listed.
  ClickSpec explicit_clicks(double sample_rate_hz) const;
  double noise_seconds() const;
  double noise_sample_rate() const;
  double noise_sigma() const;
  int variance_R() const;
  std::size_t variance_trials() const;  // 0: analytic curve only
  OutputOptions output() const;

 private:
  std::map<std::string, std::string> entries_;
};

// Value parsers shared with the CLI; all throw ConfigError naming `what`.
long long parse_integer(const std::string& text, const std::string& what);
double parse_real(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text);

}  // namespace uosf
