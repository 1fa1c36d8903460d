#pragma once

#include "uosf/config_file.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace uosf {

inline constexpr int manifest_schema_version = 1;

enum class Command { simulate, spectrogram, variance_curve, inject_clicks };

std::string to_string(Command c);
Command command_from_string(const std::string& name);

// Everything a run depends on. Runs are deterministic functions of the
// request, so re-executing the request stored in a manifest rewrites the
// same bytes.
struct RunRequest {
  Command command = Command::simulate;
  Settings settings;
  std::optional<std::filesystem::path> input;  // WAV file (spectrogram, inject-clicks)
  std::filesystem::path out_dir = "uosf_out";
};

struct RunSummary {
  std::vector<std::string> files;  // names written into out_dir, manifest last
  std::string report;              // human-readable lines for the console
};

// Runs the command, writes its outputs and manifest.json into out_dir.
// Throws ConfigError for invalid settings, IngestionError for unreadable
// input and OutputError for unwritable paths.
RunSummary execute(const RunRequest& request);

// Rebuilds the request stored in a manifest. The input digest is checked
// against the file on disk; a mismatch or missing file is an IngestionError.
RunRequest request_from_manifest(const std::filesystem::path& manifest_path);

// True when the file looks like a JSON manifest rather than an INI config.
bool is_manifest_file(const std::filesystem::path& path);

}  // namespace uosf
