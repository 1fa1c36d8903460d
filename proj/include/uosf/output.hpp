#pragma once

#include "uosf/spectrogram.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace uosf {

enum class MatrixFormat { csv, json };

struct OutputOptions {
  bool db = true;  // 10 log10(power), floored at db_floor; false writes linear power
  MatrixFormat format = MatrixFormat::csv;
};

inline constexpr double db_floor = -300.0;

// 10 log10(p) for p > 0, never below db_floor; db_floor for p <= 0.
double to_db(double power);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// CSV layout: the first row is "time_s" followed by the frequency axis in Hz;
// every further row is a time in seconds followed by that row's values.
std::string spectrogram_csv(const Spectrogram& s, bool db);
// {"estimator", "unit", "times_s", "freqs_hz", "values": [[...], ...]}
std::string spectrogram_json(const Spectrogram& s, bool db);

// Writes one file per estimator into out_dir (created if missing), named
// "<estimator>.csv" or "<estimator>.json". Returns the file names written.
// Throws ArgumentError on an empty set and OutputError when a file cannot
// be written.
std::vector<std::string> emit_outputs(const SpectrogramSet& results,
                                      const std::filesystem::path& out_dir,
                                      const OutputOptions& options);

void write_text_file(const std::filesystem::path& path, const std::string& text);

// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::span<const std::uint8_t> bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace uosf
