#include "uosf/output.hpp"

#include "uosf/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

namespace uosf {

double to_db(double power) {
  if (!(power > 0.0)) return db_floor;
  return std::max(db_floor, 10.0 * std::log10(power));
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double cell(const Spectrogram& s, std::size_t r, std::size_t c, bool db) {
  const double p = s.at(r, c);
  return db ? to_db(p) : p;
}

}  // namespace

std::string spectrogram_csv(const Spectrogram& s, bool db) {
  std::string out = "time_s";
  for (double f : s.freqs_hz) {
    out += ',';
    out += format_double(f);
  }
  out += '\n';
  for (std::size_t r = 0; r < s.rows(); ++r) {
    out += format_double(s.times_s[r]);
    for (std::size_t c = 0; c < s.cols(); ++c) {
      out += ',';
      out += format_double(cell(s, r, c, db));
    }
    out += '\n';
  }
  return out;
}

std::string spectrogram_json(const Spectrogram& s, bool db) {
  nlohmann::ordered_json j;
  j["estimator"] = to_string(s.estimator);
  j["unit"] = db ? "dB" : "power";
  j["times_s"] = s.times_s;
  j["freqs_hz"] = s.freqs_hz;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    std::vector<double> row(s.cols());
    for (std::size_t c = 0; c < s.cols(); ++c) row[c] = cell(s, r, c, db);
    rows.push_back(row);
  }
  j["values"] = std::move(rows);
  return j.dump() + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out << text;
  if (!out) throw OutputError("failed writing " + path.string());
}

std::vector<std::string> emit_outputs(const SpectrogramSet& results,
                                      const std::filesystem::path& out_dir,
                                      const OutputOptions& options) {
  if (results.empty()) throw ArgumentError("no spectrograms to write");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::string> names;
  for (const auto& [est, s] : results) {
    const bool json = options.format == MatrixFormat::json;
    const std::string name = to_string(est) + (json ? ".json" : ".csv");
    write_text_file(out_dir / name, json ? spectrogram_json(s, options.db) : spectrogram_csv(s, options.db));
    names.push_back(name);
  }
  return names;
}

std::string fnv1a64_hex(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

}  // namespace uosf
