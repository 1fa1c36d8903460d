#include "uosf/wav.hpp"

#include "uosf/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace uosf {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

double decode_sample(const std::uint8_t* p, WavSampleFormat format) {
  switch (format) {
    case WavSampleFormat::pcm16:
      return static_cast<double>(static_cast<std::int16_t>(read_u16(p))) / 32768.0;
    case WavSampleFormat::pcm24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    case WavSampleFormat::pcm32:
      return static_cast<double>(static_cast<std::int32_t>(read_u32(p))) / 2147483648.0;
    case WavSampleFormat::float32:
      return static_cast<double>(std::bit_cast<float>(read_u32(p)));
  }
  return 0.0;
}

}  // namespace

TimeSeries decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IngestionError("not a RIFF/WAVE file");
  }

  WavInfo wi;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const bool is_data = std::memcmp(chunk, "data", 4) == 0;
    if (!is_data && body + size > bytes.size()) throw IngestionError("truncated chunk in WAV file");

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw IngestionError("fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t tag = read_u16(f);
      wi.channels = read_u16(f + 2);
      wi.sample_rate = read_u32(f + 4);
      wi.bits_per_sample = read_u16(f + 14);
      if (tag == kFormatExtensible) {
        if (size < 40) throw IngestionError("extensible fmt chunk too short");
        tag = read_u16(f + 24);  // first two bytes of the subformat GUID
      }
      if (tag == kFormatPcm) {
        switch (wi.bits_per_sample) {
          case 16:
            wi.format = WavSampleFormat::pcm16;
            break;
          case 24:
            wi.format = WavSampleFormat::pcm24;
            break;
          case 32:
            wi.format = WavSampleFormat::pcm32;
            break;
          default:
            throw IngestionError("unsupported PCM bit depth " + std::to_string(wi.bits_per_sample));
        }
      } else if (tag == kFormatFloat && wi.bits_per_sample == 32) {
        wi.format = WavSampleFormat::float32;
      } else {
        throw IngestionError("unsupported WAV codec (format tag " + std::to_string(tag) + ")");
      }
      if (wi.channels == 0) throw IngestionError("WAV file declares zero channels");
      if (wi.sample_rate == 0) throw IngestionError("WAV file declares a zero sample rate");
      have_fmt = true;
    } else if (is_data) {
      if (body + size > bytes.size()) throw IngestionError("truncated data chunk in WAV file");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw IngestionError("WAV file has no fmt chunk");
  if (data == nullptr) throw IngestionError("WAV file has no data chunk");

  const std::size_t bytes_per_sample = wi.bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * wi.channels;
  wi.frames = data_size / frame_bytes;
  if (wi.frames == 0) throw IngestionError("WAV file contains no samples");

  TimeSeries series;
  series.sample_rate_hz = static_cast<double>(wi.sample_rate);
  series.samples.resize(wi.frames);
  for (std::size_t i = 0; i < wi.frames; ++i) {
    series.samples[i] = decode_sample(data + i * frame_bytes, wi.format);
  }
  for (double v : series.samples) {
    if (!std::isfinite(v)) throw IngestionError("WAV file contains non-finite samples");
  }
  if (info) *info = wi;
  return series;
}

TimeSeries read_wav(const std::filesystem::path& path, WavInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, info);
  } catch (const IngestionError& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const TimeSeries& series, WavSampleFormat format) {
  std::uint16_t bits = 16;
  std::uint16_t tag = kFormatPcm;
  switch (format) {
    case WavSampleFormat::pcm16:
      bits = 16;
      break;
    case WavSampleFormat::pcm24:
      bits = 24;
      break;
    case WavSampleFormat::pcm32:
      bits = 32;
      break;
    case WavSampleFormat::float32:
      bits = 32;
      tag = kFormatFloat;
      break;
  }
  const std::uint32_t bytes_per_sample = bits / 8u;
  const auto data_size = static_cast<std::uint32_t>(series.samples.size() * bytes_per_sample);
  const auto rate = static_cast<std::uint32_t>(std::lround(series.sample_rate_hz));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  for (double v : series.samples) {
    if (format == WavSampleFormat::float32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      continue;
    }
    const double full = std::ldexp(1.0, bits - 1);
    const double scaled = std::clamp(std::round(v * full), -full, full - 1.0);
    const auto q = static_cast<std::int64_t>(scaled);
    for (std::uint32_t b = 0; b < bytes_per_sample; ++b) {
      out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(q) >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const TimeSeries& series, WavSampleFormat format) {
  const auto bytes = encode_wav(series, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw OutputError("failed writing " + path.string());
}

}  // namespace uosf
