#include "uosf/clicks.hpp"
#include "uosf/error.hpp"
#include "uosf/wav.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

using namespace uosf;

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

// Hand-built header, so the decoder is not only tested against the encoder.
std::vector<std::uint8_t> wav_bytes(std::uint16_t tag, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& data,
                                    bool extensible = false) {
  std::vector<std::uint8_t> b;
  const std::uint32_t fmt_size = extensible ? 40 : 16;
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, 4 + 8 + fmt_size + 8 + static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), {'W', 'A', 'V', 'E'});
  // an unrelated chunk first, with odd size and pad byte
  b.insert(b.end(), {'L', 'I', 'S', 'T'});
  put32(b, 3);
  b.insert(b.end(), {'a', 'b', 'c', 0});
  b.insert(b.end(), {'f', 'm', 't', ' '});
  put32(b, fmt_size);
  put16(b, extensible ? 0xFFFE : tag);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  if (extensible) {
    put16(b, 22);
    put16(b, bits);
    put32(b, 0);
    put16(b, tag);
    for (int i = 0; i < 14; ++i) b.push_back(0);
  }
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

}  // namespace

TEST_CASE("16-bit PCM normalization and header rate") {
  std::vector<std::uint8_t> data;
  put16(data, 32767);
  put16(data, 0x8000);
  put16(data, 0);
  WavInfo info;
  const auto s = decode_wav(wav_bytes(1, 1, 44100, 16, data), &info);
  CHECK(s.sample_rate_hz == 44100.0);
  CHECK(info.frames == 3);
  CHECK(info.format == WavSampleFormat::pcm16);
  CHECK(s.samples[0] == doctest::Approx(0.99997).epsilon(1e-5));
  CHECK(s.samples[0] == 32767.0 / 32768.0);
  CHECK(s.samples[1] == -1.0);
  CHECK(s.samples[2] == 0.0);
}

TEST_CASE("24-bit, 32-bit and float decoding") {
  std::vector<std::uint8_t> d24{0xFF, 0xFF, 0x7F, 0x00, 0x00, 0x80};
  const auto a = decode_wav(wav_bytes(1, 1, 8000, 24, d24));
  CHECK(a.samples[0] == 8388607.0 / 8388608.0);
  CHECK(a.samples[1] == -1.0);

  std::vector<std::uint8_t> d32;
  put32(d32, 0x40000000u);
  const auto b = decode_wav(wav_bytes(1, 1, 8000, 32, d32));
  CHECK(b.samples[0] == 0.5);

  std::vector<std::uint8_t> df;
  float f = -0.25f;
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put32(df, u);
  const auto c = decode_wav(wav_bytes(3, 1, 48000, 32, df));
  CHECK(c.samples[0] == -0.25);

  const auto e = decode_wav(wav_bytes(1, 1, 8000, 32, d32, true));
  CHECK(e.samples[0] == 0.5);
}

TEST_CASE("multichannel input keeps channel 0") {
  std::vector<std::uint8_t> data;
  put16(data, 16384);
  put16(data, 100);
  put16(data, 0xC000);
  put16(data, 200);
  const auto s = decode_wav(wav_bytes(1, 2, 22050, 16, data));
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[0] == 0.5);
  CHECK(s.samples[1] == -0.5);
}

TEST_CASE("ingestion errors") {
  std::vector<std::uint8_t> data;
  put16(data, 1);
  put16(data, 2);
  const auto good = wav_bytes(1, 1, 8000, 16, data);
  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_wav(truncated), IngestionError);
  CHECK_THROWS_AS(decode_wav(std::vector<std::uint8_t>(good.begin(), good.begin() + 20)), IngestionError);
  auto not_riff = good;
  not_riff[0] = 'X';
  CHECK_THROWS_AS(decode_wav(not_riff), IngestionError);
  CHECK_THROWS_AS(decode_wav(wav_bytes(1, 1, 8000, 16, {})), IngestionError);
  CHECK_THROWS_AS(decode_wav(wav_bytes(1, 1, 8000, 8, {1, 2})), IngestionError);
  CHECK_THROWS_AS(decode_wav(wav_bytes(2, 1, 8000, 16, data)), IngestionError);  // ADPCM
  CHECK_THROWS_AS(decode_wav(wav_bytes(1, 1, 0, 16, data)), IngestionError);
  CHECK_THROWS_AS(read_wav("/nonexistent/file.wav"), IngestionError);
}

TEST_CASE("write and read back") {
  TimeSeries s;
  s.sample_rate_hz = 44100.0;
  s.samples = {0.0, 0.5, -0.5, 0.999, -1.0, 0.123456};
  const auto path = std::filesystem::temp_directory_path() / "uosf_test_roundtrip.wav";
  for (auto fmt : {WavSampleFormat::pcm16, WavSampleFormat::pcm24, WavSampleFormat::pcm32, WavSampleFormat::float32}) {
    write_wav(path, s, fmt);
    WavInfo info;
    const auto r = read_wav(path, &info);
    CHECK(info.format == fmt);
    CHECK(r.sample_rate_hz == 44100.0);
    REQUIRE(r.samples.size() == s.samples.size());
    const double tol = fmt == WavSampleFormat::pcm16 ? 1.0 / 32768.0 : 1e-6;
    for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(std::abs(r.samples[i] - s.samples[i]) <= tol);
  }
  std::filesystem::remove(path);
  // clipping at full scale
  TimeSeries loud{{2.0, -2.0}, 8000.0};
  const auto r = decode_wav(encode_wav(loud, WavSampleFormat::pcm16));
  CHECK(r.samples[0] == 32767.0 / 32768.0);
  CHECK(r.samples[1] == -1.0);
}

TEST_CASE("click level sets burst variance") {
  TimeSeries s;
  s.sample_rate_hz = 1000.0;
  s.samples.assign(200000, 0.0);
  for (double level : {0.0, 30.0}) {
    ClickSpec spec;
    spec.onsets_s = {10.0};
    spec.durations = {100000};
    spec.level_db = level;
    spec.background_power = 2.0;
    Rng rng(4);
    const auto out = inject_clicks(s, spec, rng);
    double p = 0.0;
    for (std::size_t i = 10000; i < 110000; ++i) p += out.samples[i] * out.samples[i];
    p /= 100000.0;
    // 0 dB: burst power equals background; 30 dB: 1000x
    CHECK(p == doctest::Approx(2.0 * std::pow(10.0, level / 10.0)).epsilon(0.02));
    CHECK(out.samples[9999] == 0.0);
    CHECK(out.samples[110000] == 0.0);
  }
}

TEST_CASE("click background defaults to the series power") {
  Rng noise_rng(1);
  const auto s = white_noise(50000, 1000.0, 0.5, noise_rng);
  CHECK(mean_power(s) == doctest::Approx(0.25).epsilon(0.03));
  ClickSpec spec;
  spec.onsets_s = {1.0, 20.0};
  spec.durations = {20000};
  spec.level_db = 10.0;
  Rng rng(2);
  const auto out = inject_clicks(s, spec, rng);
  double added = 0.0;
  for (std::size_t i = 1000; i < 21000; ++i) {
    const double d = out.samples[i] - s.samples[i];
    added += d * d;
  }
  CHECK(added / 20000.0 == doctest::Approx(10.0 * mean_power(s)).epsilon(0.05));
}

TEST_CASE("empty spec leaves the series unchanged") {
  Rng noise_rng(1);
  const auto s = white_noise(1000, 100.0, 1.0, noise_rng);
  Rng rng(3);
  CHECK(inject_clicks(s, ClickSpec{}, rng).samples == s.samples);
}

TEST_CASE("click spec errors") {
  TimeSeries s{std::vector<double>(1000, 0.0), 100.0};
  Rng rng(1);
  ClickSpec spec;
  spec.onsets_s = {10.0};
  spec.durations = {5};
  CHECK_THROWS_AS(inject_clicks(s, spec, rng), BoundsError);
  spec.onsets_s = {-0.1};
  CHECK_THROWS_AS(inject_clicks(s, spec, rng), BoundsError);
  spec.onsets_s = {1.0, 2.0, 3.0};
  spec.durations = {5, 6};
  CHECK_THROWS_AS(inject_clicks(s, spec, rng), ArgumentError);
  spec.durations = {0};
  CHECK_THROWS_AS(inject_clicks(s, spec, rng), ArgumentError);
  // a burst running past the end is truncated
  spec.onsets_s = {9.99};
  spec.durations = {50};
  CHECK(inject_clicks(s, spec, rng).samples.size() == 1000);
}

TEST_CASE("affected periodogram count") {
  SpectralConfig c;  // L = 512, D = 128
  CHECK(affected_periodograms(0, c) == 0);
  CHECK(affected_periodograms(1, c) == 4);
  CHECK(affected_periodograms(128, c) == 5);
  CHECK(affected_periodograms(3528, c) == 32);  // 80 ms at 44.1 kHz
  // brute force over every offset
  SpectralConfig small;
  small.segment_length = 16;
  small.segment_hop = 4;
  for (std::size_t d = 1; d < 30; ++d) {
    std::size_t worst = 0;
    for (std::size_t s = 40; s < 60; ++s) {
      std::size_t count = 0;
      for (std::size_t n = 0; n * 4 < 200; ++n) {
        if (n * 4 <= s + d - 1 && n * 4 + 15 >= s) ++count;
      }
      worst = std::max(worst, count);
    }
    CHECK(affected_periodograms(d, small) == worst);
  }
  ClickSpec spec;
  spec.onsets_s = {1.0};
  spec.durations = {3528};
  CHECK(clicks_fit_window(spec, c, 100));
  CHECK_FALSE(clicks_fit_window(spec, c, 32));
}

TEST_CASE("random clicks are spread out and within bounds") {
  Rng rng(6);
  RandomClickOptions o;
  o.min_gap_s = 0.2;
  const auto spec = random_clicks(44100 * 60, 44100.0, o, rng);
  REQUIRE(spec.onsets_s.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(spec.onsets_s[i] >= 0.5);
    CHECK(spec.onsets_s[i] + spec.duration(i) / 44100.0 <= 59.5);
    CHECK(spec.duration(i) >= 882);
    CHECK(spec.duration(i) <= 3528);
    if (i > 0) CHECK(spec.onsets_s[i] >= spec.onsets_s[i - 1] + spec.duration(i - 1) / 44100.0 + 0.2 - 1e-9);
  }
  o.count = 1000;
  CHECK_THROWS_AS(random_clicks(44100 * 60, 44100.0, o, rng), ArgumentError);
}
