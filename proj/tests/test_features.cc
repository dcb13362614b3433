// tests/test_features.cc

// Copyright 2026  csphmm authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>

#include "csphmm/audio_io.h"
#include "csphmm/error.h"
#include "csphmm/features.h"
#include "test_util.h"

using namespace csphmm;
using namespace csphmm::testing;

namespace {

AudioBuffer Sine(double hz, double seconds, int rate, double amp = 0.5) {
  AudioBuffer a;
  a.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t i = 0; i < n; ++i) a.samples.push_back(amp * std::sin(2.0 * M_PI * hz * i / rate));
  return a;
}

AudioBuffer Sawtooth(double hz, double seconds, int rate) {
  AudioBuffer a;
  a.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = std::fmod(hz * i / rate, 1.0);
    a.samples.push_back(0.8 * (phase - 0.5));
  }
  return a;
}

AudioBuffer Noise(std::size_t n, int rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  AudioBuffer a;
  a.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) a.samples.push_back(g(rng));
  return a;
}

}  // namespace

TEST_CASE("pre-emphasis follows its difference equation") {
  const AudioBuffer x = Noise(4096, 16000, 1);
  CHECK(Preemphasize(x, 0.0).samples == x.samples);

  AudioBuffer c;
  c.sample_rate = 8000;
  c.samples.assign(5, 0.5);
  const AudioBuffer y = Preemphasize(c, 0.97);
  CHECK(y.samples[0] == 0.5);
  for (std::size_t i = 1; i < 5; ++i) CHECK(y.samples[i] == doctest::Approx(0.03 * 0.5).epsilon(1e-12));

  // DFT at DC and Nyquist against the one-tap response, edge term included.
  const double a = 0.97;
  const AudioBuffer z = Preemphasize(x, a);
  const std::size_t n = x.samples.size();
  double x0 = 0, xpi = 0, z0 = 0, zpi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = i % 2 ? -1.0 : 1.0;
    x0 += x.samples[i];
    xpi += sign * x.samples[i];
    z0 += z.samples[i];
    zpi += sign * z.samples[i];
  }
  const double last = x.samples[n - 1], last_sign = (n - 1) % 2 ? -1.0 : 1.0;
  CHECK(std::abs(z0 - ((1 - a) * x0 + a * last)) < 1e-9);
  CHECK(std::abs(zpi - ((1 + a) * xpi - a * last_sign * last)) < 1e-9);
  CHECK(std::abs(zpi / z0) > std::abs(xpi / x0));

  CHECK_THROWS_AS(Preemphasize(AudioBuffer{{}, 8000}, 0.5), InvalidInput);
  CHECK_THROWS_AS(Preemphasize(x, 1.0), InvalidInput);
}

TEST_CASE("DCT basis is orthonormal") {
  for (int n : {1, 5, 26}) {
    const auto m = DctMatrix(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int k = 0; k < n; ++k) dot += m[i * n + k] * m[j * n + k];
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
  }
}

TEST_CASE("mel filterbank shape") {
  const MelFilterbank fb(26, 1024, 44100);
  REQUIRE(fb.num_filters() == 26);
  for (int m = 0; m < 26; ++m) {
    double sum = 0.0;
    for (int k = 0; k < fb.num_bins(); ++k) {
      CHECK(fb.weight(m, k) >= 0.0);
      sum += fb.weight(m, k);
    }
    CHECK(sum > 0.0);
    if (m > 0) CHECK(fb.centers_hz()[m] > fb.centers_hz()[m - 1]);
  }
  CHECK(HzToMel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
  CHECK(MelToHz(HzToMel(440.0)) == doctest::Approx(440.0).epsilon(1e-12));
}

TEST_CASE("a 1 kHz tone peaks in the filter around 1 kHz") {
  const int rate = 44100, filters = 26;
  const AudioBuffer tone = Sine(1000.0, 0.3, rate);
  const FeatureSequence logmel = LogMelEnergies(tone, FrameSpec{}, MfccSpec{});
  REQUIRE(logmel.dim() == static_cast<std::size_t>(filters));

  // Centres from the mel formula over [0, rate / 2].
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> centers;
  for (int i = 1; i <= filters; ++i) centers.push_back(hz(mel(rate / 2.0) * i / (filters + 1)));
  int below = 0;
  while (centers[below + 1] < 1000.0) ++below;
  const auto frame = logmel.frame(logmel.size() / 2);
  const int argmax = static_cast<int>(std::max_element(frame.begin(), frame.end()) - frame.begin());
  CHECK((argmax == below || argmax == below + 1));
}

TEST_CASE("silence gives the DCT of a flat log floor") {
  AudioBuffer s;
  s.sample_rate = 16000;
  s.samples.assign(4000, 0.0);
  MfccSpec spec;
  const FeatureSequence f = ExtractMfcc(s, FrameSpec{}, spec);
  REQUIRE(f.dim() == 32);
  const double c0 = std::log(kLogEnergyFloor) * std::sqrt(spec.n_mel_filters);
  for (std::size_t t = 0; t < f.size(); ++t) {
    CHECK(f.frame(t)[0] == doctest::Approx(c0).epsilon(1e-12));
    for (int k = 1; k < 32; ++k) CHECK(std::abs(f.frame(t)[k]) < 1e-9);
  }
}

TEST_CASE("MFCC extraction is deterministic and finite") {
  const AudioBuffer a = Noise(8000, 16000, 3), b = Noise(8000, 16000, 3);
  const FeatureSequence fa = ExtractMfcc(a, FrameSpec{}, MfccSpec{});
  CHECK(fa == ExtractMfcc(b, FrameSpec{}, MfccSpec{}));
  CHECK(fa.AllFinite());
  // 500 ms at 10 ms hop with 25 ms frames.
  CHECK(fa.size() == 1 + (8000 - 400) / 160);
  MfccSpec statics;
  statics.include_deltas = false;
  CHECK(ExtractMfcc(a, FrameSpec{}, statics).dim() == 16);
}

TEST_CASE("extraction rejects short or non-finite audio") {
  AudioBuffer a = Noise(100, 16000, 1);
  CHECK_THROWS_AS(ExtractMfcc(a, FrameSpec{}, MfccSpec{}), InvalidInput);
  a = Noise(1000, 16000, 1);
  a.samples[10] = NAN;
  CHECK_THROWS_AS(ExtractMfcc(a, FrameSpec{}, MfccSpec{}), InvalidInput);
  FrameSpec bad;
  bad.frame_hop_ms = 30.0;
  CHECK_THROWS_AS(ExtractMfcc(Noise(4000, 16000, 1), bad, MfccSpec{}), InvalidInput);
  MfccSpec too_many;
  too_many.n_static = 30;
  CHECK_THROWS_AS(ExtractMfcc(Noise(4000, 16000, 1), FrameSpec{}, too_many), InvalidInput);
}

TEST_CASE("regression deltas") {
  FeatureSequence flat(2);
  for (int t = 0; t < 6; ++t) flat.PushBack(std::vector<double>{3.0, -1.0});
  const FeatureSequence zero = ComputeDeltas(flat, 2);
  for (double v : zero.values()) CHECK(v == 0.0);

  FeatureSequence ramp(1);
  for (int t = 0; t < 10; ++t) ramp.PushBack(std::vector<double>{0.7 * t});
  const FeatureSequence d = ComputeDeltas(ramp, 2);
  for (int t = 2; t < 8; ++t) CHECK(d.frame(t)[0] == doctest::Approx(0.7).epsilon(1e-12));
  // Edge frame with replication: (1*(c1 - c0) + 2*(c2 - c0)) / 10.
  CHECK(d.frame(0)[0] == doctest::Approx((0.7 + 2 * 1.4) / 10.0));

  FeatureSequence one(3);
  one.PushBack(std::vector<double>{1.0, 2.0, 3.0});
  const FeatureSequence single = ComputeDeltas(one, 2);
  for (double v : single.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(ComputeDeltas(FeatureSequence(3), 2), InvalidInput);
}

TEST_CASE("prosody of a sawtooth and of silence") {
  const int rate = 16000;
  AudioBuffer a = Sawtooth(200.0, 1.0, rate);
  a.samples.resize(a.samples.size() + rate / 2, 0.0);  // 0.5 s of silence
  const auto v = ExtractProsody(a, {{0.1, 0.6}, {1.05, 1.45}});
  REQUIRE(v.size() == 2);
  CHECK(std::abs(v[0].f0_mean - 200.0) < 5.0);
  CHECK(v[0].voiced_fraction > 0.9);
  CHECK(v[0].duration == 0.6 - 0.1);
  CHECK(v[1].voiced_fraction == 0.0);
  CHECK(v[1].f0_mean == 0.0);
  CHECK(v[1].f0_std == 0.0);
  CHECK(v[1].f0_slope == 0.0);
  CHECK(v[1].duration == 1.45 - 1.05);
  for (const auto &p : v)
    for (double x : p.ToArray()) CHECK(std::isfinite(x));
  CHECK_THROWS_AS(ExtractProsody(a, {{0.5, 0.5}}), InvalidInput);
  CHECK_THROWS_AS(ExtractProsody(a, {{0.5, 0.2}}), InvalidInput);
}

TEST_CASE("frame pitch from the autocorrelation peak") {
  const AudioBuffer a = Sine(150.0, 0.05, 16000);
  const std::vector<double> frame(a.samples.begin(), a.samples.begin() + 640);
  CHECK(std::abs(EstimateFrameF0(frame, 16000) - 150.0) < 3.0);
  CHECK(EstimateFrameF0(std::vector<double>(640, 0.0), 16000) == 0.0);
}

TEST_CASE("WAV files round-trip at 16-bit precision") {
  const auto dir = TempDir("wav");
  AudioBuffer a = Sine(300.0, 0.1, 22050, 0.9);
  a.samples.push_back(1.5);  // clipped
  WriteWav((dir / "a.wav").string(), a);
  const AudioBuffer b = ReadWav((dir / "a.wav").string());
  CHECK(b.sample_rate == 22050);
  REQUIRE(b.samples.size() == a.samples.size());
  for (std::size_t i = 0; i + 1 < a.samples.size(); ++i) CHECK(std::abs(a.samples[i] - b.samples[i]) < 1.0 / 32767);
  CHECK(b.samples.back() <= 1.0);

  // Rewrite the channel count to 2: stereo is refused.
  std::fstream f(dir / "a.wav", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(22);
  const char two[2] = {2, 0};
  f.write(two, 2);
  f.close();
  CHECK_THROWS_AS(ReadWav((dir / "a.wav").string()), InvalidInput);
  std::ofstream(dir / "junk.wav") << "not a wav file";
  CHECK_THROWS_AS(ReadWav((dir / "junk.wav").string()), InvalidInput);
}

TEST_CASE("feature and prosody files round-trip") {
  const auto dir = TempDir("shf");
  FeatureSequence f(3);
  for (int t = 0; t < 4; ++t) f.PushBack(std::vector<double>{0.5 * t, -1.25, 3.0});
  WriteFeatureFile((dir / "f.shf").string(), f);
  const FeatureSequence g = ReadFeatureFile((dir / "f.shf").string());
  CHECK(g.dim() == 3);
  CHECK(g.values() == f.values());  // exactly representable in f32
  std::ifstream in(dir / "f.shf", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "SHF1");
  CHECK(std::filesystem::file_size(dir / "f.shf") == 12 + 4 * 12);

  ProsodyTrack p;
  p.hop_seconds = 0.01;
  p.f0 = {0.0, 120.5, 121.0};
  p.log_energy = {-3.0, -1.5, -1.25};
  WriteProsodyFile((dir / "p.shf").string(), p);
  const ProsodyTrack q = ReadProsodyFile((dir / "p.shf").string());
  CHECK(q.f0 == p.f0);
  CHECK(q.log_energy == p.log_energy);
  CHECK(q.hop_seconds == doctest::Approx(0.01).epsilon(1e-7));
  CHECK_THROWS_AS(ReadFeatureFile((dir / "none.shf").string()), InvalidInput);
}
