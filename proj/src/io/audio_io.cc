// src/io/audio_io.cc

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

#include "csphmm/audio_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "csphmm/error.h"
#include "io/binary_stream.h"

namespace csphmm {

using io::GetLe;
using io::GetU32;
using io::PutLe;
using io::PutU32;

AudioBuffer ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput(path + ": cannot open WAV file");
  char tag[4];
  if (!is.read(tag, 4) || std::string(tag, 4) != "RIFF")
    throw InvalidInput(path + ": not a RIFF file");
  GetU32(is, path);
  if (!is.read(tag, 4) || std::string(tag, 4) != "WAVE")
    throw InvalidInput(path + ": not a WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (is.read(tag, 4)) {
    const std::string id(tag, 4);
    const std::uint32_t size = GetU32(is, path);
    if (id == "fmt ") {
      const auto format = GetLe<std::uint16_t>(is, path);
      channels = GetLe<std::uint16_t>(is, path);
      rate = GetU32(is, path);
      GetU32(is, path);                  // byte rate
      GetLe<std::uint16_t>(is, path);    // block align
      bits = GetLe<std::uint16_t>(is, path);
      if (size > 16) is.ignore(size - 16 + (size & 1));
      if (format != 1)
        throw InvalidInput(path + ": only PCM WAV is supported (format " +
                           std::to_string(format) + ")");
      if (channels != 1)
        throw InvalidInput(path + ": expected mono audio, found " +
                           std::to_string(channels) + " channels");
      if (bits != 16)
        throw InvalidInput(path + ": expected 16-bit samples, found " +
                           std::to_string(bits) + "-bit");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InvalidInput(path + ": data chunk before fmt chunk");
      AudioBuffer audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(size / 2);
      for (auto &s : audio.samples)
        s = static_cast<std::int16_t>(GetLe<std::uint16_t>(is, path)) / 32768.0;
      if (audio.samples.empty()) throw InvalidInput(path + ": WAV has no samples");
      return audio;
    } else {
      is.ignore(size + (size & 1));
    }
  }
  throw InvalidInput(path + ": no data chunk");
}

void WriteWav(const std::string &path, const AudioBuffer &audio) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  os.write("RIFF", 4);
  PutU32(os, 36 + 2 * n);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutLe<std::uint16_t>(os, 1);
  PutLe<std::uint16_t>(os, 1);
  PutU32(os, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(os, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  PutLe<std::uint16_t>(os, 2);
  PutLe<std::uint16_t>(os, 16);
  os.write("data", 4);
  PutU32(os, 2 * n);
  for (double s : audio.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(std::min(c * 32768.0, 32767.0)));
    PutLe<std::uint16_t>(os, static_cast<std::uint16_t>(q));
  }
  if (!os) throw InvalidInput(path + ": write failed");
}

void WriteFeatureFile(const std::string &path, const FeatureSequence &seq) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  os.write("SHF1", 4);
  PutU32(os, static_cast<std::uint32_t>(seq.size()));
  PutU32(os, static_cast<std::uint32_t>(seq.dim()));
  for (double v : seq.values()) io::PutF32(os, static_cast<float>(v));
  if (!os) throw InvalidInput(path + ": write failed");
}

FeatureSequence ReadFeatureFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput(path + ": cannot open feature file");
  io::ExpectMagic(is, "SHF1", path);
  const std::uint32_t frames = GetU32(is, path);
  const std::uint32_t dim = GetU32(is, path);
  if (dim == 0 && frames != 0) throw InvalidInput(path + ": zero dimension");
  std::vector<double> values(static_cast<std::size_t>(frames) * dim);
  for (auto &v : values) v = io::GetF32(is, path);
  return FeatureSequence(dim, std::move(values));
}

void WriteFeatureSidecar(const std::string &path, const FrameSpec &frames,
                         const MfccSpec &spec, int sample_rate) {
  std::ofstream os(path);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  os << "[frames]\n"
     << "frame_length_ms = " << frames.frame_length_ms << "\n"
     << "frame_hop_ms = " << frames.frame_hop_ms << "\n"
     << "preemphasis = " << frames.preemphasis << "\n"
     << "window = " << ToString(frames.window) << "\n"
     << "[mfcc]\n"
     << "n_static = " << spec.n_static << "\n"
     << "n_mel_filters = " << spec.n_mel_filters << "\n"
     << "fft_size = " << spec.ResolvedFftSize(frames.FrameSamples(sample_rate)) << "\n"
     << "include_deltas = " << (spec.include_deltas ? "true" : "false") << "\n"
     << "delta_window = " << spec.delta_window << "\n"
     << "sample_rate = " << sample_rate << "\n";
}

void WriteProsodyFile(const std::string &path, const ProsodyTrack &track) {
  std::vector<double> values;
  values.reserve(2 * (track.size() + 1));
  values.push_back(track.hop_seconds);
  values.push_back(0.0);
  for (std::size_t t = 0; t < track.size(); ++t) {
    values.push_back(track.f0[t]);
    values.push_back(track.log_energy[t]);
  }
  WriteFeatureFile(path, FeatureSequence(2, std::move(values)));
}

ProsodyTrack ReadProsodyFile(const std::string &path) {
  const FeatureSequence seq = ReadFeatureFile(path);
  if (seq.dim() != 2 || seq.size() < 1)
    throw InvalidInput(path + ": not a prosody track file");
  ProsodyTrack track;
  track.hop_seconds = seq.frame(0)[0];
  for (std::size_t t = 1; t < seq.size(); ++t) {
    track.f0.push_back(seq.frame(t)[0]);
    track.log_energy.push_back(seq.frame(t)[1]);
  }
  return track;
}

}  // namespace csphmm
