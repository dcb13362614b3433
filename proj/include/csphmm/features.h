// include/csphmm/features.h

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

#ifndef CSPHMM_FEATURES_H_
#define CSPHMM_FEATURES_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace csphmm {

/// Mono PCM audio, samples normalized to [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  double Duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

enum class WindowType { kHamming, kHann, kRectangular };

std::string ToString(WindowType w);
WindowType WindowTypeFromString(const std::string &name);

struct FrameSpec {
  double frame_length_ms = 25.0;
  double frame_hop_ms = 10.0;
  double preemphasis = 0.97;
  WindowType window = WindowType::kHamming;

  std::size_t FrameSamples(int sample_rate) const;
  std::size_t HopSamples(int sample_rate) const;
  /// Throws InvalidInput if the spec is unusable at this sample rate.
  void Validate(int sample_rate) const;
};

struct MfccSpec {
  int n_static = 16;
  int n_mel_filters = 26;
  /// 0 selects the next power of two >= the frame length in samples.
  int fft_size = 0;
  bool include_deltas = true;
  int delta_window = 2;

  int ResolvedFftSize(std::size_t frame_samples) const;
  int OutputDim() const { return include_deltas ? 2 * n_static : n_static; }
};

/// A T x D observation matrix stored row-major, plus per-frame timestamps.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  explicit FeatureSequence(std::size_t dim) : dim_(dim) {}
  FeatureSequence(std::size_t dim, std::vector<double> values,
                  std::vector<double> frame_times = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> frame(std::size_t t) const {
    return {values_.data() + t * dim_, dim_};
  }
  std::span<double> frame(std::size_t t) {
    return {values_.data() + t * dim_, dim_};
  }
  void PushBack(std::span<const double> v, double time = -1.0);

  const std::vector<double> &values() const { return values_; }
  const std::vector<double> &frame_times() const { return frame_times_; }
  bool AllFinite() const;

  bool operator==(const FeatureSequence &o) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<double> frame_times_;
};

/// Segment-level prosody summary; observation of the suprasegmental chain.
struct ProsodicVector {
  static constexpr std::size_t kDim = 7;

  double f0_mean = 0.0;
  double f0_std = 0.0;
  double f0_slope = 0.0;
  double energy_mean = 0.0;
  double energy_std = 0.0;
  double duration = 0.0;
  double voiced_fraction = 0.0;

  std::array<double, kDim> ToArray() const {
    return {f0_mean, f0_std, f0_slope, energy_mean,
            energy_std, duration, voiced_fraction};
  }
};

/// Per-frame pitch and energy contour. f0 is 0 on unvoiced frames.
/// Frame i of a track lines up with frame i of the MFCC sequence computed
/// with the same FrameSpec.
struct ProsodyTrack {
  double hop_seconds = 0.01;
  std::vector<double> f0;
  std::vector<double> log_energy;

  std::size_t size() const { return f0.size(); }
};

struct PitchConfig {
  double min_f0 = 60.0;
  double max_f0 = 400.0;
  /// Normalized autocorrelation peak needed to call a frame voiced.
  double voicing_threshold = 0.45;
  /// Frames whose RMS is below this are unvoiced regardless of periodicity.
  double min_rms = 1e-4;
};

AudioBuffer Preemphasize(const AudioBuffer &audio, double coeff);

/// Window coefficients of the given length.
std::vector<double> MakeWindow(WindowType type, std::size_t length);

double HzToMel(double hz);
double MelToHz(double mel);

/// Triangular mel filterbank over the one-sided spectrum of an fft_size FFT.
class MelFilterbank {
 public:
  MelFilterbank(int n_filters, int fft_size, int sample_rate,
                double low_hz = 0.0, double high_hz = -1.0);

  int num_filters() const { return static_cast<int>(centers_hz_.size()); }
  int num_bins() const { return fft_size_ / 2 + 1; }
  /// Weight of FFT bin `bin` in filter `m`.
  double weight(int m, int bin) const { return weights_[m * num_bins() + bin]; }
  const std::vector<double> &centers_hz() const { return centers_hz_; }
  std::vector<double> Apply(std::span<const double> power_spectrum) const;

 private:
  int fft_size_;
  std::vector<double> centers_hz_;
  std::vector<double> weights_;
};

/// Orthonormal DCT-II basis, n_out x n_in, row-major.
std::vector<double> DctMatrix(int n_out, int n_in);

/// Floor applied to filterbank energies before the log.
inline constexpr double kLogEnergyFloor = 1e-10;

/// Log mel-filterbank energies, one row per frame (intermediate of MFCC).
FeatureSequence LogMelEnergies(const AudioBuffer &audio, const FrameSpec &frames,
                               const MfccSpec &spec);

FeatureSequence ExtractMfcc(const AudioBuffer &audio, const FrameSpec &frames,
                            const MfccSpec &spec);

/// Regression deltas with edge-frame replication.
FeatureSequence ComputeDeltas(const FeatureSequence &seq, int window);

ProsodyTrack ComputeProsodyTrack(const AudioBuffer &audio,
                                 const FrameSpec &frames,
                                 const PitchConfig &pitch = {});

/// Autocorrelation pitch of one frame; 0 when unvoiced.
double EstimateFrameF0(std::span<const double> frame, int sample_rate,
                       const PitchConfig &pitch = {});

/// Summary over frames [first, last] (inclusive) of a track.
ProsodicVector SummarizeProsody(const ProsodyTrack &track, std::size_t first,
                                std::size_t last);

/// One ProsodicVector per (start, end) segment in seconds.
std::vector<ProsodicVector> ExtractProsody(
    const AudioBuffer &audio,
    const std::vector<std::pair<double, double>> &segments,
    const FrameSpec &frames = {}, const PitchConfig &pitch = {});

}  // namespace csphmm

#endif  // CSPHMM_FEATURES_H_
