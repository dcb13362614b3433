// src/features/features.cc

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

#include "csphmm/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "csphmm/error.h"

namespace csphmm {

namespace {

// The FFTW planner is not re-entrant; execution on a private plan is.
std::mutex &FftwPlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  // Zero-pads `frame` to n and returns |X_k|^2 for k = 0..n/2.
  void PowerSpectrum(std::span<const double> frame, std::vector<double> *out) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    out->resize(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k)
      (*out)[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  int n_;
  double *in_;
  fftw_complex *out_;
  fftw_plan plan_;
};

void CheckAudio(const AudioBuffer &audio) {
  if (audio.samples.empty())
    throw InvalidInput("audio buffer is empty");
  if (audio.sample_rate <= 0)
    throw InvalidInput("sample rate must be positive");
  for (double s : audio.samples)
    if (!std::isfinite(s)) throw InvalidInput("audio contains non-finite samples");
}

std::size_t NumFrames(std::size_t n, std::size_t len, std::size_t hop) {
  if (n < len) return 0;
  return 1 + (n - len) / hop;
}

}  // namespace

std::string ToString(WindowType w) {
  switch (w) {
    case WindowType::kHamming: return "hamming";
    case WindowType::kHann: return "hann";
    case WindowType::kRectangular: return "rectangular";
  }
  return "hamming";
}

WindowType WindowTypeFromString(const std::string &name) {
  if (name == "hamming") return WindowType::kHamming;
  if (name == "hann") return WindowType::kHann;
  if (name == "rectangular") return WindowType::kRectangular;
  throw InvalidInput("unknown window type: " + name);
}

std::size_t FrameSpec::FrameSamples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length_ms * 1e-3 * sample_rate));
}

std::size_t FrameSpec::HopSamples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_hop_ms * 1e-3 * sample_rate));
}

void FrameSpec::Validate(int sample_rate) const {
  if (sample_rate <= 0) throw InvalidInput("sample rate must be positive");
  if (!(frame_hop_ms > 0.0) || frame_hop_ms > frame_length_ms)
    throw InvalidInput("frame hop must be positive and not exceed frame length");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0))
    throw InvalidInput("pre-emphasis coefficient must lie in [0, 1)");
  if (FrameSamples(sample_rate) < 2)
    throw InvalidInput("frame must span at least two samples");
  if (HopSamples(sample_rate) < 1)
    throw InvalidInput("frame hop must span at least one sample");
}

int MfccSpec::ResolvedFftSize(std::size_t frame_samples) const {
  if (fft_size > 0) {
    if ((fft_size & (fft_size - 1)) != 0)
      throw InvalidInput("fft_size must be a power of two");
    if (static_cast<std::size_t>(fft_size) < frame_samples)
      throw InvalidInput("fft_size is smaller than the frame length");
    return fft_size;
  }
  int n = 1;
  while (static_cast<std::size_t>(n) < frame_samples) n <<= 1;
  return n;
}

FeatureSequence::FeatureSequence(std::size_t dim, std::vector<double> values,
                                 std::vector<double> frame_times)
    : dim_(dim), values_(std::move(values)), frame_times_(std::move(frame_times)) {
  if (dim_ == 0 && !values_.empty())
    throw InvalidInput("feature dimension must be positive");
  if (dim_ != 0 && values_.size() % dim_ != 0)
    throw InvalidInput("feature values are not a whole number of frames");
  if (!frame_times_.empty() && frame_times_.size() != size())
    throw InvalidInput("frame_times length differs from frame count");
}

void FeatureSequence::PushBack(std::span<const double> v, double time) {
  if (v.size() != dim_)
    throw InvalidInput("frame dimension mismatch in FeatureSequence::PushBack");
  values_.insert(values_.end(), v.begin(), v.end());
  if (time >= 0.0) frame_times_.push_back(time);
}

bool FeatureSequence::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

AudioBuffer Preemphasize(const AudioBuffer &audio, double coeff) {
  if (audio.samples.empty()) throw InvalidInput("audio buffer is empty");
  if (!(coeff >= 0.0 && coeff < 1.0))
    throw InvalidInput("pre-emphasis coefficient must lie in [0, 1)");
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.resize(audio.samples.size());
  out.samples[0] = audio.samples[0];
  for (std::size_t n = 1; n < audio.samples.size(); ++n)
    out.samples[n] = audio.samples[n] - coeff * audio.samples[n - 1];
  return out;
}

std::vector<double> MakeWindow(WindowType type, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    const double phase = 2.0 * std::numbers::pi * n / denom;
    switch (type) {
      case WindowType::kHamming: w[n] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowType::kHann: w[n] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowType::kRectangular: break;
    }
  }
  return w;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int n_filters, int fft_size, int sample_rate,
                             double low_hz, double high_hz)
    : fft_size_(fft_size) {
  if (n_filters < 1) throw InvalidInput("need at least one mel filter");
  if (fft_size < 2) throw InvalidInput("fft_size too small");
  if (high_hz <= 0.0) high_hz = 0.5 * sample_rate;
  if (!(low_hz >= 0.0 && low_hz < high_hz))
    throw InvalidInput("mel filterbank frequency range is empty");

  const double mel_lo = HzToMel(low_hz), mel_hi = HzToMel(high_hz);
  std::vector<double> edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i)
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_filters + 1));

  const int bins = num_bins();
  weights_.assign(static_cast<std::size_t>(n_filters) * bins, 0.0);
  centers_hz_.resize(n_filters);
  for (int m = 0; m < n_filters; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    centers_hz_[m] = center;
    double row_sum = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > left && f <= center) w = (f - left) / (center - left);
      else if (f > center && f < right) w = (right - f) / (right - center);
      weights_[m * bins + k] = w;
      row_sum += w;
    }
    if (!(row_sum > 0.0))
      throw InvalidInput("mel filter " + std::to_string(m) +
                         " covers no FFT bin; increase fft_size or reduce filters");
  }
}

std::vector<double> MelFilterbank::Apply(std::span<const double> power) const {
  const int bins = num_bins();
  std::vector<double> out(centers_hz_.size(), 0.0);
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double *row = &weights_[m * bins];
    double acc = 0.0;
    for (int k = 0; k < bins; ++k) acc += row[k] * power[k];
    out[m] = acc;
  }
  return out;
}

std::vector<double> DctMatrix(int n_out, int n_in) {
  std::vector<double> m(static_cast<std::size_t>(n_out) * n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n_in) : std::sqrt(2.0 / n_in);
    for (int n = 0; n < n_in; ++n)
      m[k * n_in + n] =
          scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
  }
  return m;
}

FeatureSequence LogMelEnergies(const AudioBuffer &audio, const FrameSpec &frames,
                               const MfccSpec &spec) {
  CheckAudio(audio);
  frames.Validate(audio.sample_rate);
  const std::size_t len = frames.FrameSamples(audio.sample_rate);
  const std::size_t hop = frames.HopSamples(audio.sample_rate);
  const std::size_t n_frames = NumFrames(audio.samples.size(), len, hop);
  if (n_frames == 0) throw InvalidInput("audio is shorter than one frame");

  const int fft_size = spec.ResolvedFftSize(len);
  MelFilterbank fbank(spec.n_mel_filters, fft_size, audio.sample_rate);
  const AudioBuffer emph = Preemphasize(audio, frames.preemphasis);
  const std::vector<double> window = MakeWindow(frames.window, len);

  RealFft fft(fft_size);
  FeatureSequence out(spec.n_mel_filters);
  std::vector<double> buf(len), power;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t n = 0; n < len; ++n)
      buf[n] = emph.samples[start + n] * window[n];
    fft.PowerSpectrum(buf, &power);
    std::vector<double> energies = fbank.Apply(power);
    for (double &e : energies) e = std::log(std::max(e, kLogEnergyFloor));
    out.PushBack(energies, (start + 0.5 * len) / audio.sample_rate);
  }
  return out;
}

FeatureSequence ExtractMfcc(const AudioBuffer &audio, const FrameSpec &frames,
                            const MfccSpec &spec) {
  if (spec.n_static < 1 || spec.n_static > spec.n_mel_filters)
    throw InvalidInput("n_static must lie in [1, n_mel_filters]");
  const FeatureSequence logmel = LogMelEnergies(audio, frames, spec);
  const int n_mel = spec.n_mel_filters;
  const std::vector<double> dct = DctMatrix(spec.n_static, n_mel);

  FeatureSequence cep(spec.n_static);
  std::vector<double> c(spec.n_static);
  for (std::size_t t = 0; t < logmel.size(); ++t) {
    auto e = logmel.frame(t);
    for (int k = 0; k < spec.n_static; ++k) {
      double acc = 0.0;
      for (int n = 0; n < n_mel; ++n) acc += dct[k * n_mel + n] * e[n];
      c[k] = acc;
    }
    cep.PushBack(c, logmel.frame_times()[t]);
  }
  if (!spec.include_deltas) return cep;

  const FeatureSequence delta = ComputeDeltas(cep, spec.delta_window);
  FeatureSequence out(2 * spec.n_static);
  std::vector<double> row(2 * spec.n_static);
  for (std::size_t t = 0; t < cep.size(); ++t) {
    std::copy_n(cep.frame(t).begin(), spec.n_static, row.begin());
    std::copy_n(delta.frame(t).begin(), spec.n_static, row.begin() + spec.n_static);
    out.PushBack(row, cep.frame_times()[t]);
  }
  return out;
}

FeatureSequence ComputeDeltas(const FeatureSequence &seq, int window) {
  if (seq.empty()) throw InvalidInput("cannot compute deltas of an empty sequence");
  if (window < 1) throw InvalidInput("delta window must be >= 1");
  const std::size_t T = seq.size(), D = seq.dim();
  double norm = 0.0;
  for (int w = 1; w <= window; ++w) norm += static_cast<double>(w) * w;
  norm *= 2.0;

  const auto clamp = [T](long t) {
    return static_cast<std::size_t>(std::clamp<long>(t, 0, static_cast<long>(T) - 1));
  };
  FeatureSequence out(D);
  std::vector<double> d(D);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(d.begin(), d.end(), 0.0);
    for (int w = 1; w <= window; ++w) {
      auto fwd = seq.frame(clamp(static_cast<long>(t) + w));
      auto bwd = seq.frame(clamp(static_cast<long>(t) - w));
      for (std::size_t i = 0; i < D; ++i) d[i] += w * (fwd[i] - bwd[i]);
    }
    for (double &x : d) x /= norm;
    out.PushBack(d, seq.frame_times().empty() ? -1.0 : seq.frame_times()[t]);
  }
  return out;
}

double EstimateFrameF0(std::span<const double> frame, int sample_rate,
                       const PitchConfig &pitch) {
  const std::size_t n = frame.size();
  if (n < 4) return 0.0;
  double mean = 0.0;
  for (double x : frame) mean += x;
  mean /= n;
  std::vector<double> x(n);
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = frame[i] - mean;
    energy += x[i] * x[i];
  }
  if (std::sqrt(energy / n) < pitch.min_rms) return 0.0;

  const std::size_t min_lag =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sample_rate / pitch.max_f0)));
  const std::size_t max_lag =
      std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::ceil(sample_rate / pitch.min_f0)));
  if (min_lag + 2 > max_lag) return 0.0;

  // Normalized cross-correlation between x[0..n-lag) and x[lag..n).
  std::vector<double> nccf(max_lag + 2, 0.0);
  for (std::size_t lag = min_lag - 1; lag <= max_lag + 1 && lag < n; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      xy += x[i] * x[i + lag];
      xx += x[i] * x[i];
      yy += x[i + lag] * x[i + lag];
    }
    nccf[lag] = (xx > 0.0 && yy > 0.0) ? xy / std::sqrt(xx * yy) : 0.0;
  }
  double best = -1.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, nccf[lag]);
  if (best < pitch.voicing_threshold) return 0.0;

  // First local peak close to the global maximum; avoids sub-harmonic picks.
  std::size_t peak = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (nccf[lag] >= 0.9 * best && nccf[lag] >= nccf[lag - 1] &&
        nccf[lag] >= nccf[lag + 1]) {
      peak = lag;
      break;
    }
  }
  if (peak == 0) return 0.0;
  double offset = 0.0;
  const double a = nccf[peak - 1], b = nccf[peak], c = nccf[peak + 1];
  const double denom = a - 2.0 * b + c;
  if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  return sample_rate / (static_cast<double>(peak) + offset);
}

ProsodyTrack ComputeProsodyTrack(const AudioBuffer &audio, const FrameSpec &frames,
                                 const PitchConfig &pitch) {
  CheckAudio(audio);
  frames.Validate(audio.sample_rate);
  const std::size_t len = frames.FrameSamples(audio.sample_rate);
  const std::size_t hop = frames.HopSamples(audio.sample_rate);
  std::size_t n_frames = NumFrames(audio.samples.size(), len, hop);
  std::size_t frame_len = len;
  if (n_frames == 0) {
    // Short input: analyse it as a single frame.
    n_frames = 1;
    frame_len = audio.samples.size();
  }
  ProsodyTrack track;
  track.hop_seconds = frames.frame_hop_ms * 1e-3;
  track.f0.resize(n_frames);
  track.log_energy.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::span<const double> frame(audio.samples.data() + f * hop, frame_len);
    double sq = 0.0;
    for (double s : frame) sq += s * s;
    const double rms = std::sqrt(sq / frame_len);
    track.log_energy[f] = std::log(std::max(rms, kLogEnergyFloor));
    track.f0[f] = EstimateFrameF0(frame, audio.sample_rate, pitch);
  }
  return track;
}

ProsodicVector SummarizeProsody(const ProsodyTrack &track, std::size_t first,
                                std::size_t last) {
  if (first > last || last >= track.size())
    throw InvalidInput("prosody summary range is outside the track");
  ProsodicVector v;
  const std::size_t n = last - first + 1;
  v.duration = n * track.hop_seconds;

  double e_sum = 0.0;
  for (std::size_t t = first; t <= last; ++t) e_sum += track.log_energy[t];
  v.energy_mean = e_sum / n;
  double e_var = 0.0;
  for (std::size_t t = first; t <= last; ++t) {
    const double d = track.log_energy[t] - v.energy_mean;
    e_var += d * d;
  }
  v.energy_std = std::sqrt(e_var / n);

  std::size_t voiced = 0;
  double f_sum = 0.0, t_sum = 0.0;
  for (std::size_t t = first; t <= last; ++t) {
    if (track.f0[t] > 0.0) {
      ++voiced;
      f_sum += track.f0[t];
      t_sum += static_cast<double>(t - first) * track.hop_seconds;
    }
  }
  v.voiced_fraction = static_cast<double>(voiced) / n;
  if (voiced == 0) return v;

  v.f0_mean = f_sum / voiced;
  const double t_mean = t_sum / voiced;
  double f_var = 0.0, cov = 0.0, t_var = 0.0;
  for (std::size_t t = first; t <= last; ++t) {
    if (track.f0[t] <= 0.0) continue;
    const double df = track.f0[t] - v.f0_mean;
    const double dt = static_cast<double>(t - first) * track.hop_seconds - t_mean;
    f_var += df * df;
    cov += df * dt;
    t_var += dt * dt;
  }
  v.f0_std = std::sqrt(f_var / voiced);
  v.f0_slope = t_var > 0.0 ? cov / t_var : 0.0;
  return v;
}

std::vector<ProsodicVector> ExtractProsody(
    const AudioBuffer &audio, const std::vector<std::pair<double, double>> &segments,
    const FrameSpec &frames, const PitchConfig &pitch) {
  CheckAudio(audio);
  const double total = audio.Duration();
  const double eps = 0.5 / audio.sample_rate;
  std::vector<ProsodicVector> out;
  out.reserve(segments.size());
  double prev_end = -1.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto [start, end] = segments[i];
    if (!(end > start))
      throw InvalidInput("segment " + std::to_string(i) + " has end <= start");
    if (start < 0.0 || end > total + eps)
      throw InvalidInput("segment " + std::to_string(i) + " lies outside the audio");
    if (start < prev_end - eps)
      throw InvalidInput("segment " + std::to_string(i) + " overlaps its predecessor");
    prev_end = end;

    const auto first = static_cast<std::size_t>(std::lround(start * audio.sample_rate));
    auto last = static_cast<std::size_t>(std::lround(end * audio.sample_rate));
    last = std::min(last, audio.samples.size());
    AudioBuffer slice;
    slice.sample_rate = audio.sample_rate;
    slice.samples.assign(audio.samples.begin() + first,
                         audio.samples.begin() + std::max(last, first + 1));
    const ProsodyTrack track = ComputeProsodyTrack(slice, frames, pitch);
    ProsodicVector v = SummarizeProsody(track, 0, track.size() - 1);
    v.duration = end - start;
    out.push_back(v);
  }
  return out;
}

}  // namespace csphmm
