// include/csphmm/corpus.h

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

#ifndef CSPHMM_CORPUS_H_
#define CSPHMM_CORPUS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csphmm/features.h"
#include "csphmm/hmm_model.h"

namespace csphmm {

/// Emotion tags in the order used for reports.
const std::vector<std::string> &DefaultEmotions();

struct UtteranceRecord {
  std::string speaker_id;
  std::string gender;
  int sentence_id = 1;
  int repetition = 1;
  std::string emotion = "neutral";
  std::string audio_path;
  std::string feature_path;
  std::string prosody_path;

  /// "speaker/emotion/s<sentence>_r<repetition>".
  std::string Key() const;
  bool operator==(const UtteranceRecord &) const = default;
};

/// JSON-lines; blank lines are skipped. Errors cite the line number.
std::vector<UtteranceRecord> LoadManifest(const std::string &path);
void WriteManifest(const std::string &path, std::span<const UtteranceRecord> records);
std::string ToJsonLine(const UtteranceRecord &record);
/// Throws InvalidInput naming the first repeated key.
void CheckUniqueKeys(std::span<const UtteranceRecord> records);

struct SplitConfig {
  int num_sentences = 8;
  std::string enroll_emotion = "neutral";
  bool enroll_all_emotions = false;
};

/// Sentences 1..S/2 enroll (one emotion unless enroll_all_emotions); sentences
/// S/2+1..S are tested under every emotion. Early-sentence utterances in
/// other emotions land in `unused`, so the three sides partition the input.
struct CorpusSplit {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> test;
  std::vector<UtteranceRecord> unused;
};

/// Throws InvalidInput listing the sentence ids in 1..S that never occur, or
/// naming a record whose sentence id is out of range.
CorpusSplit SplitTrainTest(std::span<const UtteranceRecord> records, const SplitConfig &config = {});

/// How one emotion moves a speaker away from neutral speech.
struct EmotionShift {
  /// Added to every emission mean, N x D row-major; empty means zero.
  std::vector<double> mean_offset;
  /// Multiplies every emission variance.
  double variance_scale = 1.0;
  double f0_scale = 1.0;
  double energy_offset = 0.0;
};

struct SyntheticSpeakerSpec {
  std::string id;
  std::string gender;
  std::uint64_t seed = 0;
  /// Order-1 generator for neutral speech.
  HmmModel base;
  double f0_center = 120.0;
  double energy_level = 0.0;
  /// Per-state multiplier of the F0 center and additive energy offset.
  std::vector<double> state_f0_ratio;
  std::vector<double> state_energy;
  double voicing_prob = 0.9;
  /// Emotions without an entry are generated as neutral.
  std::map<std::string, EmotionShift> shifts;
};

struct SynthConfig {
  int num_sentences = 8;
  int repetitions = 9;
  std::vector<std::string> emotions = DefaultEmotions();
  std::uint64_t seed = 1;
  int min_frames = 40;
  int max_frames = 60;
  /// Per-sentence offset added to emission means (shared by all speakers).
  double sentence_offset_sd = 0.3;
  double hop_seconds = 0.01;
  double f0_jitter = 0.05;
  double energy_noise = 0.2;
  bool render_audio = false;
  int sample_rate = 16000;
};

struct SyntheticUtterance {
  UtteranceRecord record;
  FeatureSequence features;
  ProsodyTrack prosody;
  std::vector<int> states;
  std::optional<AudioBuffer> audio;
};

/// One utterance per (speaker, sentence, repetition, emotion), in that
/// nesting order with emotion innermost. Pure in (specs, config).
std::vector<SyntheticUtterance> SynthesizeCorpus(std::span<const SyntheticSpeakerSpec> specs,
                                                 const SynthConfig &config);

struct PopulationConfig {
  /// The first ceil(n / 2) speakers are tagged "female", the rest "male".
  int num_speakers = 30;
  int num_states = 6;
  int dim = 16;
  std::uint64_t seed = 1;
  double self_loop = 0.8;
  /// Spread of phonetic state means shared by the population.
  double state_mean_sd = 2.0;
  /// Spread of each speaker's deviation from the population means.
  double speaker_sd = 0.15;
  double emission_sd = 1.0;
  /// Log-scale spread of speakers' F0 centers within a gender, and of the
  /// per-state F0 ratios within a speaker.
  double f0_speaker_sd = 0.1;
  double f0_state_sd = 0.06;
  double energy_speaker_sd = 0.3;
  double energy_state_sd = 0.3;
  /// Severity per emotion; 0 leaves the emotion identical to neutral.
  std::map<std::string, double> severity = {{"neutral", 0.0}, {"happy", 0.85}, {"fear", 0.9},
                                            {"sad", 1.1},     {"disgust", 1.2}, {"angry", 1.9}};
  /// Mean offset per unit severity: shared emotion direction and a
  /// speaker-specific part.
  double shared_shift = 0.6;
  double speaker_shift = 1.5;
  /// Variance scale = 1 + variance_gain * severity.
  double variance_gain = 1.0;
  /// F0 scale = 1 + f0_gain * severity * direction, plus speaker spread.
  double f0_gain = 0.1;
  double f0_speaker_spread = 0.06;
  double energy_gain = 0.15;
};

/// Speakers spk01, spk02, ... split into two gender groups.
std::vector<SyntheticSpeakerSpec> DefaultPopulation(const PopulationConfig &config = {});

/// Harmonic source following the track's F0 and energy; unvoiced frames
/// carry low-level noise.
AudioBuffer RenderAudio(const ProsodyTrack &track, int sample_rate, std::uint64_t seed);

/// One claimed identity per test utterance. The first `claimants_per_gender`
/// speakers of each gender (by id) are claimants and claim themselves; every
/// other speaker claims a claimant of its own gender drawn from `seed`.
struct TrialAssignment {
  std::size_t record_index;
  std::string claimed_id;
};
std::vector<TrialAssignment> AssignClaims(std::span<const UtteranceRecord> test,
                                          int claimants_per_gender, std::uint64_t seed);

/// Mixes values into a well-spread 64-bit seed.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);
/// FNV-1a; unlike std::hash it is the same on every platform.
std::uint64_t StableHash(const std::string &s);

}  // namespace csphmm

#endif  // CSPHMM_CORPUS_H_
