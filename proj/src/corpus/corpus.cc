// src/corpus/corpus.cc

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

#include "csphmm/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csphmm/error.h"
#include "csphmm/hmm_scoring.h"

namespace csphmm {

const std::vector<std::string> &DefaultEmotions() {
  static const std::vector<std::string> kEmotions = {"neutral", "happy", "sad",
                                                     "disgust", "angry", "fear"};
  return kEmotions;
}

std::string UtteranceRecord::Key() const {
  return speaker_id + "/" + emotion + "/s" + std::to_string(sentence_id) + "_r" +
         std::to_string(repetition);
}

std::string ToJsonLine(const UtteranceRecord &r) {
  nlohmann::ordered_json j;
  j["speaker_id"] = r.speaker_id;
  j["gender"] = r.gender;
  j["sentence_id"] = r.sentence_id;
  j["repetition"] = r.repetition;
  j["emotion"] = r.emotion;
  if (!r.audio_path.empty()) j["audio_path"] = r.audio_path;
  if (!r.feature_path.empty()) j["feature_path"] = r.feature_path;
  if (!r.prosody_path.empty()) j["prosody_path"] = r.prosody_path;
  return j.dump();
}

void CheckUniqueKeys(std::span<const UtteranceRecord> records) {
  std::set<std::string> seen;
  for (const auto &r : records)
    if (!seen.insert(r.Key()).second) throw InvalidInput("duplicate utterance " + r.Key());
}

namespace {

template <typename T>
T Required(const nlohmann::json &j, const char *key, const std::string &where) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(where + "missing " + key);
  return it->get<T>();
}

}  // namespace

std::vector<UtteranceRecord> LoadManifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput(path + ": cannot open manifest");
  std::vector<UtteranceRecord> out;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  for (std::size_t line_no = 1; std::getline(is, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    UtteranceRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw InvalidInput(where + "expected a JSON object");
      r.speaker_id = Required<std::string>(j, "speaker_id", where);
      r.gender = j.value("gender", std::string());
      r.sentence_id = Required<int>(j, "sentence_id", where);
      r.repetition = Required<int>(j, "repetition", where);
      r.emotion = Required<std::string>(j, "emotion", where);
      r.audio_path = j.value("audio_path", std::string());
      r.feature_path = j.value("feature_path", std::string());
      r.prosody_path = j.value("prosody_path", std::string());
    } catch (const nlohmann::json::exception &e) {
      throw InvalidInput(where + e.what());
    }
    if (r.speaker_id.empty()) throw InvalidInput(where + "empty speaker_id");
    if (r.sentence_id < 1 || r.repetition < 1)
      throw InvalidInput(where + "sentence_id and repetition start at 1");
    auto [it, fresh] = first_line.emplace(r.Key(), line_no);
    if (!fresh)
      throw InvalidInput(where + "duplicate utterance " + r.Key() + " (first seen on line " +
                         std::to_string(it->second) + ")");
    out.push_back(std::move(r));
  }
  return out;
}

void WriteManifest(const std::string &path, std::span<const UtteranceRecord> records) {
  CheckUniqueKeys(records);
  std::ofstream os(path);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  for (const auto &r : records) os << ToJsonLine(r) << "\n";
}

CorpusSplit SplitTrainTest(std::span<const UtteranceRecord> records, const SplitConfig &config) {
  if (config.num_sentences < 2) throw InvalidInput("need at least two sentences to split");
  CheckUniqueKeys(records);
  std::vector<bool> present(config.num_sentences + 1, false);
  for (const auto &r : records) {
    if (r.sentence_id < 1 || r.sentence_id > config.num_sentences)
      throw InvalidInput(r.Key() + ": sentence id outside 1.." + std::to_string(config.num_sentences));
    present[r.sentence_id] = true;
  }
  if (!records.empty()) {
    std::string gaps;
    for (int s = 1; s <= config.num_sentences; ++s)
      if (!present[s]) gaps += (gaps.empty() ? "" : ", ") + std::to_string(s);
    if (!gaps.empty()) throw InvalidInput("missing sentence ids: " + gaps);
  }
  const int half = config.num_sentences / 2;
  CorpusSplit split;
  for (const auto &r : records) {
    if (r.sentence_id > half) split.test.push_back(r);
    else if (config.enroll_all_emotions || r.emotion == config.enroll_emotion) split.train.push_back(r);
    else split.unused.push_back(r);
  }
  return split;
}

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t StableHash(const std::string &s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

namespace {

HmmModel EmotionModel(const SyntheticSpeakerSpec &spec, const EmotionShift *shift,
                      std::span<const double> sentence_offset) {
  HmmModel m = spec.base;
  const int N = m.num_states(), D = m.dim();
  for (int q = 0; q < N; ++q) {
    GaussianMixture &g = m.emissions.states[q];
    for (int k = 0; k < g.num_components(); ++k)
      for (int d = 0; d < D; ++d) {
        double off = sentence_offset.empty() ? 0.0 : sentence_offset[q * D + d];
        if (shift && !shift->mean_offset.empty()) off += shift->mean_offset[q * D + d];
        g.means[k * D + d] += off;
        if (shift) g.variances[k * D + d] *= shift->variance_scale;
      }
  }
  return m;
}

void ValidateSpec(const SyntheticSpeakerSpec &s) {
  s.base.Validate();
  if (s.base.order != 1) throw InvalidInput(s.id + ": generator must be first order");
  const std::size_t N = s.base.num_states(), D = s.base.dim();
  if (s.state_f0_ratio.size() != N || s.state_energy.size() != N)
    throw InvalidInput(s.id + ": per-state prosody patterns need one entry per state");
  if (!(s.f0_center > 0.0)) throw InvalidInput(s.id + ": F0 center must be positive");
  for (const auto &[emotion, sh] : s.shifts) {
    if (!(sh.variance_scale > 0.0) || !(sh.f0_scale > 0.0))
      throw InvalidInput(s.id + "/" + emotion + ": scales must be positive");
    if (!sh.mean_offset.empty() && sh.mean_offset.size() != N * D)
      throw InvalidInput(s.id + "/" + emotion + ": mean offset must be N x D");
  }
}

}  // namespace

AudioBuffer RenderAudio(const ProsodyTrack &track, int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0) throw InvalidInput("sample rate must be positive");
  const std::size_t hop = static_cast<std::size_t>(std::lround(track.hop_seconds * sample_rate));
  if (hop == 0) throw InvalidInput("hop is shorter than one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  audio.samples.reserve(hop * track.size());
  double phase = 0.0;
  constexpr int kHarmonics = 5;
  for (std::size_t t = 0; t < track.size(); ++t) {
    const double amp = 0.1 * std::exp(track.log_energy[t]);
    const double f0 = track.f0[t];
    for (std::size_t i = 0; i < hop; ++i) {
      double v;
      if (f0 > 0.0) {
        phase += 2.0 * std::numbers::pi * f0 / sample_rate;
        if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
        v = 0.0;
        for (int h = 1; h <= kHarmonics; ++h) v += std::sin(h * phase) / h;
      } else {
        v = 0.1 * gauss(rng);
      }
      audio.samples.push_back(static_cast<float>(amp * v));
    }
  }
  return audio;
}

std::vector<SyntheticUtterance> SynthesizeCorpus(std::span<const SyntheticSpeakerSpec> specs,
                                                 const SynthConfig &config) {
  if (specs.size() < 2) throw InvalidInput("at least 2 speakers are required");
  if (config.num_sentences < 1 || config.repetitions < 1 || config.emotions.empty())
    throw InvalidInput("need at least one sentence, repetition and emotion");
  if (config.min_frames < 1 || config.max_frames < config.min_frames)
    throw InvalidInput("frame range must satisfy 1 <= min <= max");
  std::set<std::string> ids;
  for (const auto &s : specs) {
    ValidateSpec(s);
    if (!ids.insert(s.id).second) throw InvalidInput("duplicate speaker id " + s.id);
    if (s.base.num_states() != specs[0].base.num_states() || s.base.dim() != specs[0].base.dim())
      throw InvalidInput(s.id + ": all generators must share state count and dimension");
  }
  const int N = specs[0].base.num_states(), D = specs[0].base.dim();

  // Sentence offsets are shared by every speaker, as the text is.
  std::vector<std::vector<double>> sentence_offset(config.num_sentences + 1);
  for (int s = 1; s <= config.num_sentences; ++s) {
    std::mt19937_64 rng(MixSeed(config.seed, 1000 + s));
    std::normal_distribution<double> g(0.0, config.sentence_offset_sd);
    sentence_offset[s].resize(static_cast<std::size_t>(N) * D);
    for (auto &v : sentence_offset[s]) v = g(rng);
  }

  std::vector<SyntheticUtterance> out;
  for (const auto &spec : specs) {
    std::map<std::string, HmmModel> cache;
    for (int s = 1; s <= config.num_sentences; ++s) {
      for (int r = 1; r <= config.repetitions; ++r) {
        for (std::size_t e = 0; e < config.emotions.size(); ++e) {
          const std::string &emotion = config.emotions[e];
          auto sh = spec.shifts.find(emotion);
          const EmotionShift *shift = sh == spec.shifts.end() ? nullptr : &sh->second;
          const std::string model_key = emotion + "/" + std::to_string(s);
          auto it = cache.find(model_key);
          if (it == cache.end())
            it = cache.emplace(model_key, EmotionModel(spec, shift, sentence_offset[s])).first;

          std::uint64_t seed = MixSeed(config.seed, spec.seed);
          seed = MixSeed(seed, static_cast<std::uint64_t>(s));
          seed = MixSeed(seed, static_cast<std::uint64_t>(r));
          seed = MixSeed(seed, StableHash(emotion));
          std::mt19937_64 rng(seed);
          const int len = std::uniform_int_distribution<int>(config.min_frames, config.max_frames)(rng);

          SyntheticUtterance u;
          u.record.speaker_id = spec.id;
          u.record.gender = spec.gender;
          u.record.sentence_id = s;
          u.record.repetition = r;
          u.record.emotion = emotion;
          auto [path, obs] = SampleSequence(it->second, static_cast<std::size_t>(len), rng());
          u.states = std::move(path);
          std::vector<double> times;
          for (int t = 0; t < len; ++t) times.push_back((t + 0.5) * config.hop_seconds);
          u.features = FeatureSequence(obs.dim(), obs.values(), std::move(times));

          const double f0_scale = shift ? shift->f0_scale : 1.0;
          const double energy_off = shift ? shift->energy_offset : 0.0;
          std::normal_distribution<double> g(0.0, 1.0);
          std::uniform_real_distribution<double> uni(0.0, 1.0);
          u.prosody.hop_seconds = config.hop_seconds;
          for (int t = 0; t < len; ++t) {
            const int q = u.states[t];
            const bool voiced = uni(rng) < spec.voicing_prob;
            const double jitter = g(rng);
            const double f0 = spec.f0_center * spec.state_f0_ratio[q] * f0_scale *
                              (1.0 + config.f0_jitter * jitter);
            u.prosody.f0.push_back(voiced ? f0 : 0.0);
            u.prosody.log_energy.push_back(spec.energy_level + spec.state_energy[q] + energy_off +
                                           config.energy_noise * g(rng));
          }
          if (config.render_audio) u.audio = RenderAudio(u.prosody, config.sample_rate, rng());
          out.push_back(std::move(u));
        }
      }
    }
  }
  return out;
}

std::vector<SyntheticSpeakerSpec> DefaultPopulation(const PopulationConfig &c) {
  if (c.num_speakers < 1) throw InvalidInput("need at least one speaker");
  if (c.num_states < 2 || c.dim < 1) throw InvalidInput("need N >= 2 and D >= 1");
  const int N = c.num_states, D = c.dim;
  std::mt19937_64 pop_rng(MixSeed(c.seed, 0));
  std::normal_distribution<double> g(0.0, 1.0);

  std::vector<double> pop_means(static_cast<std::size_t>(N) * D);
  for (auto &v : pop_means) v = c.state_mean_sd * g(pop_rng);
  // Emotion directions shared across the population, with the sign of the
  // F0 change per emotion.
  std::map<std::string, std::vector<double>> shared_dir;
  for (const auto &[emotion, sev] : c.severity) {
    std::vector<double> dir(static_cast<std::size_t>(N) * D);
    for (auto &v : dir) v = g(pop_rng);
    shared_dir[emotion] = std::move(dir);
  }
  const std::map<std::string, double> f0_direction = {
      {"happy", 1.0}, {"fear", 1.0}, {"angry", 1.0}, {"sad", -1.0}, {"disgust", -1.0}};

  TopologyMask mask = TopologyMask::Circular(N);
  std::vector<SyntheticSpeakerSpec> specs;
  const int n_female = (c.num_speakers + 1) / 2;
  for (int index = 0; index < c.num_speakers; ++index) {
    const int gi = index < n_female ? 0 : 1;
    SyntheticSpeakerSpec s;
    char id[16];
    std::snprintf(id, sizeof id, "spk%02d", index + 1);
    s.id = id;
    s.gender = gi == 0 ? "female" : "male";
    s.seed = MixSeed(c.seed, 100 + index);
    std::mt19937_64 rng(s.seed);

    EmissionModel em;
    em.dim = D;
    em.variance_floor.assign(D, 1e-6);
    em.states.resize(N);
    for (int q = 0; q < N; ++q) {
      GaussianMixture &mix = em.states[q];
      mix.weights = {1.0};
      mix.means.resize(D);
      mix.variances.resize(D);
      for (int d = 0; d < D; ++d) {
        mix.means[d] = pop_means[q * D + d] + c.speaker_sd * g(rng);
        const double sd = c.emission_sd * std::exp(0.1 * g(rng));
        mix.variances[d] = sd * sd;
      }
    }
    s.base = MakeUniformModel(1, mask, std::move(em));
    s.base.initials.psi1.assign(N, 0.0);
    s.base.initials.psi1[0] = 1.0;
    for (int q = 0; q < N; ++q) {
      s.base.transitions(q, q) = c.self_loop;
      s.base.transitions(q, (q + 1) % N) = 1.0 - c.self_loop;
    }

    const double center = gi == 0 ? 210.0 : 120.0;
    s.f0_center = center * std::exp(c.f0_speaker_sd * g(rng));
    s.energy_level = c.energy_speaker_sd * g(rng);
    for (int q = 0; q < N; ++q) {
      s.state_f0_ratio.push_back(std::exp(c.f0_state_sd * g(rng)));
      s.state_energy.push_back(c.energy_state_sd * g(rng));
    }

    for (const auto &[emotion, sev] : c.severity) {
      EmotionShift sh;
      if (sev > 0.0) {
        sh.mean_offset.resize(static_cast<std::size_t>(N) * D);
        const auto &dir = shared_dir[emotion];
        for (std::size_t k = 0; k < sh.mean_offset.size(); ++k)
          sh.mean_offset[k] = sev * (c.shared_shift * dir[k] + c.speaker_shift * g(rng));
        sh.variance_scale = 1.0 + c.variance_gain * sev;
        auto fd = f0_direction.find(emotion);
        const double direction = fd == f0_direction.end() ? 1.0 : fd->second;
        sh.f0_scale = (1.0 + c.f0_gain * sev * direction) *
                      std::exp(c.f0_speaker_spread * sev * g(rng));
        sh.energy_offset = c.energy_gain * sev * direction;
      }
      s.shifts[emotion] = std::move(sh);
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<TrialAssignment> AssignClaims(std::span<const UtteranceRecord> test,
                                          int claimants_per_gender, std::uint64_t seed) {
  if (claimants_per_gender < 1) throw InvalidInput("need at least one claimant per gender");
  std::map<std::string, std::set<std::string>> by_gender;
  for (const auto &r : test) by_gender[r.gender].insert(r.speaker_id);
  std::map<std::string, std::vector<std::string>> claimants;
  for (const auto &[gender, speakers] : by_gender) {
    if (static_cast<int>(speakers.size()) < claimants_per_gender)
      throw InvalidInput("gender '" + gender + "' has only " + std::to_string(speakers.size()) +
                         " speakers");
    auto &list = claimants[gender];
    for (const auto &id : speakers) {
      if (static_cast<int>(list.size()) == claimants_per_gender) break;
      list.push_back(id);
    }
  }
  std::vector<TrialAssignment> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto &r = test[i];
    const auto &list = claimants[r.gender];
    if (std::find(list.begin(), list.end(), r.speaker_id) != list.end()) {
      out.push_back({i, r.speaker_id});
    } else {
      const std::uint64_t h = MixSeed(MixSeed(seed, StableHash(r.Key())), 7);
      out.push_back({i, list[h % list.size()]});
    }
  }
  return out;
}

}  // namespace csphmm
