// src/verification/experiment.cc

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

#include "csphmm/experiment.h"

#include "csphmm/error.h"

namespace csphmm {

EnrollResult EnrollSpeaker(std::span<const FeatureSequence> features,
                           std::span<const ProsodyTrack> prosody, const EnrollConfig &config) {
  if (features.empty()) throw TrainingDataEmpty("speaker has no training utterances");
  EnrollResult r;
  PipelineResult acoustic = TrainOrderPipeline(features, config.init, config.train, config.order);
  r.acoustic_traces = std::move(acoustic.traces);
  r.model.acoustic = std::move(acoustic.model);
  if (config.with_supra) {
    if (prosody.size() != features.size())
      throw InvalidInput("every training utterance needs a prosody track");
    const auto topo = SuprasegmentalTopology::Contiguous(r.model.acoustic.num_states(),
                                                         config.supra_groups);
    SupraTrainResult s = TrainSuprasegmental(r.model.acoustic, features, prosody, topo, config.supra);
    r.supra_traces = std::move(s.traces);
    r.model.supra = std::move(s.model);
  }
  return r;
}

ExperimentResult RunSyntheticExperiment(const ExperimentConfig &config) {
  const auto specs = DefaultPopulation(config.population);
  auto corpus = SynthesizeCorpus(specs, config.synth);

  std::vector<UtteranceRecord> records;
  records.reserve(corpus.size());
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    records.push_back(corpus[i].record);
    index_of[corpus[i].record.Key()] = i;
  }
  const CorpusSplit split = SplitTrainTest(records, config.split);

  ExperimentResult result;
  std::map<std::string, std::vector<std::size_t>> train_of;
  for (const auto &r : split.train) train_of[r.speaker_id].push_back(index_of.at(r.Key()));

  SpeakerModelSet set;
  for (const auto &spec : specs) {
    const auto &idx = train_of[spec.id];
    result.train_per_speaker[spec.id] = idx.size();
    std::vector<FeatureSequence> feats;
    std::vector<ProsodyTrack> pros;
    for (std::size_t i : idx) {
      feats.push_back(corpus[i].features);
      pros.push_back(corpus[i].prosody);
    }
    EnrollConfig enroll = config.enroll;
    enroll.init.seed = MixSeed(config.enroll.init.seed, spec.seed);
    set.Add(spec.id, EnrollSpeaker(feats, pros, enroll).model);
  }

  if (config.gender_cohorts) {
    for (const auto &spec : specs) {
      std::vector<std::string> cohort;
      for (const auto &other : specs)
        if (other.gender == spec.gender && other.id != spec.id) cohort.push_back(other.id);
      if (!cohort.empty()) set.SetCohort(spec.id, std::move(cohort));
    }
  }

  const auto claims = AssignClaims(split.test, config.claimants_per_gender,
                                   MixSeed(config.synth.seed, 99));
  std::vector<Trial> trials;
  trials.reserve(claims.size());
  for (const auto &c : claims) {
    const auto &rec = split.test[c.record_index];
    const auto &u = corpus[index_of.at(rec.Key())];
    trials.push_back({c.claimed_id, u.features, u.prosody, rec.speaker_id, rec.emotion});
    ++result.trials_per_emotion[rec.emotion];
  }
  result.num_trials = trials.size();

  const auto components = ScoreTrialComponents(set, trials, config.threads);
  for (double alpha : config.alphas) {
    ProtocolConfig pc;
    pc.weight = FusionWeight(alpha);
    result.protocols.push_back(EvaluateProtocol(trials, components, pc));
  }
  return result;
}

}  // namespace csphmm
