// include/csphmm/experiment.h

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

#ifndef CSPHMM_EXPERIMENT_H_
#define CSPHMM_EXPERIMENT_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "csphmm/corpus.h"
#include "csphmm/hmm_train.h"
#include "csphmm/suprasegmental.h"
#include "csphmm/verification.h"

namespace csphmm {

struct EnrollConfig {
  EnrollConfig() { init.num_mixtures = 2; }

  InitConfig init;
  TrainConfig train;
  int order = 3;
  bool with_supra = true;
  int supra_groups = 2;
  SupraTrainConfig supra;
};

struct EnrollResult {
  SpeakerModelFile model;
  std::vector<std::vector<double>> acoustic_traces;
  std::vector<std::vector<double>> supra_traces;
};

/// Acoustic order pipeline, then the suprasegmental chain on top of the
/// final acoustic model. Throws TrainingDataEmpty without utterances.
EnrollResult EnrollSpeaker(std::span<const FeatureSequence> features,
                           std::span<const ProsodyTrack> prosody, const EnrollConfig &config);

struct ExperimentConfig {
  PopulationConfig population;
  SynthConfig synth;
  SplitConfig split;
  EnrollConfig enroll;
  int claimants_per_gender = 12;
  /// Background of each claim = the other enrolled speakers of the same
  /// gender; off uses every other enrolled speaker.
  bool gender_cohorts = true;
  std::vector<double> alphas = {0.0, 0.5};
  int threads = 1;
};

struct ExperimentResult {
  std::map<std::string, std::size_t> train_per_speaker;
  std::size_t num_trials = 0;
  std::map<std::string, std::size_t> trials_per_emotion;
  /// One protocol result per configured alpha, in order.
  std::vector<ProtocolResult> protocols;
};

/// Synthesizes the population, splits it, enrolls every speaker on its
/// training side and scores one claim per test utterance.
ExperimentResult RunSyntheticExperiment(const ExperimentConfig &config);

}  // namespace csphmm

#endif  // CSPHMM_EXPERIMENT_H_
