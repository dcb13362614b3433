// include/csphmm/suprasegmental.h

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

#ifndef CSPHMM_SUPRASEGMENTAL_H_
#define CSPHMM_SUPRASEGMENTAL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csphmm/features.h"
#include "csphmm/hmm_model.h"
#include "csphmm/hmm_scoring.h"
#include "csphmm/hmm_train.h"

namespace csphmm {

/// Partition of acoustic states into suprasegmental states. The root state
/// spanning all groups has no chain of its own; it is realized as the
/// per-segment normalization of the chain score.
struct SuprasegmentalTopology {
  std::vector<std::vector<int>> groups;

  /// Contiguous, equally sized groups: {0,1,2}, {3,4,5} for 6 states and 2 groups.
  static SuprasegmentalTopology Contiguous(int num_acoustic_states, int num_groups);

  int num_groups() const { return static_cast<int>(groups.size()); }
  /// Group index of every acoustic state.
  std::vector<int> GroupOf(int num_acoustic_states) const;
  void Validate(int num_acoustic_states) const;
  bool operator==(const SuprasegmentalTopology &) const = default;
};

struct SuprasegmentalModel {
  SuprasegmentalTopology topology;
  /// Chain over suprasegmental states observing ProsodicVector::kDim features.
  HmmModel chain;

  bool operator==(const SuprasegmentalModel &) const = default;
};

class FusionWeight {
 public:
  explicit FusionWeight(double alpha = 0.5);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

/// Frames [first_frame, last_frame] aligned to suprasegmental state `group`.
struct Segment {
  int group = 0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;

  bool operator==(const Segment &) const = default;
};
using SegmentMap = std::vector<Segment>;

/// Run-length merge of a state path after mapping states to groups.
SegmentMap SegmentsFromPath(std::span<const int> path, const SuprasegmentalTopology &topo);

/// Viterbi-aligns obs to the acoustic model, then merges runs of each group.
SegmentMap SegmentUtterance(const HmmModel &acoustic, const FeatureSequence &obs,
                            const SuprasegmentalTopology &topo);

/// One prosodic vector per segment, summarizing the track over its frames.
/// Segments past the end of the track are clipped to its last frame.
FeatureSequence ProsodicObservations(const SegmentMap &segments, const ProsodyTrack &track);

struct SupraTrainConfig {
  int num_mixtures = 1;
  int order = 3;
  TrainConfig train;
  double variance_floor_scale = 1e-2;
  double min_variance_floor = 1e-4;
  /// Weight of the uniform law mixed into the trained chain's laws, so
  /// segmentations unseen in training keep a nonzero probability.
  double law_smoothing = 1e-2;
};

struct SupraTrainResult {
  SuprasegmentalModel model;
  std::size_t utterances_used = 0;
  std::size_t utterances_skipped = 0;
  /// traces[m - 1]: EM trace at chain order m (empty when no sequence was
  /// long enough for that order).
  std::vector<std::vector<double>> traces;
};

/// Segments every utterance with the acoustic model, summarizes prosody per
/// segment and trains the chain 1 -> 2 -> 3 with EM. Chain states start from
/// the statistics of the segments carrying their label. Each order-m stage
/// uses the sequences with at least m + 1 segments.
SupraTrainResult TrainSuprasegmental(const HmmModel &acoustic,
                                     std::span<const FeatureSequence> data,
                                     std::span<const ProsodyTrack> prosody,
                                     const SuprasegmentalTopology &topo,
                                     const SupraTrainConfig &config = {});

struct FusedScore {
  double value = 0.0;
  /// Acoustic forward log-likelihood per frame.
  double acoustic = 0.0;
  /// Chain forward log-likelihood per segment.
  double supra = 0.0;
  std::size_t num_segments = 0;
  /// Segmentation failed; value is the acoustic term alone.
  bool fallback = false;
};

/// Scores one utterance against one speaker's acoustic and suprasegmental
/// models. Both models must outlive the scorer.
class SpeakerScorer {
 public:
  SpeakerScorer(const HmmModel &acoustic, const SuprasegmentalModel *supra);

  /// Computes both terms; the fusion weight only enters Fuse().
  FusedScore Components(const FeatureSequence &obs, const ProsodyTrack *prosody) const;
  static FusedScore Fuse(FusedScore components, FusionWeight w);

  const HmmModel &acoustic() const { return acoustic_.model(); }
  bool has_supra() const { return supra_ != nullptr; }

 private:
  ModelScorer acoustic_;
  const SuprasegmentalModel *supra_;
  std::optional<ModelScorer> chain_;
};

/// (1 - alpha) * acoustic per-frame + alpha * suprasegmental per-segment.
FusedScore FusedLogLikelihood(const HmmModel &acoustic, const SuprasegmentalModel &supra,
                              FusionWeight w, const FeatureSequence &obs,
                              const ProsodyTrack &prosody);
FusedScore FusedLogLikelihood(const HmmModel &acoustic, const SuprasegmentalModel &supra,
                              FusionWeight w, const FeatureSequence &obs,
                              const AudioBuffer &audio, const FrameSpec &frames = {});

struct SpeakerModelFile {
  HmmModel acoustic;
  std::optional<SuprasegmentalModel> supra;

  bool operator==(const SpeakerModelFile &) const = default;
};

/// "SHM3" container: acoustic block, then an optional suprasegmental section
/// (topology block followed by the chain's HMM block).
void SaveSpeakerModel(const std::string &path, const SpeakerModelFile &model);
SpeakerModelFile LoadSpeakerModel(const std::string &path);

}  // namespace csphmm

#endif  // CSPHMM_SUPRASEGMENTAL_H_
