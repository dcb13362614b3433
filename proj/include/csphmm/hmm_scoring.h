// include/csphmm/hmm_scoring.h

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

#ifndef CSPHMM_HMM_SCORING_H_
#define CSPHMM_HMM_SCORING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "csphmm/features.h"
#include "csphmm/hmm_model.h"

namespace csphmm {

/// log b_q(o_t) for every frame and state, T x N row-major.
struct LogEmissionTable {
  std::size_t num_frames = 0;
  int num_states = 0;
  std::vector<double> values;

  double operator()(std::size_t t, int q) const { return values[t * num_states + q]; }
};

struct Alignment {
  std::vector<int> state_path;
  double log_prob = kLogZero;
};

/// Precomputed view of a model for repeated scoring: sparse log transitions
/// per history and cached Gaussian normalizers. Holds a reference to the
/// model, which must outlive the scorer.
///
/// The forward state at time t is the composite of the last min(t, m)
/// acoustic states; composites of length L are base-N numbers in [0, N^L).
class ModelScorer {
 public:
  explicit ModelScorer(const HmmModel &model);

  const HmmModel &model() const { return *model_; }

  LogEmissionTable LogEmissions(const FeatureSequence &obs) const;
  /// Per-component log(w_k N_k(o_t)) for every (t, q, k): T x N x K.
  std::vector<double> ComponentLogLikes(const FeatureSequence &obs) const;

  double Forward(const FeatureSequence &obs) const;
  double Forward(const LogEmissionTable &table) const;
  Alignment Viterbi(const FeatureSequence &obs) const;
  Alignment Viterbi(const LogEmissionTable &table) const;

  /// One successor of a composite history.
  struct Arc {
    std::uint32_t target;
    int state;
    double log_prob;
  };
  /// Arcs leaving a composite of length `length` (1..m). Length-m arcs use
  /// the order-m law; shorter ones use the startup laws.
  std::span<const Arc> Arcs(int length, std::size_t composite) const;
  std::size_t LayerSize(int length) const { return layer_size_[length]; }

 private:
  void CheckObs(const FeatureSequence &obs) const;

  const HmmModel *model_;
  int n_;
  int m_;
  std::size_t layer_size_[kMaxOrder + 1] = {1, 0, 0, 0};
  std::vector<double> log_psi1_;
  // arcs_[L] holds arcs for composites of length L; offsets_[L][h]..[h+1].
  std::vector<Arc> arcs_[kMaxOrder + 1];
  std::vector<std::uint32_t> offsets_[kMaxOrder + 1];
  // Gaussian constants: log w_k - 0.5 sum log(2 pi var), and 1/var.
  std::vector<double> gconst_;
  std::vector<double> inv_var_;
};

/// Log-probability of a state path under the model's initial and transition
/// laws. Returns kLogZero for paths that break the topology or hit a zero law.
double SequenceLogProb(const HmmModel &model, std::span<const int> path);

/// SequenceLogProb plus log b_{q_t}(o_t) for every frame.
double JointLogProb(const HmmModel &model, std::span<const int> path,
                    const FeatureSequence &obs);

/// log sum over all paths of the joint probability.
double ForwardLogLikelihood(const HmmModel &model, const FeatureSequence &obs);

/// Best path; ties go to the lower state index. Throws NoValidPath when every
/// path has probability zero.
Alignment ViterbiAlign(const HmmModel &model, const FeatureSequence &obs);

/// Forward log-likelihood divided by the number of frames.
double NormalizedLogLikelihood(const HmmModel &model, const FeatureSequence &obs);

/// Order-1 equivalent over composite states. Composites are laid out by
/// history length: the N length-1 composites, then N^2 length-2 composites,
/// up to the N^m full histories, so the startup laws become ordinary
/// transitions between the transient layers.
HmmModel ExpandToFirstOrder(const HmmModel &model);

/// Index of the first full-history composite in an expanded model.
std::size_t ExpandedFullHistoryOffset(int num_states, int order);

/// Draws a state path from the initial and transition laws and one
/// observation per frame from the state's mixture. Deterministic in `seed`.
std::pair<std::vector<int>, FeatureSequence> SampleSequence(const HmmModel &model,
                                                            std::size_t length,
                                                            std::uint64_t seed);

}  // namespace csphmm

#endif  // CSPHMM_HMM_SCORING_H_
