// include/csphmm/verification.h

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

#ifndef CSPHMM_VERIFICATION_H_
#define CSPHMM_VERIFICATION_H_

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csphmm/features.h"
#include "csphmm/suprasegmental.h"

namespace csphmm {

/// Enrolled speakers with their scorers. The background of a claim is the
/// claim's own cohort if one was set, else the shared cohort, else every
/// enrolled speaker other than the claimed one.
class SpeakerModelSet {
 public:
  SpeakerModelSet() = default;
  SpeakerModelSet(SpeakerModelSet &&) = default;
  SpeakerModelSet &operator=(SpeakerModelSet &&) = default;

  /// Throws InvalidInput on a duplicate id or a dimension mismatch.
  void Add(const std::string &id, SpeakerModelFile model);
  void SetCohort(std::vector<std::string> cohort);
  void SetCohort(const std::string &claimed_id, std::vector<std::string> cohort);
  void ClearCohorts() {
    cohort_.reset();
    claim_cohorts_.clear();
  }

  bool Contains(const std::string &id) const { return entries_.count(id) != 0; }
  std::size_t size() const { return entries_.size(); }
  /// Sorted ids.
  std::vector<std::string> Ids() const;

  /// Throws LookupError for unknown ids.
  const SpeakerModelFile &Model(const std::string &id) const;
  const SpeakerScorer &Scorer(const std::string &id) const;

  /// Background ids for a claim; throws InvalidInput when the set is empty.
  std::vector<std::string> Background(const std::string &claimed_id) const;

 private:
  struct Entry {
    SpeakerModelFile model;
    std::unique_ptr<SpeakerScorer> scorer;
  };
  std::map<std::string, std::unique_ptr<Entry>> entries_;
  std::optional<std::vector<std::string>> cohort_;
  std::map<std::string, std::vector<std::string>> claim_cohorts_;
  int dim_ = -1;
};

struct Trial {
  std::string claimed_id;
  FeatureSequence obs;
  /// Empty track: scored by the acoustic term alone.
  ProsodyTrack prosody;
  std::optional<std::string> true_id;
  std::optional<std::string> emotion;

  bool genuine() const { return true_id && *true_id == claimed_id; }
};

struct TrialScore {
  double lambda = 0.0;
  double claimant_term = 0.0;
  double background_term = 0.0;
  bool accepted = false;
  double threshold_used = 0.0;
};

/// Acoustic and suprasegmental terms of one trial under the claimed model
/// and each background model, so any fusion weight can be applied later.
struct TrialComponents {
  FusedScore claimant;
  std::vector<FusedScore> background;
};

/// Mean of the fused scores.
double BackgroundLogLikelihood(std::span<const FusedScore> imposters, FusionWeight w);
double BackgroundLogLikelihood(std::span<const SpeakerScorer *const> imposters, FusionWeight w,
                               const FeatureSequence &obs, const ProsodyTrack &prosody);

TrialComponents ScoreTrialComponents(const SpeakerModelSet &set, const Trial &trial);
/// Scores every trial; `threads` > 1 spreads trials over worker threads.
/// The result is ordered like `trials` regardless of threading.
std::vector<TrialComponents> ScoreTrialComponents(const SpeakerModelSet &set,
                                                  std::span<const Trial> trials,
                                                  int threads = 1);

/// Lambda and its two terms; the decision fields are left unset.
TrialScore CombineComponents(const TrialComponents &c, FusionWeight w);
TrialScore LlrScore(const SpeakerModelSet &set, const Trial &trial, FusionWeight w);

struct Threshold {
  double theta = 0.0;
  std::size_t window = 20;
  std::deque<double> history;
};

/// Accept iff lambda >= theta.
bool Decide(double lambda, double theta);
/// Appends the score, keeps the last `window` scores and sets theta to their mean.
Threshold AdaptThreshold(Threshold threshold, double new_score);

struct DetPoint {
  double theta;
  double far;
  double frr;
};

struct DetCurve {
  std::vector<DetPoint> points;
  double eer = 0.0;
  std::size_t num_genuine = 0;
  std::size_t num_imposter = 0;
};

struct LabeledScore {
  double lambda;
  bool genuine;
};

/// Sweeps -inf, the midpoints between adjacent distinct scores, and +inf.
/// FAR counts imposter scores >= theta, FRR genuine scores < theta. The EER
/// is read at the sweep point where FAR - FRR changes sign, interpolating
/// linearly between the two bracketing points when they differ.
DetCurve Evaluate(std::span<const LabeledScore> scores);

struct ProtocolConfig {
  FusionWeight weight{0.5};
  /// Threshold each claimant starts from.
  double initial_theta = 0.0;
  /// Adapt each claimant's threshold to its recent scores, in trial order.
  bool adapt = false;
  std::size_t window = 20;
};

struct ProtocolResult {
  /// One entry per trial, in trial order.
  std::vector<TrialScore> log;
  /// One curve per emotion label, plus "pooled" over all trials.
  std::map<std::string, DetCurve> curves;
};

inline constexpr const char *kPooledKey = "pooled";

/// Requires true_id on every trial.
ProtocolResult RunProtocol(const SpeakerModelSet &set, std::span<const Trial> trials,
                           const ProtocolConfig &config, int threads = 1);
ProtocolResult EvaluateProtocol(std::span<const Trial> trials,
                                std::span<const TrialComponents> components,
                                const ProtocolConfig &config);

/// One trial of a JSON-lines manifest.
struct TrialSpec {
  std::string claimed_id;
  std::string feature_path;
  std::string wav_path;
  std::string prosody_path;
  std::optional<std::string> true_id;
  std::optional<std::string> emotion;

  bool operator==(const TrialSpec &) const = default;
};

std::vector<TrialSpec> ReadTrialManifest(const std::string &path);
void WriteTrialManifest(const std::string &path, std::span<const TrialSpec> trials);

/// theta, far, frr per line after a header, then "# eer <value>".
void WriteDetTsv(std::ostream &os, const DetCurve &curve);
/// One JSON object per trial.
void WriteDecisionLog(std::ostream &os, std::span<const Trial> trials,
                      std::span<const TrialScore> log);

}  // namespace csphmm

#endif  // CSPHMM_VERIFICATION_H_
