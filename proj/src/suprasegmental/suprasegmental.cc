// src/suprasegmental/suprasegmental.cc

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

#include "csphmm/suprasegmental.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csphmm/error.h"
#include "hmm/model_container.h"
#include "io/binary_stream.h"

namespace csphmm {

SuprasegmentalTopology SuprasegmentalTopology::Contiguous(int num_acoustic_states,
                                                          int num_groups) {
  if (num_groups < 1 || num_groups > num_acoustic_states)
    throw InvalidInput("need 1 <= groups <= acoustic states");
  SuprasegmentalTopology topo;
  topo.groups.resize(num_groups);
  for (int q = 0; q < num_acoustic_states; ++q)
    topo.groups[static_cast<std::size_t>(q) * num_groups / num_acoustic_states].push_back(q);
  return topo;
}

std::vector<int> SuprasegmentalTopology::GroupOf(int num_acoustic_states) const {
  std::vector<int> of(num_acoustic_states, -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int q : groups[g]) {
      if (q < 0 || q >= num_acoustic_states)
        throw InvalidInput("suprasegmental group references state " + std::to_string(q));
      if (of[q] != -1)
        throw InvalidInput("acoustic state " + std::to_string(q) + " is in two groups");
      of[q] = static_cast<int>(g);
    }
  return of;
}

void SuprasegmentalTopology::Validate(int num_acoustic_states) const {
  if (groups.empty()) throw InvalidInput("suprasegmental topology has no groups");
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].empty()) throw InvalidInput("suprasegmental group " + std::to_string(g) + " is empty");
  const std::vector<int> of = GroupOf(num_acoustic_states);
  for (int q = 0; q < num_acoustic_states; ++q)
    if (of[q] < 0) throw InvalidInput("acoustic state " + std::to_string(q) + " is in no group");
}

FusionWeight::FusionWeight(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("fusion weight must lie in [0, 1]");
}

SegmentMap SegmentsFromPath(std::span<const int> path, const SuprasegmentalTopology &topo) {
  int max_state = 0;
  for (int q : path) max_state = std::max(max_state, q);
  int n = 0;
  for (const auto &g : topo.groups)
    for (int q : g) n = std::max(n, q + 1);
  if (max_state >= n) throw InvalidInput("path visits a state outside the topology");
  const std::vector<int> group_of = topo.GroupOf(n);

  SegmentMap out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    const int g = group_of[path[t]];
    if (g < 0) throw InvalidInput("path visits a state outside every group");
    if (!out.empty() && out.back().group == g) {
      out.back().last_frame = t;
    } else {
      out.push_back({g, t, t});
    }
  }
  return out;
}

SegmentMap SegmentUtterance(const HmmModel &acoustic, const FeatureSequence &obs,
                            const SuprasegmentalTopology &topo) {
  topo.Validate(acoustic.num_states());
  const Alignment a = ViterbiAlign(acoustic, obs);
  return SegmentsFromPath(a.state_path, topo);
}

FeatureSequence ProsodicObservations(const SegmentMap &segments, const ProsodyTrack &track) {
  if (track.size() == 0) throw InvalidInput("prosody track is empty");
  FeatureSequence out(ProsodicVector::kDim);
  const std::size_t last = track.size() - 1;
  for (const Segment &s : segments) {
    const std::size_t a = std::min(s.first_frame, last);
    const std::size_t b = std::min(s.last_frame, last);
    out.PushBack(SummarizeProsody(track, a, b).ToArray());
  }
  return out;
}

namespace {

// Order-1 chain whose state g starts from the segments labeled g.
HmmModel LabelInitializedChain(int num_groups, const std::vector<FeatureSequence> &obs,
                               const std::vector<std::vector<int>> &labels,
                               const SupraTrainConfig &config) {
  const int D = ProsodicVector::kDim, K = config.num_mixtures;
  std::vector<std::vector<double>> rows(num_groups);
  std::vector<double> pooled;
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t t = 0; t < obs[i].size(); ++t) {
      auto f = obs[i].frame(t);
      rows[labels[i][t]].insert(rows[labels[i][t]].end(), f.begin(), f.end());
      pooled.insert(pooled.end(), f.begin(), f.end());
    }

  const auto moments = [D](const std::vector<double> &r, std::vector<double> *mean,
                           std::vector<double> *var) {
    const std::size_t n = r.size() / D;
    mean->assign(D, 0.0);
    var->assign(D, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (int d = 0; d < D; ++d) (*mean)[d] += r[i * D + d];
    for (auto &m : *mean) m /= n;
    for (std::size_t i = 0; i < n; ++i)
      for (int d = 0; d < D; ++d) {
        const double diff = r[i * D + d] - (*mean)[d];
        (*var)[d] += diff * diff;
      }
    for (auto &v : *var) v /= n;
  };
  std::vector<double> g_mean, g_var;
  moments(pooled, &g_mean, &g_var);

  EmissionModel em;
  em.dim = D;
  em.variance_floor.resize(D);
  for (int d = 0; d < D; ++d)
    em.variance_floor[d] = std::max(config.variance_floor_scale * g_var[d], config.min_variance_floor);
  em.states.resize(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    GaussianMixture &mix = em.states[g];
    mix.weights.assign(K, 1.0 / K);
    mix.means.resize(static_cast<std::size_t>(K) * D);
    mix.variances.resize(static_cast<std::size_t>(K) * D);
    const std::size_t n = rows[g].size() / D;
    std::vector<double> mean = g_mean, var = g_var;
    if (n >= 2) moments(rows[g], &mean, &var);
    else if (n == 1) mean.assign(rows[g].begin(), rows[g].end());
    std::vector<double> centers;
    if (K > 1 && n >= static_cast<std::size_t>(K))
      centers = KMeans(rows[g], D, K, 15, 7 + g).centers;
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d) {
        mix.means[k * D + d] = centers.empty() ? mean[d] : centers[k * D + d];
        mix.variances[k * D + d] = std::max(var[d], em.variance_floor[d]);
      }
  }
  return MakeUniformModel(1, TopologyMask::Circular(num_groups), std::move(em));
}

}  // namespace

SupraTrainResult TrainSuprasegmental(const HmmModel &acoustic,
                                     std::span<const FeatureSequence> data,
                                     std::span<const ProsodyTrack> prosody,
                                     const SuprasegmentalTopology &topo,
                                     const SupraTrainConfig &config) {
  if (data.size() != prosody.size())
    throw InvalidInput("feature and prosody lists must be parallel");
  if (config.order < 1 || config.order > kMaxOrder) throw InvalidInput("chain order must be 1..3");
  topo.Validate(acoustic.num_states());

  SupraTrainResult result;
  std::vector<FeatureSequence> obs;
  std::vector<std::vector<int>> labels;
  ModelScorer scorer(acoustic);
  for (std::size_t i = 0; i < data.size(); ++i) {
    SegmentMap segs;
    try {
      segs = SegmentsFromPath(scorer.Viterbi(data[i]).state_path, topo);
    } catch (const NoValidPath &) {
      segs.clear();
    }
    if (segs.empty() || prosody[i].size() == 0) {
      ++result.utterances_skipped;
      continue;
    }
    obs.push_back(ProsodicObservations(segs, prosody[i]));
    std::vector<int> lab;
    for (const Segment &s : segs) lab.push_back(s.group);
    labels.push_back(std::move(lab));
    ++result.utterances_used;
  }
  if (obs.empty()) throw TrainingDataEmpty("no utterance produced a suprasegmental segment");

  HmmModel chain = LabelInitializedChain(topo.num_groups(), obs, labels, config);
  for (int order = 1; order <= config.order; ++order) {
    if (order > 1) chain = LiftOrder(chain);
    std::vector<FeatureSequence> usable;
    for (const auto &o : obs)
      if (o.size() >= static_cast<std::size_t>(order) + 1) usable.push_back(o);
    if (usable.empty()) {
      result.traces.emplace_back();
      continue;
    }
    TrainResult r = TrainBaumWelch(chain, usable, config.train);
    chain = std::move(r.model);
    result.traces.push_back(std::move(r.trace));
  }
  result.model.topology = topo;
  result.model.chain = SmoothLaws(chain, config.law_smoothing);
  return result;
}

SpeakerScorer::SpeakerScorer(const HmmModel &acoustic, const SuprasegmentalModel *supra)
    : acoustic_(acoustic), supra_(supra) {
  if (supra_ != nullptr) {
    supra_->topology.Validate(acoustic.num_states());
    if (supra_->chain.dim() != static_cast<int>(ProsodicVector::kDim))
      throw InvalidInput("suprasegmental chain must observe prosodic vectors");
    chain_.emplace(supra_->chain);
  }
}

FusedScore SpeakerScorer::Components(const FeatureSequence &obs,
                                     const ProsodyTrack *prosody) const {
  FusedScore s;
  const LogEmissionTable table = acoustic_.LogEmissions(obs);
  s.acoustic = acoustic_.Forward(table) / static_cast<double>(obs.size());
  s.value = s.acoustic;
  if (supra_ == nullptr || prosody == nullptr || prosody->size() == 0 ||
      obs.size() < static_cast<std::size_t>(acoustic_.model().order)) {
    s.fallback = true;
    return s;
  }
  try {
    const SegmentMap segs = SegmentsFromPath(acoustic_.Viterbi(table).state_path,
                                             supra_->topology);
    const FeatureSequence pros = ProsodicObservations(segs, *prosody);
    s.num_segments = segs.size();
    s.supra = chain_->Forward(pros) / static_cast<double>(segs.size());
  } catch (const NoValidPath &) {
    s.fallback = true;
  }
  return s;
}

FusedScore SpeakerScorer::Fuse(FusedScore c, FusionWeight w) {
  const double a = w.alpha();
  if (c.fallback || a == 0.0) c.value = c.acoustic;
  else if (a == 1.0) c.value = c.supra;
  else c.value = (1.0 - a) * c.acoustic + a * c.supra;
  return c;
}

FusedScore FusedLogLikelihood(const HmmModel &acoustic, const SuprasegmentalModel &supra,
                              FusionWeight w, const FeatureSequence &obs,
                              const ProsodyTrack &prosody) {
  SpeakerScorer scorer(acoustic, &supra);
  return SpeakerScorer::Fuse(scorer.Components(obs, &prosody), w);
}

FusedScore FusedLogLikelihood(const HmmModel &acoustic, const SuprasegmentalModel &supra,
                              FusionWeight w, const FeatureSequence &obs,
                              const AudioBuffer &audio, const FrameSpec &frames) {
  const ProsodyTrack track = ComputeProsodyTrack(audio, frames);
  return FusedLogLikelihood(acoustic, supra, w, obs, track);
}

void SaveSpeakerModel(const std::string &path, const SpeakerModelFile &model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  WriteContainerHeader(os, model.supra.has_value());
  WriteHmmBlock(os, model.acoustic);
  if (model.supra) {
    const auto &groups = model.supra->topology.groups;
    io::PutU32(os, static_cast<std::uint32_t>(groups.size()));
    for (const auto &g : groups) {
      io::PutU32(os, static_cast<std::uint32_t>(g.size()));
      for (int q : g) io::PutU32(os, static_cast<std::uint32_t>(q));
    }
    WriteHmmBlock(os, model.supra->chain);
  }
  if (!os) throw InvalidInput(path + ": write failed");
}

SpeakerModelFile LoadSpeakerModel(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput(path + ": cannot open model file");
  const bool has_supra = ReadContainerHeader(is, path);
  SpeakerModelFile out;
  out.acoustic = ReadHmmBlock(is, path);
  if (has_supra) {
    SuprasegmentalModel supra;
    const std::uint32_t n_groups = io::GetU32(is, path);
    if (n_groups == 0 || n_groups > 4096) throw InvalidInput(path + ": implausible group count");
    supra.topology.groups.resize(n_groups);
    for (auto &g : supra.topology.groups) {
      const std::uint32_t size = io::GetU32(is, path);
      if (size > 4096) throw InvalidInput(path + ": implausible group size");
      for (std::uint32_t i = 0; i < size; ++i) g.push_back(static_cast<int>(io::GetU32(is, path)));
    }
    supra.topology.Validate(out.acoustic.num_states());
    supra.chain = ReadHmmBlock(is, path);
    out.supra = std::move(supra);
  }
  return out;
}

}  // namespace csphmm
