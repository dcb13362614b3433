// src/hmm/hmm_scoring.cc

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

#include "csphmm/hmm_scoring.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "csphmm/error.h"

namespace csphmm {

namespace {

double LogOrZero(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

double LogSumExp(std::span<const double> v) {
  double best = kLogZero;
  for (double x : v) best = std::max(best, x);
  if (best == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - best);
  return best + std::log(sum);
}

// Transition probability of stepping to path[t] given path[0..t).
double StepProbability(const HmmModel &model, std::span<const int> path, std::size_t t) {
  const int m = model.order;
  const int to = path[t];
  if (m == 1) return model.transitions(path[t - 1], to);
  if (t == 1) return model.initials.startup2(path[0], to);
  if (m == 3 && t == 2) {
    const int hist[2] = {path[0], path[1]};
    return model.initials.startup3(model.initials.startup3.HistoryIndex(hist), to);
  }
  return model.transitions(model.transitions.HistoryIndex(path.subspan(t - m, m)), to);
}

double UniformUnit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int DrawCategorical(std::span<const double> p, std::mt19937_64 &rng) {
  const double u = UniformUnit(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace

ModelScorer::ModelScorer(const HmmModel &model)
    : model_(&model), n_(model.num_states()), m_(model.order) {
  model.Validate();
  for (int L = 1; L <= m_; ++L) layer_size_[L] = layer_size_[L - 1] * n_;

  log_psi1_.resize(n_);
  for (int q = 0; q < n_; ++q) log_psi1_[q] = LogOrZero(model.initials.psi1[q]);

  const std::size_t shift_mod = layer_size_[m_ - 1];
  for (int L = 1; L <= m_; ++L) {
    const TransitionTensor &law = L < m_ ? (L == 1 ? model.initials.startup2
                                                   : model.initials.startup3)
                                         : model.transitions;
    offsets_[L].assign(layer_size_[L] + 1, 0);
    arcs_[L].clear();
    for (std::size_t h = 0; h < layer_size_[L]; ++h) {
      offsets_[L][h] = static_cast<std::uint32_t>(arcs_[L].size());
      const int last = static_cast<int>(h % n_);
      for (int w = 0; w < n_; ++w) {
        const double p = law(h, w);
        if (!(p > 0.0) || !model.topology.allowed(last, w)) continue;
        const std::size_t target = L < m_ ? h * n_ + w : (h % shift_mod) * n_ + w;
        arcs_[L].push_back({static_cast<std::uint32_t>(target), w, std::log(p)});
      }
    }
    offsets_[L][layer_size_[L]] = static_cast<std::uint32_t>(arcs_[L].size());
  }

  const EmissionModel &em = model.emissions;
  const int K = em.num_components(), D = em.dim;
  gconst_.resize(static_cast<std::size_t>(n_) * K);
  inv_var_.resize(static_cast<std::size_t>(n_) * K * D);
  for (int q = 0; q < n_; ++q) {
    const GaussianMixture &g = em.states[q];
    for (int k = 0; k < K; ++k) {
      double logdet = 0.0;
      for (int d = 0; d < D; ++d) {
        const double var = g.variances[k * D + d];
        logdet += std::log(2.0 * std::numbers::pi * var);
        inv_var_[(static_cast<std::size_t>(q) * K + k) * D + d] = 1.0 / var;
      }
      gconst_[q * K + k] = LogOrZero(g.weights[k]) - 0.5 * logdet;
    }
  }
}

std::span<const ModelScorer::Arc> ModelScorer::Arcs(int length, std::size_t composite) const {
  const auto &off = offsets_[length];
  return {arcs_[length].data() + off[composite],
          static_cast<std::size_t>(off[composite + 1] - off[composite])};
}

void ModelScorer::CheckObs(const FeatureSequence &obs) const {
  if (obs.empty()) throw InvalidInput("observation sequence is empty");
  if (static_cast<int>(obs.dim()) != model_->dim())
    throw InvalidInput("observation dimension " + std::to_string(obs.dim()) +
                       " differs from model dimension " + std::to_string(model_->dim()));
  if (!obs.AllFinite()) throw InvalidInput("observation sequence has non-finite entries");
}

std::vector<double> ModelScorer::ComponentLogLikes(const FeatureSequence &obs) const {
  CheckObs(obs);
  const EmissionModel &em = model_->emissions;
  const int K = em.num_components(), D = em.dim;
  const std::size_t T = obs.size();
  std::vector<double> out(T * n_ * K);
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = obs.frame(t);
    for (int q = 0; q < n_; ++q) {
      const GaussianMixture &g = em.states[q];
      for (int k = 0; k < K; ++k) {
        const double *mu = &g.means[k * D];
        const double *iv = &inv_var_[(static_cast<std::size_t>(q) * K + k) * D];
        double acc = 0.0;
        for (int d = 0; d < D; ++d) {
          const double diff = x[d] - mu[d];
          acc += diff * diff * iv[d];
        }
        out[(t * n_ + q) * K + k] = gconst_[q * K + k] - 0.5 * acc;
      }
    }
  }
  return out;
}

LogEmissionTable ModelScorer::LogEmissions(const FeatureSequence &obs) const {
  const std::vector<double> comp = ComponentLogLikes(obs);
  const int K = model_->num_components();
  LogEmissionTable table;
  table.num_frames = obs.size();
  table.num_states = n_;
  table.values.resize(obs.size() * n_);
  for (std::size_t i = 0; i < table.values.size(); ++i)
    table.values[i] = LogSumExp({comp.data() + i * K, static_cast<std::size_t>(K)});
  return table;
}

double ModelScorer::Forward(const FeatureSequence &obs) const {
  return Forward(LogEmissions(obs));
}

double ModelScorer::Forward(const LogEmissionTable &table) const {
  const std::size_t T = table.num_frames;
  if (T == 0) throw InvalidInput("observation sequence is empty");
  std::vector<double> alpha(n_), next, mx, acc;
  for (int q = 0; q < n_; ++q) alpha[q] = log_psi1_[q] + table(0, q);

  for (std::size_t t = 1; t < T; ++t) {
    const int L = static_cast<int>(std::min<std::size_t>(t, m_));
    const int L_next = std::min(L + 1, m_);
    const std::size_t size = layer_size_[L_next];
    mx.assign(size, kLogZero);
    acc.assign(size, 0.0);
    for (std::size_t h = 0; h < layer_size_[L]; ++h) {
      if (alpha[h] == kLogZero) continue;
      for (const Arc &a : Arcs(L, h))
        mx[a.target] = std::max(mx[a.target], alpha[h] + a.log_prob);
    }
    for (std::size_t h = 0; h < layer_size_[L]; ++h) {
      if (alpha[h] == kLogZero) continue;
      for (const Arc &a : Arcs(L, h))
        acc[a.target] += std::exp(alpha[h] + a.log_prob - mx[a.target]);
    }
    next.assign(size, kLogZero);
    for (std::size_t g = 0; g < size; ++g)
      if (mx[g] != kLogZero) next[g] = mx[g] + std::log(acc[g]) + table(t, static_cast<int>(g % n_));
    alpha.swap(next);
  }
  return LogSumExp(alpha);
}

Alignment ModelScorer::Viterbi(const FeatureSequence &obs) const {
  CheckObs(obs);
  if (obs.size() < static_cast<std::size_t>(m_))
    throw InvalidInput("Viterbi needs at least as many frames as the model order");
  return Viterbi(LogEmissions(obs));
}

Alignment ModelScorer::Viterbi(const LogEmissionTable &table) const {
  const std::size_t T = table.num_frames;
  if (T == 0) throw InvalidInput("observation sequence is empty");
  std::vector<double> delta(n_), next;
  std::vector<std::vector<std::uint32_t>> back(T);
  for (int q = 0; q < n_; ++q) delta[q] = log_psi1_[q] + table(0, q);

  for (std::size_t t = 1; t < T; ++t) {
    const int L = static_cast<int>(std::min<std::size_t>(t, m_));
    const int L_next = std::min(L + 1, m_);
    const std::size_t size = layer_size_[L_next];
    next.assign(size, kLogZero);
    back[t].assign(size, 0);
    // Ascending source order with strict improvement keeps the lowest index on ties.
    for (std::size_t h = 0; h < layer_size_[L]; ++h) {
      if (delta[h] == kLogZero) continue;
      for (const Arc &a : Arcs(L, h)) {
        const double v = delta[h] + a.log_prob;
        if (v > next[a.target]) {
          next[a.target] = v;
          back[t][a.target] = static_cast<std::uint32_t>(h);
        }
      }
    }
    for (std::size_t g = 0; g < size; ++g)
      if (next[g] != kLogZero) next[g] += table(t, static_cast<int>(g % n_));
    delta.swap(next);
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < delta.size(); ++g)
    if (delta[g] > delta[best]) best = g;
  if (delta[best] == kLogZero) throw NoValidPath("no state path has non-zero probability");

  Alignment out;
  out.log_prob = delta[best];
  out.state_path.resize(T);
  std::size_t composite = best;
  for (std::size_t t = T; t-- > 0;) {
    out.state_path[t] = static_cast<int>(composite % n_);
    if (t > 0) composite = back[t][composite];
  }
  return out;
}

double SequenceLogProb(const HmmModel &model, std::span<const int> path) {
  if (path.empty()) throw InvalidInput("state path is empty");
  const int n = model.num_states();
  for (int q : path)
    if (q < 0 || q >= n) throw InvalidInput("state index " + std::to_string(q) + " out of range");
  double lp = LogOrZero(model.initials.psi1[path[0]]);
  for (std::size_t t = 1; t < path.size() && lp != kLogZero; ++t) {
    if (!model.topology.allowed(path[t - 1], path[t])) return kLogZero;
    lp += LogOrZero(StepProbability(model, path, t));
  }
  return lp;
}

double JointLogProb(const HmmModel &model, std::span<const int> path,
                    const FeatureSequence &obs) {
  if (path.size() != obs.size()) throw InvalidInput("path and observation lengths differ");
  if (static_cast<int>(obs.dim()) != model.dim())
    throw InvalidInput("observation dimension differs from model dimension");
  double lp = SequenceLogProb(model, path);
  if (lp == kLogZero) return kLogZero;
  for (std::size_t t = 0; t < path.size(); ++t)
    lp += model.emissions.LogDensity(path[t], obs.frame(t));
  return lp;
}

double ForwardLogLikelihood(const HmmModel &model, const FeatureSequence &obs) {
  ModelScorer scorer(model);
  return scorer.Forward(obs);
}

Alignment ViterbiAlign(const HmmModel &model, const FeatureSequence &obs) {
  ModelScorer scorer(model);
  return scorer.Viterbi(obs);
}

double NormalizedLogLikelihood(const HmmModel &model, const FeatureSequence &obs) {
  return ForwardLogLikelihood(model, obs) / static_cast<double>(obs.size());
}

std::size_t ExpandedFullHistoryOffset(int num_states, int order) {
  std::size_t offset = 0, layer = 1;
  for (int L = 1; L < order; ++L) {
    layer *= num_states;
    offset += layer;
  }
  return offset;
}

HmmModel ExpandToFirstOrder(const HmmModel &model) {
  if (model.order < 2) throw InvalidInput("expansion needs a model of order 2 or 3");
  model.Validate();
  const int n = model.num_states(), m = model.order;

  std::size_t layer_size[kMaxOrder + 1] = {1, 0, 0, 0};
  std::size_t layer_offset[kMaxOrder + 1] = {0, 0, 0, 0};
  std::size_t total = 0;
  for (int L = 1; L <= m; ++L) {
    layer_size[L] = layer_size[L - 1] * n;
    layer_offset[L] = total;
    total += layer_size[L];
  }
  const int N = static_cast<int>(total);

  HmmModel out;
  out.order = 1;
  out.topology = TopologyMask(N, false);
  out.transitions = TransitionTensor(1, N);
  out.initials.psi1.assign(N, 0.0);
  for (int q = 0; q < n; ++q) out.initials.psi1[layer_offset[1] + q] = model.initials.psi1[q];

  for (int L = 1; L <= m; ++L) {
    const TransitionTensor &law = L < m ? (L == 1 ? model.initials.startup2
                                                  : model.initials.startup3)
                                        : model.transitions;
    const int L_next = std::min(L + 1, m);
    for (std::size_t h = 0; h < layer_size[L]; ++h) {
      const std::size_t from = layer_offset[L] + h;
      for (int w = 0; w < n; ++w) {
        const double p = law(h, w);
        if (p == 0.0) continue;
        const std::size_t target =
            L < m ? h * n + w : (h % layer_size[m - 1]) * n + w;
        const std::size_t to = layer_offset[L_next] + target;
        out.transitions(from, static_cast<int>(to)) = p;
        out.topology.set(static_cast<int>(from), static_cast<int>(to), true);
      }
    }
  }

  out.emissions.dim = model.emissions.dim;
  out.emissions.variance_floor = model.emissions.variance_floor;
  out.emissions.states.reserve(N);
  for (int L = 1; L <= m; ++L)
    for (std::size_t h = 0; h < layer_size[L]; ++h)
      out.emissions.states.push_back(model.emissions.states[h % n]);
  return out;
}

std::pair<std::vector<int>, FeatureSequence> SampleSequence(const HmmModel &model,
                                                            std::size_t length,
                                                            std::uint64_t seed) {
  if (length < 1) throw InvalidInput("sample length must be at least 1");
  model.Validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int D = model.dim();

  std::vector<int> path;
  path.reserve(length);
  path.push_back(DrawCategorical(model.initials.psi1, rng));
  const int m = model.order;
  for (std::size_t t = 1; t < length; ++t) {
    std::span<const double> row;
    if (m == 1) {
      row = model.transitions.row(path[t - 1]);
    } else if (t == 1) {
      row = model.initials.startup2.row(path[0]);
    } else if (m == 3 && t == 2) {
      row = model.initials.startup3.row(path[0] * model.num_states() + path[1]);
    } else {
      row = model.transitions.row(model.transitions.HistoryIndex(
          std::span<const int>(path).subspan(t - m, m)));
    }
    path.push_back(DrawCategorical(row, rng));
  }

  FeatureSequence obs(D);
  std::vector<double> x(D);
  for (std::size_t t = 0; t < length; ++t) {
    const GaussianMixture &g = model.emissions.states[path[t]];
    const int k = DrawCategorical(g.weights, rng);
    for (int d = 0; d < D; ++d)
      x[d] = g.means[k * D + d] + std::sqrt(g.variances[k * D + d]) * gauss(rng);
    obs.PushBack(x);
  }
  return {std::move(path), std::move(obs)};
}

}  // namespace csphmm
