// src/hmm/hmm_train.cc

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

#include "csphmm/hmm_train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csphmm/error.h"
#include "csphmm/hmm_scoring.h"

namespace csphmm {

namespace {

double LogSumExp(std::span<const double> v) {
  double best = kLogZero;
  for (double x : v) best = std::max(best, x);
  if (best == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - best);
  return best + std::log(sum);
}

struct SufficientStats {
  std::vector<double> psi;
  // counts[L]: expected transitions out of length-L composites, N^L x N.
  std::vector<double> counts[kMaxOrder + 1];
  std::vector<double> occ;  // N x K
  std::vector<double> s1;   // N x K x D
  std::vector<double> s2;   // N x K x D
  double total_loglik = 0.0;

  SufficientStats(int n, int m, int K, int D) {
    psi.assign(n, 0.0);
    std::size_t layer = 1;
    for (int L = 1; L <= m; ++L) {
      layer *= n;
      counts[L].assign(layer * n, 0.0);
    }
    occ.assign(static_cast<std::size_t>(n) * K, 0.0);
    s1.assign(static_cast<std::size_t>(n) * K * D, 0.0);
    s2.assign(static_cast<std::size_t>(n) * K * D, 0.0);
  }
};

// Forward-backward over composite histories for one sequence; adds expected
// counts to `stats` and returns the sequence log-likelihood.
double Accumulate(const ModelScorer &scorer, const FeatureSequence &obs,
                  SufficientStats *stats) {
  const HmmModel &model = scorer.model();
  const int n = model.num_states(), m = model.order;
  const int K = model.num_components(), D = model.dim();
  const std::size_t T = obs.size();

  const std::vector<double> comp = scorer.ComponentLogLikes(obs);
  std::vector<double> logb(T * n);
  for (std::size_t i = 0; i < logb.size(); ++i)
    logb[i] = LogSumExp({comp.data() + i * K, static_cast<std::size_t>(K)});

  const auto layer_of = [m](std::size_t t) {
    return static_cast<int>(std::min<std::size_t>(t + 1, m));
  };
  std::vector<std::vector<double>> alpha(T), beta(T);

  alpha[0].resize(n);
  for (int q = 0; q < n; ++q)
    alpha[0][q] = (model.initials.psi1[q] > 0.0 ? std::log(model.initials.psi1[q]) : kLogZero) +
                  logb[q];
  std::vector<double> mx, acc;
  for (std::size_t t = 1; t < T; ++t) {
    const int L = layer_of(t - 1);
    const std::size_t size = scorer.LayerSize(layer_of(t));
    mx.assign(size, kLogZero);
    acc.assign(size, 0.0);
    const auto &prev = alpha[t - 1];
    for (std::size_t h = 0; h < prev.size(); ++h) {
      if (prev[h] == kLogZero) continue;
      for (const auto &a : scorer.Arcs(L, h))
        mx[a.target] = std::max(mx[a.target], prev[h] + a.log_prob);
    }
    for (std::size_t h = 0; h < prev.size(); ++h) {
      if (prev[h] == kLogZero) continue;
      for (const auto &a : scorer.Arcs(L, h))
        acc[a.target] += std::exp(prev[h] + a.log_prob - mx[a.target]);
    }
    alpha[t].assign(size, kLogZero);
    for (std::size_t g = 0; g < size; ++g)
      if (mx[g] != kLogZero) alpha[t][g] = mx[g] + std::log(acc[g]) + logb[t * n + g % n];
  }
  const double loglik = LogSumExp(alpha[T - 1]);
  if (!std::isfinite(loglik)) return loglik;

  beta[T - 1].assign(alpha[T - 1].size(), 0.0);
  std::vector<double> terms;
  for (std::size_t t = T - 1; t-- > 0;) {
    const int L = layer_of(t);
    beta[t].assign(scorer.LayerSize(L), kLogZero);
    for (std::size_t h = 0; h < beta[t].size(); ++h) {
      terms.clear();
      for (const auto &a : scorer.Arcs(L, h))
        terms.push_back(a.log_prob + logb[(t + 1) * n + a.state] + beta[t + 1][a.target]);
      beta[t][h] = LogSumExp(terms);
    }
  }

  for (int q = 0; q < n; ++q)
    stats->psi[q] += std::exp(alpha[0][q] + beta[0][q] - loglik);

  std::vector<double> gamma(n);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      const int L = layer_of(t - 1);
      auto &counts = stats->counts[L];
      const auto &prev = alpha[t - 1];
      for (std::size_t h = 0; h < prev.size(); ++h) {
        if (prev[h] == kLogZero) continue;
        for (const auto &a : scorer.Arcs(L, h)) {
          const double lx = prev[h] + a.log_prob + logb[t * n + a.state] +
                            beta[t][a.target] - loglik;
          if (lx != kLogZero) counts[h * n + a.state] += std::exp(lx);
        }
      }
    }
    std::fill(gamma.begin(), gamma.end(), 0.0);
    for (std::size_t g = 0; g < alpha[t].size(); ++g) {
      const double lg = alpha[t][g] + beta[t][g] - loglik;
      if (lg != kLogZero) gamma[g % n] += std::exp(lg);
    }
    const auto x = obs.frame(t);
    for (int q = 0; q < n; ++q) {
      if (!(gamma[q] > 0.0)) continue;
      const double lb = logb[t * n + q];
      for (int k = 0; k < K; ++k) {
        const double r = gamma[q] * std::exp(comp[(t * n + q) * K + k] - lb);
        if (!(r > 0.0)) continue;
        const std::size_t qk = static_cast<std::size_t>(q) * K + k;
        stats->occ[qk] += r;
        double *s1 = &stats->s1[qk * D];
        double *s2 = &stats->s2[qk * D];
        for (int d = 0; d < D; ++d) {
          s1[d] += r * x[d];
          s2[d] += r * x[d] * x[d];
        }
      }
    }
  }
  return loglik;
}

double EStep(const HmmModel &model, std::span<const FeatureSequence> data,
             SufficientStats *stats) {
  ModelScorer scorer(model);
  double total = 0.0;
  for (const auto &seq : data) total += Accumulate(scorer, seq, stats);
  stats->total_loglik = total;
  return total;
}

void RenormalizeRows(TransitionTensor *law, const std::vector<double> &counts) {
  const int n = law->num_states();
  for (std::size_t h = 0; h < law->num_histories(); ++h) {
    double total = 0.0;
    for (int w = 0; w < n; ++w) total += counts[h * n + w];
    if (!(total > 0.0)) continue;  // unobserved history keeps its row
    for (int w = 0; w < n; ++w) (*law)(h, w) = counts[h * n + w] / total;
  }
}

HmmModel MStep(const HmmModel &model, const SufficientStats &stats, bool update_initials) {
  HmmModel out = model;
  const int n = model.num_states(), m = model.order;
  const int K = model.num_components(), D = model.dim();

  RenormalizeRows(&out.transitions, stats.counts[m]);
  if (update_initials) {
    const double psi_total = std::accumulate(stats.psi.begin(), stats.psi.end(), 0.0);
    if (psi_total > 0.0)
      for (int q = 0; q < n; ++q) out.initials.psi1[q] = stats.psi[q] / psi_total;
    if (m >= 2) RenormalizeRows(&out.initials.startup2, stats.counts[1]);
    if (m == 3) RenormalizeRows(&out.initials.startup3, stats.counts[2]);
  }

  const auto &floor = model.emissions.variance_floor;
  for (int q = 0; q < n; ++q) {
    GaussianMixture &g = out.emissions.states[q];
    double state_occ = 0.0;
    for (int k = 0; k < K; ++k) state_occ += stats.occ[q * K + k];
    if (!(state_occ > 0.0)) continue;
    for (int k = 0; k < K; ++k) {
      const std::size_t qk = static_cast<std::size_t>(q) * K + k;
      const double occ = stats.occ[qk];
      g.weights[k] = occ / state_occ;
      if (!(occ > 0.0)) continue;
      for (int d = 0; d < D; ++d) {
        const double mean = stats.s1[qk * D + d] / occ;
        const double var = stats.s2[qk * D + d] / occ - mean * mean;
        g.means[k * D + d] = mean;
        g.variances[k * D + d] = std::max(var, floor[d]);
      }
    }
  }
  return out;
}

void CheckTrainingData(const HmmModel &model, std::span<const FeatureSequence> data) {
  if (data.empty()) throw InvalidInput("training needs at least one sequence");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<int>(data[i].dim()) != model.dim())
      throw InvalidInput("training sequence " + std::to_string(i) + " has dimension " +
                         std::to_string(data[i].dim()) + ", model expects " +
                         std::to_string(model.dim()));
    if (data[i].size() < static_cast<std::size_t>(model.order) + 1)
      throw InvalidInput("training sequence " + std::to_string(i) +
                         " is shorter than model order + 1");
  }
}

}  // namespace

TrainResult TrainBaumWelch(const HmmModel &model, std::span<const FeatureSequence> data,
                           const TrainConfig &config) {
  model.Validate();
  CheckTrainingData(model, data);
  const int n = model.num_states(), m = model.order;
  const int K = model.num_components(), D = model.dim();

  TrainResult result;
  result.model = model;
  SufficientStats stats(n, m, K, D);
  double prev = EStep(result.model, data, &stats);
  if (!std::isfinite(prev))
    throw NumericFailure("non-finite log-likelihood at iteration 0", 0);
  result.trace.push_back(prev);

  for (int it = 1; it <= config.max_iters; ++it) {
    HmmModel next = MStep(result.model, stats, config.update_initials);
    SufficientStats next_stats(n, m, K, D);
    const double loglik = EStep(next, data, &next_stats);
    if (!std::isfinite(loglik))
      throw NumericFailure("non-finite log-likelihood at iteration " + std::to_string(it), it);
    result.model = std::move(next);
    stats = std::move(next_stats);
    result.trace.push_back(loglik);
    result.iterations = it;
    if (config.on_iteration) config.on_iteration(it, result.model);
    if (loglik - prev <= config.rel_tol * std::abs(prev)) {
      result.converged = true;
      break;
    }
    prev = loglik;
  }
  return result;
}

HmmModel LiftOrder(const HmmModel &lower) {
  if (lower.order < 1 || lower.order >= kMaxOrder)
    throw InvalidInput("lift_order needs a model of order 1 or 2");
  lower.Validate();
  HmmModel out;
  out.order = lower.order + 1;
  out.topology = lower.topology;
  out.emissions = lower.emissions;
  out.initials.psi1 = lower.initials.psi1;
  if (lower.order == 1) {
    out.initials.startup2 = lower.transitions;
  } else {
    out.initials.startup2 = lower.initials.startup2;
    out.initials.startup3 = lower.transitions;
  }
  const int n = lower.num_states();
  out.transitions = TransitionTensor(out.order, n);
  const auto &src = lower.transitions.values();
  auto &dst = out.transitions.values();
  for (int i = 0; i < n; ++i)
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * src.size()));
  return out;
}

HmmModel SmoothLaws(const HmmModel &model, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("smoothing weight must lie in [0, 1]");
  model.Validate();
  HmmModel out = model;
  const int n = model.num_states();
  for (double &p : out.initials.psi1) p = (1.0 - epsilon) * p + epsilon / n;
  for (TransitionTensor *law :
       {&out.transitions, &out.initials.startup2, &out.initials.startup3}) {
    if (law->empty()) continue;
    for (std::size_t h = 0; h < law->num_histories(); ++h) {
      const int last = law->LastState(h);
      int allowed = 0;
      for (int w = 0; w < n; ++w) allowed += model.topology.allowed(last, w);
      for (int w = 0; w < n; ++w)
        if (model.topology.allowed(last, w))
          (*law)(h, w) = (1.0 - epsilon) * (*law)(h, w) + epsilon / allowed;
    }
  }
  return out;
}

KMeansResult KMeans(std::span<const double> rows, std::size_t dim, int k, int iters,
                    std::uint64_t seed) {
  if (dim == 0 || rows.size() % dim != 0) throw InvalidInput("k-means rows are malformed");
  const std::size_t n = rows.size() / dim;
  if (n == 0 || k < 1) throw InvalidInput("k-means needs rows and k >= 1");
  std::mt19937_64 rng(seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < std::min<std::size_t>(k, n); ++i)
    std::swap(order[i], order[i + rng() % (n - i)]);

  KMeansResult r;
  r.centers.resize(static_cast<std::size_t>(k) * dim);
  for (int c = 0; c < k; ++c) {
    const std::size_t row = order[c % n];
    std::copy_n(rows.begin() + row * dim, dim, r.centers.begin() + c * dim);
  }
  r.assignment.assign(n, -1);

  const auto dist2 = [&](std::size_t row, int c) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = rows[row * dim + d] - r.centers[c * dim + d];
      s += diff * diff;
    }
    return s;
  };

  for (int it = 0; it < std::max(iters, 1); ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(i, 0);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(i, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != r.assignment[i]) changed = true;
      r.assignment[i] = best;
    }
    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = r.assignment[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += rows[i * dim + d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        if (n < static_cast<std::size_t>(k)) continue;
        // Re-seed an empty cluster with the row farthest from its centre.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[r.assignment[i]] <= 1) continue;
          const double d = dist2(i, r.assignment[i]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        if (far_d < 0.0) continue;
        --counts[r.assignment[far]];
        for (std::size_t d = 0; d < dim; ++d)
          sums[r.assignment[far] * dim + d] -= rows[far * dim + d];
        r.assignment[far] = c;
        counts[c] = 1;
        for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] = rows[far * dim + d];
        changed = true;
      }
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d) r.centers[c * dim + d] = sums[c * dim + d] / counts[c];
    if (!changed) break;
  }
  return r;
}

namespace {

// Cluster-to-state map maximizing hard-assignment transition counts that the
// topology allows between distinct states; among equal scores (e.g. the
// rotations of a ring) state 0 gets the cluster that most often opens a
// sequence. Exhaustive for small N.
std::vector<int> OrderClusters(const std::vector<double> &counts,
                               const std::vector<double> &first_counts, const TopologyMask &mask) {
  const int n = mask.num_states();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (n > 7) return perm;
  std::vector<int> best = perm;
  double best_score = -1.0, best_first = -1.0;
  do {
    double score = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && mask.allowed(i, j)) score += counts[perm[i] * n + perm[j]];
    const double first = first_counts[perm[0]];
    if (score > best_score || (score == best_score && first > best_first)) {
      best_score = score;
      best_first = first;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

HmmModel InitializeModel(std::span<const FeatureSequence> data, const InitConfig &config) {
  if (data.empty()) throw TrainingDataEmpty("no training sequences");
  const int n = config.num_states, K = config.num_mixtures;
  if (n < 1 || K < 1) throw InvalidInput("need at least one state and one mixture component");
  const TopologyMask mask =
      config.topology.num_states() == 0 ? TopologyMask::Circular(n) : config.topology;
  if (mask.num_states() != n) throw InvalidInput("topology state count differs from num_states");
  mask.Validate();

  const std::size_t D = data.front().dim();
  std::vector<double> pooled;
  for (const auto &seq : data) {
    if (seq.dim() != D) throw InvalidInput("training sequences differ in dimension");
    pooled.insert(pooled.end(), seq.values().begin(), seq.values().end());
  }
  const std::size_t frames = D == 0 ? 0 : pooled.size() / D;
  if (frames == 0) throw TrainingDataEmpty("training sequences contain no frames");

  std::vector<double> mean(D, 0.0), var(D, 0.0);
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t d = 0; d < D; ++d) mean[d] += pooled[i * D + d];
  for (auto &x : mean) x /= frames;
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t d = 0; d < D; ++d) {
      const double diff = pooled[i * D + d] - mean[d];
      var[d] += diff * diff;
    }
  EmissionModel em;
  em.dim = static_cast<int>(D);
  em.variance_floor.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    var[d] /= frames;
    em.variance_floor[d] = std::max(config.variance_floor_scale * var[d], config.min_variance_floor);
  }

  const KMeansResult states = KMeans(pooled, D, n, config.kmeans_iters, config.seed);
  std::vector<double> cluster_counts(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> first_counts(n, 0.0);
  {
    std::size_t offset = 0;
    for (const auto &seq : data) {
      if (seq.size() > 0) first_counts[states.assignment[offset]] += 1.0;
      for (std::size_t t = 1; t < seq.size(); ++t)
        cluster_counts[states.assignment[offset + t - 1] * n + states.assignment[offset + t]] += 1.0;
      offset += seq.size();
    }
  }
  const std::vector<int> perm = OrderClusters(cluster_counts, first_counts, mask);

  em.states.resize(n);
  for (int q = 0; q < n; ++q) {
    std::vector<double> rows;
    for (std::size_t i = 0; i < frames; ++i)
      if (states.assignment[i] == perm[q])
        rows.insert(rows.end(), pooled.begin() + i * D, pooled.begin() + (i + 1) * D);
    GaussianMixture &g = em.states[q];
    g.weights.assign(K, 1.0 / K);
    g.means.assign(static_cast<std::size_t>(K) * D, 0.0);
    g.variances.assign(static_cast<std::size_t>(K) * D, 0.0);
    const std::size_t nrows = rows.size() / D;
    if (nrows == 0) {
      for (int k = 0; k < K; ++k)
        for (std::size_t d = 0; d < D; ++d) {
          g.means[k * D + d] = mean[d];
          g.variances[k * D + d] = std::max(var[d], em.variance_floor[d]);
        }
      continue;
    }
    const KMeansResult comps = KMeans(rows, D, K, config.kmeans_iters, config.seed + 1 + q);
    std::vector<double> cnt(K, 0.0);
    for (std::size_t i = 0; i < nrows; ++i) {
      const int k = comps.assignment[i];
      cnt[k] += 1.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double diff = rows[i * D + d] - comps.centers[k * D + d];
        g.variances[k * D + d] += diff * diff;
      }
    }
    for (int k = 0; k < K; ++k) {
      for (std::size_t d = 0; d < D; ++d) {
        g.means[k * D + d] = comps.centers[k * D + d];
        const double v = cnt[k] >= 2.0 ? g.variances[k * D + d] / cnt[k] : var[d];
        g.variances[k * D + d] = std::max(v, em.variance_floor[d]);
      }
    }
    const double total = std::accumulate(cnt.begin(), cnt.end(), 0.0);
    if (nrows >= static_cast<std::size_t>(K))
      for (int k = 0; k < K; ++k) g.weights[k] = cnt[k] / total;
  }

  HmmModel model = MakeUniformModel(1, mask, std::move(em));
  // Transition start from smoothed hard-assignment counts within the mask.
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    std::vector<double> row(n, 0.0);
    for (int j = 0; j < n; ++j)
      if (mask.allowed(i, j)) {
        row[j] = 1.0 + cluster_counts[perm[i] * n + perm[j]];
        total += row[j];
      }
    for (int j = 0; j < n; ++j) model.transitions(i, j) = row[j] / total;
  }
  return model;
}

PipelineResult TrainOrderPipeline(std::span<const FeatureSequence> data, const InitConfig &init,
                                  const TrainConfig &train, int target_order) {
  if (target_order < 1 || target_order > kMaxOrder)
    throw InvalidInput("target order must be 1..3");
  PipelineResult out;
  HmmModel model = InitializeModel(data, init);
  for (int order = 1; order <= target_order; ++order) {
    if (order > 1) model = LiftOrder(model);
    TrainResult r = TrainBaumWelch(model, data, train);
    model = std::move(r.model);
    out.traces.push_back(std::move(r.trace));
  }
  out.model = std::move(model);
  return out;
}

}  // namespace csphmm
