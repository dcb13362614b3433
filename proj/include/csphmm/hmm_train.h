// include/csphmm/hmm_train.h

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

#ifndef CSPHMM_HMM_TRAIN_H_
#define CSPHMM_HMM_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "csphmm/features.h"
#include "csphmm/hmm_model.h"

namespace csphmm {

struct TrainConfig {
  int max_iters = 20;
  /// Stop once (L_i - L_{i-1}) <= rel_tol * |L_{i-1}|.
  double rel_tol = 1e-4;
  /// Re-estimate psi1 and the startup laws alongside the order-m tensor.
  bool update_initials = true;
  /// Called after every M-step with the 1-based iteration number.
  std::function<void(int, const HmmModel &)> on_iteration;
};

struct TrainResult {
  HmmModel model;
  /// Total log-likelihood of the data: entry 0 under the input model, entry i
  /// under the model after i M-steps.
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

/// EM over the native order-m recursion. Histories and mixture components
/// with zero expected count keep their previous parameters; variances are
/// clamped to the model's variance floor.
TrainResult TrainBaumWelch(const HmmModel &model, std::span<const FeatureSequence> data,
                           const TrainConfig &config = {});

/// Order m -> m + 1 by broadcasting each order-m row over a new, oldest
/// history position. The source's laws become the new startup laws, so the
/// lifted model assigns every sequence the same likelihood.
HmmModel LiftOrder(const HmmModel &lower);

/// Mixes every law row with the uniform law over its allowed successors:
/// p <- (1 - epsilon) p + epsilon u. Keeps rows stochastic and the mask intact.
HmmModel SmoothLaws(const HmmModel &model, double epsilon);

struct InitConfig {
  int num_states = 6;
  int num_mixtures = 4;
  /// Empty selects the circular mask over num_states.
  TopologyMask topology;
  std::uint64_t seed = 1;
  int kmeans_iters = 15;
  /// Variance floor = scale * pooled per-dimension variance, at least min.
  double variance_floor_scale = 1e-3;
  double min_variance_floor = 1e-8;
};

/// Order-1 starting point: k-means over pooled frames picks one cluster per
/// state, clusters are ordered to follow the topology as closely as the
/// hard-assignment transition counts allow, and a second k-means splits each
/// cluster into mixture components.
HmmModel InitializeModel(std::span<const FeatureSequence> data, const InitConfig &config);

struct PipelineResult {
  HmmModel model;
  /// traces[m - 1] is the EM trace of the order-m stage.
  std::vector<std::vector<double>> traces;
};

/// Initialize, train at order 1, then lift and retrain up to target_order.
PipelineResult TrainOrderPipeline(std::span<const FeatureSequence> data,
                                  const InitConfig &init, const TrainConfig &train,
                                  int target_order = 3);

/// Lloyd's k-means with seeded initial centres; returns centres (k x dim)
/// and the assignment of every row.
struct KMeansResult {
  std::vector<double> centers;
  std::vector<int> assignment;
};
KMeansResult KMeans(std::span<const double> rows, std::size_t dim, int k, int iters,
                    std::uint64_t seed);

}  // namespace csphmm

#endif  // CSPHMM_HMM_TRAIN_H_
