// include/csphmm/hmm_model.h

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

#ifndef CSPHMM_HMM_MODEL_H_
#define CSPHMM_HMM_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace csphmm {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr int kMaxOrder = 3;

/// Allowed (from, to) state pairs. Every state needs at least one successor.
class TopologyMask {
 public:
  TopologyMask() = default;
  TopologyMask(int num_states, bool allow_all);

  /// Ring topology: each state may stay or advance to (i + 1) mod N.
  static TopologyMask Circular(int num_states);
  static TopologyMask Full(int num_states) { return TopologyMask(num_states, true); }

  int num_states() const { return n_; }
  bool allowed(int from, int to) const { return allowed_[from * n_ + to] != 0; }
  void set(int from, int to, bool allow) { allowed_[from * n_ + to] = allow ? 1 : 0; }
  const std::vector<std::uint8_t> &raw() const { return allowed_; }

  void Validate() const;
  bool operator==(const TopologyMask &) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> allowed_;
};

/// Order-m transition law a_{(h_1..h_m) w}, stored as N^m history rows of N
/// successor probabilities. History indices are base-N numbers with the
/// oldest state most significant.
class TransitionTensor {
 public:
  TransitionTensor() = default;
  TransitionTensor(int order, int num_states, double fill = 0.0);

  /// Each history row uniform over the successors its last state may reach.
  static TransitionTensor Uniform(int order, const TopologyMask &mask);

  int order() const { return order_; }
  int num_states() const { return n_; }
  bool empty() const { return values_.empty(); }
  std::size_t num_histories() const { return num_histories_; }

  double operator()(std::size_t history, int next) const {
    return values_[history * n_ + next];
  }
  double &operator()(std::size_t history, int next) {
    return values_[history * n_ + next];
  }
  std::span<const double> row(std::size_t history) const {
    return {values_.data() + history * n_, static_cast<std::size_t>(n_)};
  }
  std::span<double> row(std::size_t history) {
    return {values_.data() + history * n_, static_cast<std::size_t>(n_)};
  }
  int LastState(std::size_t history) const { return static_cast<int>(history % n_); }
  std::size_t HistoryIndex(std::span<const int> states) const;

  std::vector<double> &values() { return values_; }
  const std::vector<double> &values() const { return values_; }

  /// Row-stochastic within `tol`, entries in [0, 1], zero where the mask
  /// forbids the final step.
  void Validate(const TopologyMask &mask, double tol = 1e-9,
                const std::string &name = "transition tensor") const;
  bool operator==(const TransitionTensor &) const = default;

 private:
  int order_ = 0;
  int n_ = 0;
  std::size_t num_histories_ = 0;
  std::vector<double> values_;
};

/// Laws used before a full order-m history exists: psi1 at t = 1, an
/// order-1 matrix at t = 2 (orders 2 and 3), an order-2 tensor at t = 3
/// (order 3 only). Unused laws are left empty.
struct InitialLaws {
  std::vector<double> psi1;
  TransitionTensor startup2;
  TransitionTensor startup3;

  bool operator==(const InitialLaws &) const = default;
};

/// Diagonal-covariance Gaussian mixture for one state.
struct GaussianMixture {
  std::vector<double> weights;    // K
  std::vector<double> means;      // K x D
  std::vector<double> variances;  // K x D

  int num_components() const { return static_cast<int>(weights.size()); }
  bool operator==(const GaussianMixture &) const = default;
};

struct EmissionModel {
  int dim = 0;
  std::vector<GaussianMixture> states;
  /// Per-dimension lower bound on every variance.
  std::vector<double> variance_floor;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_components() const {
    return states.empty() ? 0 : states.front().num_components();
  }
  /// log b_q(x); slow path that recomputes normalizers on every call.
  double LogDensity(int state, std::span<const double> x) const;
  bool operator==(const EmissionModel &) const = default;
};

struct HmmModel {
  int order = 1;
  TopologyMask topology;
  InitialLaws initials;
  TransitionTensor transitions;
  EmissionModel emissions;

  int num_states() const { return topology.num_states(); }
  int dim() const { return emissions.dim; }
  int num_components() const { return emissions.num_components(); }

  /// Throws InvalidInput naming the first violated invariant.
  void Validate(double tol = 1e-9) const;
  bool operator==(const HmmModel &) const = default;
};

/// A circular model with uniform transitions and the given emissions.
HmmModel MakeUniformModel(int order, const TopologyMask &mask, EmissionModel emissions);

/// Binary HMM block used inside the "SHM3" container.
void WriteHmmBlock(std::ostream &os, const HmmModel &model);
HmmModel ReadHmmBlock(std::istream &is, const std::string &source);

/// Stand-alone "SHM3" file holding one acoustic model.
void SaveHmm(const std::string &path, const HmmModel &model);
HmmModel LoadHmm(const std::string &path);

}  // namespace csphmm

#endif  // CSPHMM_HMM_MODEL_H_
