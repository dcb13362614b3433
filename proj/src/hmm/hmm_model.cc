// src/hmm/hmm_model.cc

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

#include "csphmm/hmm_model.h"

#include <cmath>
#include <fstream>
#include <numbers>

#include "csphmm/error.h"
#include "hmm/model_container.h"
#include "io/binary_stream.h"

namespace csphmm {

namespace {

std::size_t IntPow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

void CheckDistribution(std::span<const double> p, double tol, const std::string &what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput(what + ": entry outside [0, 1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol)
    throw InvalidInput(what + ": sums to " + std::to_string(sum));
}

}  // namespace

TopologyMask::TopologyMask(int num_states, bool allow_all)
    : n_(num_states),
      allowed_(static_cast<std::size_t>(num_states) * num_states, allow_all ? 1 : 0) {
  if (num_states < 1) throw InvalidInput("topology needs at least one state");
}

TopologyMask TopologyMask::Circular(int num_states) {
  TopologyMask m(num_states, false);
  for (int i = 0; i < num_states; ++i) {
    m.set(i, i, true);
    m.set(i, (i + 1) % num_states, true);
  }
  return m;
}

void TopologyMask::Validate() const {
  if (n_ < 1) throw InvalidInput("topology has no states");
  for (int i = 0; i < n_; ++i) {
    bool any = false;
    for (int j = 0; j < n_; ++j) any = any || allowed(i, j);
    if (!any) throw InvalidInput("state " + std::to_string(i) + " has no allowed successor");
  }
}

TransitionTensor::TransitionTensor(int order, int num_states, double fill)
    : order_(order), n_(num_states), num_histories_(IntPow(num_states, order)) {
  if (order < 1 || order > kMaxOrder) throw InvalidInput("transition order must be 1..3");
  if (num_states < 1) throw InvalidInput("transition tensor needs at least one state");
  values_.assign(num_histories_ * n_, fill);
}

TransitionTensor TransitionTensor::Uniform(int order, const TopologyMask &mask) {
  mask.Validate();
  TransitionTensor t(order, mask.num_states());
  const int n = mask.num_states();
  for (std::size_t h = 0; h < t.num_histories(); ++h) {
    const int last = t.LastState(h);
    int count = 0;
    for (int w = 0; w < n; ++w) count += mask.allowed(last, w);
    for (int w = 0; w < n; ++w)
      if (mask.allowed(last, w)) t(h, w) = 1.0 / count;
  }
  return t;
}

std::size_t TransitionTensor::HistoryIndex(std::span<const int> states) const {
  if (static_cast<int>(states.size()) != order_)
    throw InvalidInput("history length differs from tensor order");
  std::size_t h = 0;
  for (int s : states) {
    if (s < 0 || s >= n_) throw InvalidInput("state index out of range");
    h = h * n_ + s;
  }
  return h;
}

void TransitionTensor::Validate(const TopologyMask &mask, double tol,
                                const std::string &name) const {
  if (mask.num_states() != n_) throw InvalidInput(name + ": state count differs from mask");
  if (values_.size() != num_histories_ * n_) throw InvalidInput(name + ": wrong size");
  for (std::size_t h = 0; h < num_histories_; ++h) {
    const int last = LastState(h);
    for (int w = 0; w < n_; ++w)
      if (!mask.allowed(last, w) && (*this)(h, w) != 0.0)
        throw InvalidInput(name + ": masked transition " + std::to_string(last) +
                           "->" + std::to_string(w) + " is non-zero");
    CheckDistribution(row(h), tol, name + " history " + std::to_string(h));
  }
}

double EmissionModel::LogDensity(int state, std::span<const double> x) const {
  const GaussianMixture &g = states.at(state);
  const int K = g.num_components();
  double best = kLogZero;
  std::vector<double> comp(K);
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double var = g.variances[k * dim + d];
      const double diff = x[d] - g.means[k * dim + d];
      acc += std::log(2.0 * std::numbers::pi * var) + diff * diff / var;
    }
    comp[k] = std::log(g.weights[k]) - 0.5 * acc;
    best = std::max(best, comp[k]);
  }
  if (best == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double c : comp) sum += std::exp(c - best);
  return best + std::log(sum);
}

void HmmModel::Validate(double tol) const {
  if (order < 1 || order > kMaxOrder) throw InvalidInput("model order must be 1..3");
  topology.Validate();
  const int n = num_states();
  if (transitions.order() != order) throw InvalidInput("transition tensor order differs from model order");
  transitions.Validate(topology, tol, "transitions");
  if (static_cast<int>(initials.psi1.size()) != n) throw InvalidInput("psi1 has wrong length");
  CheckDistribution(initials.psi1, tol, "psi1");
  if (order >= 2) {
    if (initials.startup2.order() != 1) throw InvalidInput("startup2 must be order 1");
    initials.startup2.Validate(topology, tol, "startup2");
  } else if (!initials.startup2.empty()) {
    throw InvalidInput("order-1 model carries a startup2 law");
  }
  if (order == 3) {
    if (initials.startup3.order() != 2) throw InvalidInput("startup3 must be order 2");
    initials.startup3.Validate(topology, tol, "startup3");
  } else if (!initials.startup3.empty()) {
    throw InvalidInput("model below order 3 carries a startup3 law");
  }

  if (emissions.num_states() != n) throw InvalidInput("emission state count differs from topology");
  const int D = emissions.dim;
  if (D < 1) throw InvalidInput("emission dimension must be positive");
  if (static_cast<int>(emissions.variance_floor.size()) != D)
    throw InvalidInput("variance floor has wrong length");
  const int K = emissions.num_components();
  if (K < 1) throw InvalidInput("mixtures need at least one component");
  for (int q = 0; q < n; ++q) {
    const GaussianMixture &g = emissions.states[q];
    const std::string where = "state " + std::to_string(q);
    if (g.num_components() != K || g.means.size() != static_cast<std::size_t>(K) * D ||
        g.variances.size() != static_cast<std::size_t>(K) * D)
      throw InvalidInput(where + ": mixture shape mismatch");
    CheckDistribution(g.weights, tol, where + " mixture weights");
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d) {
        if (!std::isfinite(g.means[k * D + d])) throw InvalidInput(where + ": non-finite mean");
        const double v = g.variances[k * D + d];
        if (!std::isfinite(v) || v < emissions.variance_floor[d])
          throw InvalidInput(where + ": variance below floor");
      }
  }
}

HmmModel MakeUniformModel(int order, const TopologyMask &mask, EmissionModel emissions) {
  HmmModel m;
  m.order = order;
  m.topology = mask;
  const int n = mask.num_states();
  m.initials.psi1.assign(n, 1.0 / n);
  if (order >= 2) m.initials.startup2 = TransitionTensor::Uniform(1, mask);
  if (order == 3) m.initials.startup3 = TransitionTensor::Uniform(2, mask);
  m.transitions = TransitionTensor::Uniform(order, mask);
  m.emissions = std::move(emissions);
  return m;
}

namespace {

void PutDoubles(std::ostream &os, const std::vector<double> &v) {
  for (double x : v) io::PutF64(os, x);
}

std::vector<double> GetDoubles(std::istream &is, std::size_t n, const std::string &src) {
  std::vector<double> v(n);
  for (auto &x : v) x = io::GetF64(is, src);
  return v;
}

}  // namespace

void WriteHmmBlock(std::ostream &os, const HmmModel &model) {
  const int n = model.num_states(), D = model.dim(), K = model.num_components();
  io::PutU32(os, static_cast<std::uint32_t>(model.order));
  io::PutU32(os, static_cast<std::uint32_t>(n));
  io::PutU32(os, static_cast<std::uint32_t>(D));
  io::PutU32(os, static_cast<std::uint32_t>(K));
  for (std::uint8_t a : model.topology.raw()) os.put(static_cast<char>(a));
  PutDoubles(os, model.initials.psi1);
  if (model.order >= 2) PutDoubles(os, model.initials.startup2.values());
  if (model.order == 3) PutDoubles(os, model.initials.startup3.values());
  PutDoubles(os, model.transitions.values());
  PutDoubles(os, model.emissions.variance_floor);
  for (const GaussianMixture &g : model.emissions.states) {
    PutDoubles(os, g.weights);
    PutDoubles(os, g.means);
    PutDoubles(os, g.variances);
  }
}

HmmModel ReadHmmBlock(std::istream &is, const std::string &src) {
  HmmModel m;
  m.order = static_cast<int>(io::GetU32(is, src));
  const int n = static_cast<int>(io::GetU32(is, src));
  const int D = static_cast<int>(io::GetU32(is, src));
  const int K = static_cast<int>(io::GetU32(is, src));
  if (m.order < 1 || m.order > kMaxOrder || n < 1 || n > 4096 || D < 1 || K < 1)
    throw InvalidInput(src + ": implausible model header");
  m.topology = TopologyMask(n, false);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int c = is.get();
      if (c == EOF) throw InvalidInput(src + ": truncated topology mask");
      m.topology.set(i, j, c != 0);
    }
  m.initials.psi1 = GetDoubles(is, n, src);
  if (m.order >= 2) {
    m.initials.startup2 = TransitionTensor(1, n);
    m.initials.startup2.values() = GetDoubles(is, m.initials.startup2.values().size(), src);
  }
  if (m.order == 3) {
    m.initials.startup3 = TransitionTensor(2, n);
    m.initials.startup3.values() = GetDoubles(is, m.initials.startup3.values().size(), src);
  }
  m.transitions = TransitionTensor(m.order, n);
  m.transitions.values() = GetDoubles(is, m.transitions.values().size(), src);
  m.emissions.dim = D;
  m.emissions.variance_floor = GetDoubles(is, D, src);
  m.emissions.states.resize(n);
  for (GaussianMixture &g : m.emissions.states) {
    g.weights = GetDoubles(is, K, src);
    g.means = GetDoubles(is, static_cast<std::size_t>(K) * D, src);
    g.variances = GetDoubles(is, static_cast<std::size_t>(K) * D, src);
  }
  m.Validate();
  return m;
}

void WriteContainerHeader(std::ostream &os, bool has_supra) {
  os.write("SHM3", 4);
  io::PutU32(os, kModelFormatVersion);
  io::PutU32(os, has_supra ? 1u : 0u);
}

bool ReadContainerHeader(std::istream &is, const std::string &src) {
  io::ExpectMagic(is, "SHM3", src);
  const std::uint32_t version = io::GetU32(is, src);
  if (version != kModelFormatVersion)
    throw InvalidInput(src + ": unsupported model format version " + std::to_string(version));
  const std::uint32_t flags = io::GetU32(is, src);
  if (flags > 1) throw InvalidInput(src + ": unknown container flags");
  return flags == 1;
}

void SaveHmm(const std::string &path, const HmmModel &model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  WriteContainerHeader(os, false);
  WriteHmmBlock(os, model);
  if (!os) throw InvalidInput(path + ": write failed");
}

HmmModel LoadHmm(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput(path + ": cannot open model file");
  ReadContainerHeader(is, path);
  return ReadHmmBlock(is, path);
}

}  // namespace csphmm
