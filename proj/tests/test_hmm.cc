// tests/test_hmm.cc

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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "csphmm/error.h"
#include "csphmm/hmm_model.h"
#include "csphmm/hmm_scoring.h"
#include "csphmm/hmm_train.h"
#include "test_util.h"

using namespace csphmm;
using namespace csphmm::testing;

TEST_CASE("history index puts the oldest state first") {
  TransitionTensor t(3, 4);
  const int h[] = {1, 2, 3};
  CHECK(t.HistoryIndex(h) == 1 * 16 + 2 * 4 + 3);
  CHECK(t.LastState(t.HistoryIndex(h)) == 3);
  CHECK(t.num_histories() == 64);
}

TEST_CASE("circular mask allows self loop and the next state only") {
  const TopologyMask mask = TopologyMask::Circular(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(mask.allowed(i, j) == (j == i || j == (i + 1) % 4));
  const auto u = TransitionTensor::Uniform(2, mask);
  for (std::size_t h = 0; h < u.num_histories(); ++h) {
    const int last = u.LastState(h);
    CHECK(u(h, last) == 0.5);
    CHECK(u(h, (last + 1) % 4) == 0.5);
  }
}

TEST_CASE("model validation rejects broken laws") {
  HmmModel m = RandomModel(2, 3, 2, 1, 7, true);
  CHECK_NOTHROW(m.Validate());
  HmmModel bad = m;
  bad.transitions(0, 0) += 0.1;
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
  bad = m;
  bad.transitions(0, 2) = 0.0;  // masked entry, row rescaled
  bad.transitions(0, 0) = 0.4;
  bad.transitions(0, 1) = 0.4;
  bad.transitions(0, 2) = 0.2;
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
  bad = m;
  bad.emissions.states[1].variances[0] = 1e-6;
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
  bad = m;
  bad.initials.startup2 = TransitionTensor();
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
}

TEST_CASE("joint log probability matches the reference product") {
  for (int order = 1; order <= 3; ++order) {
    const HmmModel m = RandomModel(order, 3, 2, 2, 100 + order);
    const FeatureSequence obs = RandomObs(6, 2, 5);
    const std::vector<int> path = {0, 2, 1, 1, 0, 2};
    CHECK(RelDiff(JointLogProb(m, path, obs), RefJoint(m, path, obs)) < 1e-12);
  }
}

TEST_CASE("forward and Viterbi agree with exhaustive path enumeration") {
  int cases = 0;
  for (int order = 1; order <= 3; ++order) {
    for (int n = 2; n <= 3; ++n) {
      for (int t = 1; t <= 6; ++t) {
        const std::uint64_t seed = 1000 * order + 100 * n + t;
        const HmmModel m = RandomModel(order, n, 2, 2, seed, n == 3 && t % 2 == 0);
        const FeatureSequence obs = RandomObs(t, 2, seed + 1);
        std::vector<double> all;
        double best = -INFINITY;
        std::vector<int> best_path;
        ForEachPath(n, t, [&](const std::vector<int> &p) {
          const double lp = RefJoint(m, p, obs);
          all.push_back(lp);
          if (lp > best) {
            best = lp;
            best_path = p;
          }
        });
        const double ref = LogSumExp(all);
        CHECK(std::abs(ForwardLogLikelihood(m, obs) - ref) < 1e-9);
        if (t < order) {
          CHECK_THROWS_AS(ViterbiAlign(m, obs), InvalidInput);
        } else {
          const Alignment a = ViterbiAlign(m, obs);
          CHECK(a.state_path == best_path);
          CHECK(std::abs(a.log_prob - best) < 1e-9);
          CHECK(a.log_prob <= ref);
        }
        ++cases;
      }
    }
  }
  CHECK(cases == 36);
}

TEST_CASE("Viterbi breaks ties toward lower state indices") {
  HmmModel m = RandomModel(2, 3, 1, 1, 3);
  for (int q = 1; q < 3; ++q) m.emissions.states[q] = m.emissions.states[0];
  m.initials.psi1.assign(3, 1.0 / 3);
  m.initials.startup2 = TransitionTensor::Uniform(1, m.topology);
  m.transitions = TransitionTensor::Uniform(2, m.topology);
  const Alignment a = ViterbiAlign(m, RandomObs(5, 1, 2));
  CHECK(a.state_path == std::vector<int>(5, 0));
}

TEST_CASE("first-order expansion preserves the likelihood") {
  for (int order = 2; order <= 3; ++order) {
    for (int n = 2; n <= 4; ++n) {
      const std::uint64_t seed = 31 * order + n;
      const HmmModel m = RandomModel(order, n, 3, 2, seed, n == 4, 0.2);
      const HmmModel e = ExpandToFirstOrder(m);
      CHECK(e.order == 1);
      std::size_t expect = 0, layer = 1;
      for (int l = 1; l <= order; ++l) expect += (layer *= n);
      CHECK(e.num_states() == static_cast<int>(expect));
      CHECK(ExpandedFullHistoryOffset(n, order) == expect - layer);
      CHECK_NOTHROW(e.Validate());
      for (int t = 1; t <= 9; t += 2) {
        const FeatureSequence obs = RandomObs(t, 3, seed + t);
        const double native = ForwardLogLikelihood(m, obs);
        CHECK(RelDiff(native, ForwardLogLikelihood(e, obs)) < 1e-10);
        // Dense reference forward on the expanded chain.
        CHECK(RelDiff(native, RefForwardOrder1(e, obs)) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(ExpandToFirstOrder(RandomModel(1, 2, 1, 1, 1)), InvalidInput);
}

TEST_CASE("normalized log likelihood divides by the frame count") {
  const HmmModel m = RandomModel(3, 3, 2, 1, 17);
  const FeatureSequence obs = RandomObs(8, 2, 4);
  CHECK(NormalizedLogLikelihood(m, obs) == doctest::Approx(ForwardLogLikelihood(m, obs) / 8).epsilon(1e-14));
  const FeatureSequence one = RandomObs(1, 2, 4);
  std::vector<double> terms;
  for (int q = 0; q < 3; ++q)
    terms.push_back(std::log(m.initials.psi1[q]) +
                    RefLogDensity(m.emissions.states[q], one.frame(0).data(), 2));
  CHECK(std::abs(NormalizedLogLikelihood(m, one) - LogSumExp(terms)) < 1e-12);
}

TEST_CASE("scoring rejects mismatched or empty observations") {
  const HmmModel m = RandomModel(2, 3, 2, 1, 17);
  CHECK_THROWS_AS(ForwardLogLikelihood(m, RandomObs(4, 3, 1)), InvalidInput);
  CHECK_THROWS_AS(ForwardLogLikelihood(m, FeatureSequence(2)), InvalidInput);
  std::vector<double> v = {0.0, NAN};
  CHECK_THROWS_AS(ForwardLogLikelihood(m, FeatureSequence(2, v)), InvalidInput);
}

TEST_CASE("lifting an order keeps every likelihood") {
  for (int seed = 0; seed < 6; ++seed) {
    for (int order = 1; order <= 2; ++order) {
      const HmmModel low = RandomModel(order, 3, 2, 2, 500 + seed, seed % 2 == 0);
      const HmmModel high = LiftOrder(low);
      CHECK(high.order == order + 1);
      CHECK_NOTHROW(high.Validate());
      for (int t = 1; t <= 8; t += 3) {
        const FeatureSequence obs = RandomObs(t, 2, seed * 10 + t);
        CHECK(RelDiff(ForwardLogLikelihood(low, obs), ForwardLogLikelihood(high, obs)) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(LiftOrder(RandomModel(3, 2, 1, 1, 1)), InvalidInput);
}

TEST_CASE("law smoothing keeps rows stochastic and inside the mask") {
  const HmmModel m = RandomModel(3, 4, 1, 1, 9, true, 0.5);
  CHECK(SmoothLaws(m, 0.0) == m);
  const HmmModel s = SmoothLaws(m, 0.25);
  CHECK(ModelInvariantViolation(s).empty());
  const HmmModel u = SmoothLaws(m, 1.0);
  CHECK(u.transitions == TransitionTensor::Uniform(3, m.topology));
  for (double p : u.initials.psi1) CHECK(p == doctest::Approx(0.25));
  CHECK_THROWS_AS(SmoothLaws(m, 1.5), InvalidInput);
}

namespace {

std::vector<FeatureSequence> SampleData(const HmmModel &m, int count, std::size_t len,
                                        std::uint64_t seed) {
  std::vector<FeatureSequence> data;
  for (int i = 0; i < count; ++i) data.push_back(SampleSequence(m, len, seed + i).second);
  return data;
}

// Runs EM and checks the invariants after every M-step.
TrainResult CheckedTrain(const HmmModel &init, const std::vector<FeatureSequence> &data,
                         TrainConfig config) {
  int violations = 0;
  config.on_iteration = [&](int, const HmmModel &m) {
    if (!ModelInvariantViolation(m).empty()) ++violations;
    if (m.topology != init.topology) ++violations;
  };
  TrainResult r = TrainBaumWelch(init, data, config);
  CHECK(violations == 0);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] - 1e-8);
  return r;
}

}  // namespace

TEST_CASE("Baum-Welch raises the likelihood and keeps invariants") {
  for (int order = 1; order <= 3; ++order) {
    for (int k = 1; k <= 2; ++k) {
      const HmmModel truth = RandomModel(order, 3, 2, k, 40 + order * 3 + k, true);
      const auto data = SampleData(truth, 8, 30, 900 + order);
      const HmmModel init = RandomModel(order, 3, 2, k, 77 + order + k, true);
      TrainConfig cfg;
      cfg.max_iters = 6;
      cfg.rel_tol = 0.0;
      const TrainResult r = CheckedTrain(init, data, cfg);
      double l0 = 0.0;
      for (const auto &o : data) l0 += ForwardLogLikelihood(init, o);
      CHECK(RelDiff(r.trace.front(), l0) < 1e-10);
      double lend = 0.0;
      for (const auto &o : data) lend += ForwardLogLikelihood(r.model, o);
      CHECK(RelDiff(r.trace.back(), lend) < 1e-10);
      CHECK(r.trace.back() > r.trace.front());
      CHECK(r.iterations == 6);
    }
  }
}

TEST_CASE("unvisited histories keep their prior rows") {
  // Under the ring mask a history such as (0, 2, 1) can never occur.
  const HmmModel truth = RandomModel(3, 3, 1, 1, 5, true);
  const auto data = SampleData(truth, 4, 25, 11);
  const HmmModel init = RandomModel(3, 3, 1, 1, 6, true);
  TrainConfig cfg;
  cfg.max_iters = 3;
  const TrainResult r = CheckedTrain(init, data, cfg);
  const int h[] = {0, 2, 1};
  const std::size_t idx = init.transitions.HistoryIndex(h);
  for (int j = 0; j < 3; ++j) CHECK(r.model.transitions(idx, j) == init.transitions(idx, j));
}

TEST_CASE("initial laws stay fixed when not updated") {
  const HmmModel truth = RandomModel(2, 3, 2, 1, 15, true);
  const auto data = SampleData(truth, 5, 20, 3);
  const HmmModel init = RandomModel(2, 3, 2, 1, 16, true);
  TrainConfig cfg;
  cfg.max_iters = 3;
  cfg.update_initials = false;
  const TrainResult r = CheckedTrain(init, data, cfg);
  CHECK(r.model.initials == init.initials);
  CHECK(r.model.transitions != init.transitions);
}

TEST_CASE("variance floor holds on degenerate data") {
  std::vector<FeatureSequence> data;
  for (int i = 0; i < 3; ++i) data.push_back(FeatureSequence(1, std::vector<double>(20, 1.0)));
  HmmModel init = RandomModel(1, 2, 1, 2, 2, true);
  init.emissions.variance_floor = {0.01};
  TrainConfig cfg;
  cfg.max_iters = 5;
  const TrainResult r = CheckedTrain(init, data, cfg);
  for (const auto &g : r.model.emissions.states)
    for (double v : g.variances) CHECK(v >= 0.01);
}

TEST_CASE("training rejects empty data") {
  const HmmModel init = RandomModel(1, 2, 1, 1, 2);
  std::vector<FeatureSequence> none;
  CHECK_THROWS_AS(TrainBaumWelch(init, none), InvalidInput);
  CHECK_THROWS_AS(TrainBaumWelch(init, std::vector<FeatureSequence>{RandomObs(5, 2, 1)}), InvalidInput);
}

TEST_CASE("k-means is deterministic and assigns every row") {
  std::vector<double> rows;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  for (int i = 0; i < 60; ++i) {
    const double c = (i % 3) * 5.0;
    rows.push_back(c + g(rng));
    rows.push_back(-c + g(rng));
  }
  const KMeansResult a = KMeans(rows, 2, 3, 20, 9), b = KMeans(rows, 2, 3, 20, 9);
  CHECK(a.centers == b.centers);
  CHECK(a.assignment == b.assignment);
  REQUIRE(a.assignment.size() == 60);
  // Rows generated from the same centre share a cluster.
  for (int i = 3; i < 60; ++i) CHECK(a.assignment[i] == a.assignment[i % 3]);
}

TEST_CASE("order pipeline trains a valid third-order model") {
  const HmmModel truth = RandomModel(1, 4, 3, 1, 21, true);
  const auto data = SampleData(truth, 10, 30, 100);
  InitConfig init;
  init.num_states = 4;
  init.num_mixtures = 2;
  TrainConfig train;
  train.max_iters = 4;
  int violations = 0;
  train.on_iteration = [&](int, const HmmModel &m) { violations += !ModelInvariantViolation(m).empty(); };
  const PipelineResult r = TrainOrderPipeline(data, init, train, 3);
  CHECK(violations == 0);
  CHECK(r.model.order == 3);
  REQUIRE(r.traces.size() == 3);
  for (const auto &trace : r.traces)
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-8);
  // Each stage starts where the previous one ended: lifting is exact.
  CHECK(RelDiff(r.traces[1].front(), r.traces[0].back()) < 1e-10);
  CHECK(RelDiff(r.traces[2].front(), r.traces[1].back()) < 1e-10);
  CHECK(r.model.topology == TopologyMask::Circular(4));
}

TEST_CASE("sampling is deterministic in the seed") {
  const HmmModel m = RandomModel(3, 3, 2, 2, 8, true);
  const auto a = SampleSequence(m, 40, 5), b = SampleSequence(m, 40, 5), c = SampleSequence(m, 40, 6);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.second != c.second);
  CHECK(SequenceLogProb(m, a.first) > -INFINITY);
}

TEST_CASE("model files round-trip bit for bit") {
  const auto dir = TempDir("hmm_io");
  const HmmModel m = RandomModel(3, 4, 3, 2, 12, true);
  SaveHmm((dir / "m.shm3").string(), m);
  CHECK(LoadHmm((dir / "m.shm3").string()) == m);

  std::ifstream in(dir / "m.shm3", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(dir / "short.shm3", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(LoadHmm((dir / "short.shm3").string()), InvalidInput);
  std::string bad = bytes;
  bad[0] = 'X';
  std::ofstream(dir / "magic.shm3", std::ios::binary) << bad;
  CHECK_THROWS_AS(LoadHmm((dir / "magic.shm3").string()), InvalidInput);
  CHECK_THROWS_AS(LoadHmm((dir / "missing.shm3").string()), InvalidInput);
}

namespace {

// Single-state model: one Gaussian at the origin with unit variance.
HmmModel SingleState(int order, int dim) {
  EmissionModel e;
  e.dim = dim;
  e.variance_floor.assign(dim, 1e-3);
  e.states.push_back({{1.0}, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)});
  return MakeUniformModel(order, TopologyMask::Circular(1), e);
}

// Deterministic ring 0 -> 1 -> ... -> N-1 -> 0 starting in state 0.
HmmModel Cycle(int n, int order) {
  const TopologyMask mask(n, true);
  std::mt19937_64 rng(1);
  HmmModel m = MakeUniformModel(order, mask, RandomEmissions(n, 1, 1, rng));
  m.initials.psi1.assign(n, 0.0);
  m.initials.psi1[0] = 1.0;
  auto fill = [n](TransitionTensor &t) {
    for (std::size_t h = 0; h < t.num_histories(); ++h)
      for (int j = 0; j < n; ++j) t(h, j) = j == (t.LastState(h) + 1) % n ? 1.0 : 0.0;
  };
  if (order >= 2) fill(m.initials.startup2);
  if (order == 3) fill(m.initials.startup3);
  fill(m.transitions);
  return m;
}

}  // namespace

TEST_CASE("single-state models have one forced path") {
  const HmmModel m = SingleState(3, 2);
  const std::vector<int> zeros(4, 0);
  CHECK(SequenceLogProb(m, zeros) == 0.0);
  const FeatureSequence obs = RandomObs(4, 2, 8);
  const double joint = JointLogProb(m, zeros, obs);
  CHECK(std::abs(ForwardLogLikelihood(m, obs) - joint) < 1e-12);
  CHECK(ViterbiAlign(m, obs).state_path == zeros);
  // Three frames each at density p.
  const FeatureSequence origin(2, std::vector<double>(6, 0.0));
  const double logp = -std::log(2.0 * M_PI);
  CHECK(std::abs(JointLogProb(m, std::vector<int>(3, 0), origin) - 3 * logp) < 1e-12);
  // Repeating the sequence leaves the per-frame score unchanged.
  std::vector<double> twice = obs.values();
  twice.insert(twice.end(), obs.values().begin(), obs.values().end());
  CHECK(std::abs(NormalizedLogLikelihood(m, FeatureSequence(2, twice)) -
                 NormalizedLogLikelihood(m, obs)) < 1e-12);
}

TEST_CASE("uniform third-order model on two states") {
  EmissionModel e = RandomModel(1, 2, 1, 1, 1).emissions;
  const HmmModel m = MakeUniformModel(3, TopologyMask::Full(2), e);
  CHECK(std::abs(SequenceLogProb(m, std::vector<int>(5, 0)) - 5 * std::log(0.5)) < 1e-15);
  // A path that leaves the ring is impossible.
  const HmmModel ring = RandomModel(2, 3, 1, 1, 2, true);
  CHECK(SequenceLogProb(ring, std::vector<int>{0, 2, 1}) == kLogZero);
  CHECK(JointLogProb(ring, std::vector<int>{0, 2, 1}, RandomObs(3, 1, 1)) == kLogZero);
}

TEST_CASE("broadcast third-order tensor scores like its first-order source") {
  const HmmModel low = RandomModel(1, 3, 2, 1, 33);
  const HmmModel high = LiftOrder(LiftOrder(low));
  for (std::size_t h = 0; h < high.transitions.num_histories(); ++h)
    for (int w = 0; w < 3; ++w) CHECK(high.transitions(h, w) == low.transitions(h % 3, w));
  for (int t = 1; t <= 10; ++t) {
    const FeatureSequence obs = RandomObs(t, 2, 70 + t);
    CHECK(RelDiff(ForwardLogLikelihood(high, obs), RefForwardOrder1(low, obs)) < 1e-10);
  }
  const HmmModel uniform = MakeUniformModel(2, TopologyMask::Circular(3), low.emissions);
  CHECK(LiftOrder(uniform).transitions == TransitionTensor::Uniform(3, TopologyMask::Circular(3)));
}

TEST_CASE("second-order expansion on two states") {
  const HmmModel m = RandomModel(2, 2, 1, 1, 4);
  const HmmModel e = ExpandToFirstOrder(m);
  // Two singleton composites, then the four pairs (i, j) at offset 2.
  REQUIRE(e.num_states() == 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k) {
          const double expect = a == j ? m.transitions(i * 2 + j, k) : 0.0;
          CHECK(e.transitions(2 + i * 2 + j, 2 + a * 2 + k) == expect);
        }
}

TEST_CASE("deterministic cycles stay cycles") {
  for (int order = 1; order <= 3; ++order) {
    const HmmModel m = Cycle(3, order);
    const auto path = SampleSequence(m, 10, 1).first;
    for (int t = 0; t < 10; ++t) CHECK(path[t] == t % 3);
    if (order >= 2) {
      // Each reachable composite has exactly one successor with probability 1.
      const HmmModel e = ExpandToFirstOrder(m);
      for (int s = 0; s < e.num_states(); ++s) {
        int ones = 0, nonzero = 0;
        for (int t = 0; t < e.num_states(); ++t) {
          ones += e.transitions(s, t) == 1.0;
          nonzero += e.transitions(s, t) != 0.0;
        }
        CHECK(ones == 1);
        CHECK(nonzero == 1);
      }
    }
  }
}

TEST_CASE("Viterbi follows dominant emissions") {
  HmmModel m = RandomModel(2, 3, 1, 1, 9);
  for (int q = 0; q < 3; ++q) {
    m.emissions.states[q].means = {10.0 * q};
    m.emissions.states[q].variances = {0.01};
  }
  const std::vector<int> want = {2, 0, 0, 1, 2, 1};
  std::vector<double> v;
  for (int q : want) v.push_back(10.0 * q);
  CHECK(ViterbiAlign(m, FeatureSequence(1, v)).state_path == want);
}

TEST_CASE("Viterbi reports an unreachable observation") {
  // The ring forces state 1 at the second frame, whose density underflows.
  HmmModel m = Cycle(2, 1);
  m.emissions.states[0].means = {0.0};
  m.emissions.states[1].means = {1e200};
  CHECK_THROWS_AS(ViterbiAlign(m, FeatureSequence(1, {0.0, 0.0})), NoValidPath);
}

TEST_CASE("zero iterations return the model unchanged") {
  const HmmModel m = RandomModel(2, 3, 2, 1, 3, true);
  TrainConfig cfg;
  cfg.max_iters = 0;
  const TrainResult r = TrainBaumWelch(m, std::vector<FeatureSequence>{RandomObs(6, 2, 1)}, cfg);
  CHECK(r.model == m);
  CHECK(r.trace.size() == 1);
}

TEST_CASE("EM recovers a known two-state transition matrix") {
  EmissionModel e;
  e.dim = 1;
  e.variance_floor = {1e-3};
  e.states.push_back({{1.0}, {-2.0}, {1.0}});
  e.states.push_back({{1.0}, {2.0}, {1.0}});
  HmmModel truth = MakeUniformModel(1, TopologyMask::Full(2), e);
  truth.transitions(0, 0) = 0.8;
  truth.transitions(0, 1) = 0.2;
  truth.transitions(1, 0) = 0.3;
  truth.transitions(1, 1) = 0.7;
  const auto data = SampleData(truth, 200, 50, 4242);
  HmmModel init = truth;
  init.transitions = TransitionTensor::Uniform(1, truth.topology);
  init.emissions.states[0].means = {-1.0};
  init.emissions.states[1].means = {1.0};
  TrainConfig cfg;
  cfg.max_iters = 30;
  const TrainResult r = CheckedTrain(init, data, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    worst = std::max(worst, std::abs(r.model.transitions.values()[i] - truth.transitions.values()[i]));
  CHECK(worst < 0.1);
}

TEST_CASE("sampled transition frequencies match the law") {
  HmmModel m = RandomModel(1, 2, 1, 1, 10);
  m.transitions(0, 0) = 0.65;
  m.transitions(0, 1) = 0.35;
  m.transitions(1, 0) = 0.45;
  m.transitions(1, 1) = 0.55;
  const auto path = SampleSequence(m, 100001, 77).first;
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t t = 1; t < path.size(); ++t) counts[path[t - 1]][path[t]] += 1;
  for (int i = 0; i < 2; ++i) {
    const double row = counts[i][0] + counts[i][1];
    const double p = m.transitions(i, 0);
    // The 0.01 band is at least four binomial standard errors wide.
    CHECK(4.0 * std::sqrt(p * (1.0 - p) / row) < 0.01);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(counts[i][j] / row - m.transitions(i, j)) < 0.01);
  }
}
