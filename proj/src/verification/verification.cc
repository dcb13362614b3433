// src/verification/verification.cc

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

#include "csphmm/verification.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "csphmm/error.h"

namespace csphmm {

void SpeakerModelSet::Add(const std::string &id, SpeakerModelFile model) {
  if (id.empty()) throw InvalidInput("speaker id must not be empty");
  if (entries_.count(id)) throw InvalidInput("speaker '" + id + "' enrolled twice");
  if (dim_ >= 0 && model.acoustic.dim() != dim_)
    throw InvalidInput("speaker '" + id + "' has feature dimension " +
                       std::to_string(model.acoustic.dim()) + ", expected " + std::to_string(dim_));
  auto entry = std::make_unique<Entry>();
  entry->model = std::move(model);
  entry->scorer = std::make_unique<SpeakerScorer>(
      entry->model.acoustic, entry->model.supra ? &*entry->model.supra : nullptr);
  dim_ = entry->model.acoustic.dim();
  entries_.emplace(id, std::move(entry));
}

void SpeakerModelSet::SetCohort(std::vector<std::string> cohort) {
  if (cohort.empty()) throw InvalidInput("cohort must name at least one speaker");
  for (const auto &id : cohort)
    if (!Contains(id)) throw LookupError("cohort speaker '" + id + "' is not enrolled");
  cohort_ = std::move(cohort);
}

void SpeakerModelSet::SetCohort(const std::string &claimed_id, std::vector<std::string> cohort) {
  if (!Contains(claimed_id)) throw LookupError("unknown speaker '" + claimed_id + "'");
  if (cohort.empty()) throw InvalidInput("cohort of '" + claimed_id + "' is empty");
  for (const auto &id : cohort)
    if (!Contains(id)) throw LookupError("cohort speaker '" + id + "' is not enrolled");
  claim_cohorts_[claimed_id] = std::move(cohort);
}

std::vector<std::string> SpeakerModelSet::Ids() const {
  std::vector<std::string> ids;
  for (const auto &[id, e] : entries_) ids.push_back(id);
  return ids;
}

const SpeakerModelFile &SpeakerModelSet::Model(const std::string &id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw LookupError("unknown speaker '" + id + "'");
  return it->second->model;
}

const SpeakerScorer &SpeakerModelSet::Scorer(const std::string &id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw LookupError("unknown speaker '" + id + "'");
  return *it->second->scorer;
}

std::vector<std::string> SpeakerModelSet::Background(const std::string &claimed_id) const {
  if (auto it = claim_cohorts_.find(claimed_id); it != claim_cohorts_.end()) return it->second;
  if (cohort_) return *cohort_;
  std::vector<std::string> out;
  for (const auto &[id, e] : entries_)
    if (id != claimed_id) out.push_back(id);
  if (out.empty()) throw InvalidInput("no background speakers for claim '" + claimed_id + "'");
  return out;
}

double BackgroundLogLikelihood(std::span<const FusedScore> imposters, FusionWeight w) {
  if (imposters.empty()) throw InvalidInput("background needs at least one imposter model");
  double sum = 0.0;
  for (const FusedScore &s : imposters) sum += SpeakerScorer::Fuse(s, w).value;
  return sum / static_cast<double>(imposters.size());
}

double BackgroundLogLikelihood(std::span<const SpeakerScorer *const> imposters, FusionWeight w,
                               const FeatureSequence &obs, const ProsodyTrack &prosody) {
  std::vector<FusedScore> c;
  c.reserve(imposters.size());
  for (const SpeakerScorer *s : imposters) c.push_back(s->Components(obs, &prosody));
  return BackgroundLogLikelihood(c, w);
}

TrialComponents ScoreTrialComponents(const SpeakerModelSet &set, const Trial &trial) {
  TrialComponents c;
  c.claimant = set.Scorer(trial.claimed_id).Components(trial.obs, &trial.prosody);
  for (const auto &id : set.Background(trial.claimed_id))
    c.background.push_back(set.Scorer(id).Components(trial.obs, &trial.prosody));
  return c;
}

std::vector<TrialComponents> ScoreTrialComponents(const SpeakerModelSet &set,
                                                  std::span<const Trial> trials, int threads) {
  for (const Trial &t : trials)
    if (!set.Contains(t.claimed_id)) throw LookupError("unknown claimed speaker '" + t.claimed_id + "'");
  std::vector<TrialComponents> out(trials.size());
  const std::size_t n_threads =
      std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(trials.size(), 1));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < trials.size(); ++i) out[i] = ScoreTrialComponents(set, trials[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < trials.size(); i += n_threads)
          out[i] = ScoreTrialComponents(set, trials[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

TrialScore CombineComponents(const TrialComponents &c, FusionWeight w) {
  TrialScore s;
  s.claimant_term = SpeakerScorer::Fuse(c.claimant, w).value;
  s.background_term = BackgroundLogLikelihood(c.background, w);
  s.lambda = s.claimant_term - s.background_term;
  return s;
}

TrialScore LlrScore(const SpeakerModelSet &set, const Trial &trial, FusionWeight w) {
  return CombineComponents(ScoreTrialComponents(set, trial), w);
}

bool Decide(double lambda, double theta) { return lambda >= theta; }

Threshold AdaptThreshold(Threshold threshold, double new_score) {
  if (threshold.window < 1) throw InvalidInput("threshold window must be at least 1");
  threshold.history.push_back(new_score);
  while (threshold.history.size() > threshold.window) threshold.history.pop_front();
  double sum = 0.0;
  for (double v : threshold.history) sum += v;
  threshold.theta = sum / static_cast<double>(threshold.history.size());
  return threshold;
}

DetCurve Evaluate(std::span<const LabeledScore> scores) {
  std::vector<double> genuine, imposter;
  for (const auto &s : scores) {
    if (std::isnan(s.lambda)) throw InvalidInput("score is NaN");
    (s.genuine ? genuine : imposter).push_back(s.lambda);
  }
  if (genuine.empty() || imposter.empty())
    throw InvalidInput("evaluation needs at least one genuine and one imposter score");
  std::sort(genuine.begin(), genuine.end());
  std::sort(imposter.begin(), imposter.end());

  std::vector<double> all(genuine);
  all.insert(all.end(), imposter.begin(), imposter.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> thetas{-kInf};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) thetas.push_back(0.5 * (all[i] + all[i + 1]));
  thetas.push_back(kInf);

  DetCurve curve;
  curve.num_genuine = genuine.size();
  curve.num_imposter = imposter.size();
  const double ng = static_cast<double>(genuine.size()), ni = static_cast<double>(imposter.size());
  for (double theta : thetas) {
    const auto imp_below = std::lower_bound(imposter.begin(), imposter.end(), theta) - imposter.begin();
    const auto gen_below = std::lower_bound(genuine.begin(), genuine.end(), theta) - genuine.begin();
    curve.points.push_back({theta, (ni - static_cast<double>(imp_below)) / ni,
                            static_cast<double>(gen_below) / ng});
  }

  const auto &p = curve.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i].far - p[i].frr;
    if (d == 0.0) {
      curve.eer = p[i].far;
      break;
    }
    if (d < 0.0) {
      // i >= 1 because the first point has FAR = 1, FRR = 0.
      const double d_prev = p[i - 1].far - p[i - 1].frr;
      const double t = d_prev / (d_prev - d);
      curve.eer = p[i - 1].far + t * (p[i].far - p[i - 1].far);
      break;
    }
  }
  return curve;
}

ProtocolResult EvaluateProtocol(std::span<const Trial> trials,
                                std::span<const TrialComponents> components,
                                const ProtocolConfig &config) {
  if (trials.size() != components.size())
    throw InvalidInput("trial and component lists must be parallel");
  ProtocolResult r;
  r.log.reserve(trials.size());
  std::map<std::string, Threshold> thresholds;
  std::map<std::string, std::vector<LabeledScore>> groups;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial &trial = trials[i];
    if (!trial.true_id)
      throw InvalidInput("trial " + std::to_string(i) + " has no true speaker label");
    TrialScore s = CombineComponents(components[i], config.weight);
    auto [it, fresh] = thresholds.try_emplace(trial.claimed_id);
    if (fresh) {
      it->second.theta = config.initial_theta;
      it->second.window = config.window;
    }
    s.threshold_used = it->second.theta;
    s.accepted = Decide(s.lambda, s.threshold_used);
    if (config.adapt) it->second = AdaptThreshold(std::move(it->second), s.lambda);
    const LabeledScore ls{s.lambda, trial.genuine()};
    groups[kPooledKey].push_back(ls);
    if (trial.emotion) groups[*trial.emotion].push_back(ls);
    r.log.push_back(s);
  }
  for (const auto &[key, scores] : groups) r.curves[key] = Evaluate(scores);
  return r;
}

ProtocolResult RunProtocol(const SpeakerModelSet &set, std::span<const Trial> trials,
                           const ProtocolConfig &config, int threads) {
  const auto components = ScoreTrialComponents(set, trials, threads);
  return EvaluateProtocol(trials, components, config);
}

namespace {

std::optional<std::string> OptionalString(const nlohmann::json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::vector<TrialSpec> ReadTrialManifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput(path + ": cannot open trial manifest");
  std::vector<TrialSpec> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(is, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw InvalidInput(where + "expected a JSON object");
      TrialSpec t;
      if (!j.contains("claimed_id")) throw InvalidInput(where + "missing claimed_id");
      t.claimed_id = j.at("claimed_id").get<std::string>();
      t.feature_path = j.value("feature_path", std::string());
      t.wav_path = j.value("wav_path", std::string());
      t.prosody_path = j.value("prosody_path", std::string());
      if (t.feature_path.empty() && t.wav_path.empty())
        throw InvalidInput(where + "needs feature_path or wav_path");
      t.true_id = OptionalString(j, "true_id");
      t.emotion = OptionalString(j, "emotion");
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception &e) {
      throw InvalidInput(where + e.what());
    }
  }
  return out;
}

void WriteTrialManifest(const std::string &path, std::span<const TrialSpec> trials) {
  std::ofstream os(path);
  if (!os) throw InvalidInput(path + ": cannot open for writing");
  for (const TrialSpec &t : trials) {
    nlohmann::ordered_json j;
    j["claimed_id"] = t.claimed_id;
    if (!t.feature_path.empty()) j["feature_path"] = t.feature_path;
    if (!t.wav_path.empty()) j["wav_path"] = t.wav_path;
    if (!t.prosody_path.empty()) j["prosody_path"] = t.prosody_path;
    if (t.true_id) j["true_id"] = *t.true_id;
    if (t.emotion) j["emotion"] = *t.emotion;
    os << j.dump() << "\n";
  }
}

void WriteDetTsv(std::ostream &os, const DetCurve &curve) {
  os << "theta\tfar\tfrr\n" << std::setprecision(17);
  for (const DetPoint &p : curve.points) os << p.theta << "\t" << p.far << "\t" << p.frr << "\n";
  os << "# eer\t" << curve.eer << "\n";
}

void WriteDecisionLog(std::ostream &os, std::span<const Trial> trials,
                      std::span<const TrialScore> log) {
  if (trials.size() != log.size()) throw InvalidInput("trial and score lists must be parallel");
  for (std::size_t i = 0; i < trials.size(); ++i) {
    nlohmann::ordered_json j;
    j["trial"] = i;
    j["claimed_id"] = trials[i].claimed_id;
    if (trials[i].true_id) j["true_id"] = *trials[i].true_id;
    if (trials[i].emotion) j["emotion"] = *trials[i].emotion;
    j["lambda"] = log[i].lambda;
    j["claimant_term"] = log[i].claimant_term;
    j["background_term"] = log[i].background_term;
    j["threshold"] = log[i].threshold_used;
    j["decision"] = log[i].accepted ? "accept" : "reject";
    os << j.dump() << "\n";
  }
}

}  // namespace csphmm
