// tools/run_config.cc

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

#include "run_config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csphmm/error.h"

namespace csphmm::cli {

namespace {

std::string Fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string Fmt(int v) { return std::to_string(v); }
std::string Fmt(bool v) { return v ? "true" : "false"; }

std::string Trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig::RunConfig() {
  const FrameSpec fr;
  const MfccSpec mf;
  const EnrollConfig en;
  const PopulationConfig pop;
  const SynthConfig sy;
  const ProtocolConfig pr;
  auto &v = values_;
  v["paths.output"] = "out";

  v["frames.length_ms"] = Fmt(fr.frame_length_ms);
  v["frames.hop_ms"] = Fmt(fr.frame_hop_ms);
  v["frames.preemphasis"] = Fmt(fr.preemphasis);
  v["frames.window"] = ToString(fr.window);

  v["mfcc.static"] = Fmt(mf.n_static);
  v["mfcc.filters"] = Fmt(mf.n_mel_filters);
  v["mfcc.fft_size"] = Fmt(mf.fft_size);
  v["mfcc.deltas"] = Fmt(mf.include_deltas);
  v["mfcc.delta_window"] = Fmt(mf.delta_window);

  v["model.states"] = Fmt(en.init.num_states);
  v["model.mixtures"] = Fmt(en.init.num_mixtures);
  v["model.order"] = Fmt(en.order);
  v["model.max_iters"] = Fmt(en.train.max_iters);
  v["model.rel_tol"] = Fmt(en.train.rel_tol);
  v["model.variance_floor_scale"] = Fmt(en.init.variance_floor_scale);
  v["model.kmeans_iters"] = Fmt(en.init.kmeans_iters);
  v["model.supra"] = Fmt(en.with_supra);
  v["model.supra_groups"] = Fmt(en.supra_groups);
  v["model.supra_mixtures"] = Fmt(en.supra.num_mixtures);
  v["model.supra_smoothing"] = Fmt(en.supra.law_smoothing);
  v["model.alpha"] = Fmt(pr.weight.alpha());

  v["protocol.sentences"] = Fmt(SplitConfig{}.num_sentences);
  v["protocol.enroll_all_emotions"] = Fmt(false);
  v["protocol.claimants_per_gender"] = Fmt(12);
  v["protocol.background"] = "all";
  v["protocol.adapt"] = Fmt(pr.adapt);
  v["protocol.window"] = Fmt(static_cast<int>(pr.window));
  v["protocol.initial_theta"] = Fmt(pr.initial_theta);

  v["synth.speakers"] = Fmt(pop.num_speakers);
  v["synth.repetitions"] = Fmt(sy.repetitions);
  v["synth.states"] = Fmt(pop.num_states);
  v["synth.dim"] = Fmt(pop.dim);
  v["synth.min_frames"] = Fmt(sy.min_frames);
  v["synth.max_frames"] = Fmt(sy.max_frames);
  v["synth.render_audio"] = Fmt(sy.render_audio);
  v["synth.sample_rate"] = Fmt(sy.sample_rate);
  v["synth.speaker_sd"] = Fmt(pop.speaker_sd);
  v["synth.emotion_scale"] = Fmt(1.0);

  v["run.seed"] = "1";
  v["run.threads"] = "1";
}

void RunConfig::Set(const std::string &key, const std::string &value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown configuration key '" + key + "'");
  it->second = value;
}

void RunConfig::Set(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidInput("expected section.key=value, got '" + assignment + "'");
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void RunConfig::LoadFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput(path + ": cannot open configuration file");
  std::string line, section;
  for (int line_no = 1; std::getline(is, line); ++line_no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidInput(where + "unterminated section header");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput(where + "expected key = value");
    if (section.empty()) throw InvalidInput(where + "key outside any section");
    try {
      Set(section + "." + Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
    } catch (const InvalidInput &e) {
      throw InvalidInput(where + e.what());
    }
  }
}

std::string RunConfig::Str(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown configuration key '" + key + "'");
  return it->second;
}

int RunConfig::Int(const std::string &key, int lo, int hi) const {
  const std::string s = Str(key);
  int v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InvalidInput(key + ": expected an integer, got '" + s + "'");
  if (v < lo || v > hi)
    throw InvalidInput(key + " = " + s + " is outside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  return v;
}

double RunConfig::Real(const std::string &key, double lo, double hi) const {
  const std::string s = Str(key);
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InvalidInput(key + ": expected a number, got '" + s + "'");
  if (!(v >= lo && v <= hi))
    throw InvalidInput(key + " = " + s + " is outside [" + Fmt(lo) + ", " + Fmt(hi) + "]");
  return v;
}

bool RunConfig::Bool(const std::string &key) const {
  const std::string s = Str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidInput(key + ": expected true or false, got '" + s + "'");
}

std::uint64_t RunConfig::Seed() const {
  const std::string s = Str("run.seed");
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InvalidInput("run.seed: expected a non-negative integer, got '" + s + "'");
  return v;
}

FrameSpec RunConfig::Frames() const {
  FrameSpec f;
  f.frame_length_ms = Real("frames.length_ms", 1.0, 1000.0);
  f.frame_hop_ms = Real("frames.hop_ms", 0.1, 1000.0);
  f.preemphasis = Real("frames.preemphasis", 0.0, 1.0);
  f.window = WindowTypeFromString(Str("frames.window"));
  return f;
}

MfccSpec RunConfig::Mfcc() const {
  MfccSpec m;
  m.n_static = Int("mfcc.static", 1, 128);
  m.n_mel_filters = Int("mfcc.filters", 1, 512);
  m.fft_size = Int("mfcc.fft_size", 0, 1 << 20);
  m.include_deltas = Bool("mfcc.deltas");
  m.delta_window = Int("mfcc.delta_window", 1, 16);
  return m;
}

EnrollConfig RunConfig::Enroll() const {
  EnrollConfig e;
  e.init.num_states = Int("model.states", 2, 64);
  e.init.num_mixtures = Int("model.mixtures", 1, 64);
  e.init.variance_floor_scale = Real("model.variance_floor_scale", 0.0, 1.0);
  e.init.kmeans_iters = Int("model.kmeans_iters", 1, 1000);
  e.init.seed = Seed();
  e.order = Int("model.order", 1, kMaxOrder);
  e.train.max_iters = Int("model.max_iters", 0, 10000);
  e.train.rel_tol = Real("model.rel_tol", 0.0, 1.0);
  e.with_supra = Bool("model.supra");
  e.supra_groups = Int("model.supra_groups", 1, 64);
  e.supra.num_mixtures = Int("model.supra_mixtures", 1, 16);
  e.supra.law_smoothing = Real("model.supra_smoothing", 0.0, 1.0);
  e.supra.order = e.order;
  e.supra.train = e.train;
  if (e.supra_groups > e.init.num_states)
    throw InvalidInput("model.supra_groups exceeds model.states");
  return e;
}

SplitConfig RunConfig::Split() const {
  SplitConfig s;
  s.num_sentences = Int("protocol.sentences", 2, 10000);
  s.enroll_all_emotions = Bool("protocol.enroll_all_emotions");
  return s;
}

PopulationConfig RunConfig::Population() const {
  PopulationConfig p;
  p.num_speakers = Int("synth.speakers", 1, 100000);
  p.num_states = Int("synth.states", 2, 64);
  p.dim = Int("synth.dim", 1, 1024);
  p.speaker_sd = Real("synth.speaker_sd", 0.0, 100.0);
  const double scale = Real("synth.emotion_scale", 0.0, 100.0);
  for (auto &[emotion, sev] : p.severity) sev *= scale;
  p.seed = MixSeed(Seed(), 1);
  return p;
}

SynthConfig RunConfig::Synth() const {
  SynthConfig s;
  s.num_sentences = Int("protocol.sentences", 1, 10000);
  s.repetitions = Int("synth.repetitions", 1, 10000);
  s.min_frames = Int("synth.min_frames", 1, 1000000);
  s.max_frames = Int("synth.max_frames", 1, 1000000);
  s.render_audio = Bool("synth.render_audio");
  s.sample_rate = Int("synth.sample_rate", 1000, 384000);
  s.hop_seconds = Frames().frame_hop_ms / 1000.0;
  s.seed = MixSeed(Seed(), 2);
  return s;
}

ProtocolConfig RunConfig::Protocol() const {
  ProtocolConfig p;
  p.weight = FusionWeight(Real("model.alpha", 0.0, 1.0));
  p.adapt = Bool("protocol.adapt");
  p.window = static_cast<std::size_t>(Int("protocol.window", 1, 1000000));
  p.initial_theta = Real("protocol.initial_theta", -1e300, 1e300);
  return p;
}

std::string RunConfig::ToIni() const {
  std::ostringstream os;
  std::string section;
  for (const auto &[key, value] : values_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << value << "\n";
  }
  return os.str();
}

void RunConfig::WriteTo(const std::string &dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream os(std::filesystem::path(dir) / "config.ini");
  if (!os) throw InvalidInput(dir + ": cannot write config.ini");
  os << ToIni();
}

}  // namespace csphmm::cli
