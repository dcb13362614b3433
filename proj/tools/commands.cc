// tools/commands.cc

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

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "csphmm/audio_io.h"
#include "csphmm/corpus.h"
#include "csphmm/error.h"
#include "csphmm/experiment.h"
#include "csphmm/stats.h"
#include "csphmm/verification.h"
#include "run_config.h"

namespace fs = std::filesystem;

namespace csphmm::cli {

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
};

RunConfig Resolve(const Common &c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg.LoadFile(c.config_path);
  for (const auto &s : c.sets) cfg.Set(s);
  if (!c.out.empty()) cfg.Set("paths.output", c.out);
  return cfg;
}

// The only environment input: a root for relative output directories.
fs::path OutputDir(const RunConfig &cfg) {
  fs::path out = cfg.Str("paths.output");
  if (const char *root = std::getenv("CSPHMM_OUTPUT_ROOT"); root && *root && out.is_relative())
    out = fs::path(root) / out;
  return out;
}

fs::path Resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string UtteranceStem(const UtteranceRecord &r) {
  return r.speaker_id + "/" + r.emotion + "/s" + std::to_string(r.sentence_id) + "_r" +
         std::to_string(r.repetition);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the error
// of the lowest failing index so failures do not depend on scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto &t : pool) t.join();
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

void WriteCurves(const fs::path &dir, const std::map<std::string, DetCurve> &curves,
                 std::ostream &out) {
  std::ofstream summary(dir / "summary.tsv");
  summary << "group\teer\tgenuine\timposter\n" << std::setprecision(17);
  for (const auto &[group, curve] : curves) {
    std::ofstream tsv(dir / ("det_" + group + ".tsv"));
    WriteDetTsv(tsv, curve);
    summary << group << "\t" << curve.eer << "\t" << curve.num_genuine << "\t"
            << curve.num_imposter << "\n";
    out << "eer\t" << group << "\t" << std::setprecision(6) << curve.eer << "\n";
  }
}

int CmdSynth(const RunConfig &cfg, std::ostream &out) {
  const fs::path dir = OutputDir(cfg);
  const auto specs = DefaultPopulation(cfg.Population());
  const SynthConfig sc = cfg.Synth();
  auto corpus = SynthesizeCorpus(specs, sc);
  fs::create_directories(dir);

  std::vector<UtteranceRecord> records;
  for (auto &u : corpus) {
    UtteranceRecord r = u.record;
    const std::string stem = UtteranceStem(r);
    r.feature_path = "features/" + stem + ".shf";
    r.prosody_path = "features/" + stem + ".pros.shf";
    fs::create_directories((dir / r.feature_path).parent_path());
    WriteFeatureFile((dir / r.feature_path).string(), u.features);
    WriteProsodyFile((dir / r.prosody_path).string(), u.prosody);
    if (u.audio) {
      r.audio_path = "audio/" + stem + ".wav";
      fs::create_directories((dir / r.audio_path).parent_path());
      WriteWav((dir / r.audio_path).string(), *u.audio);
    }
    records.push_back(std::move(r));
  }
  WriteManifest((dir / "manifest.jsonl").string(), records);

  const CorpusSplit split = SplitTrainTest(records, cfg.Split());
  std::map<std::string, std::set<std::string>> per_gender;
  for (const auto &s : specs) per_gender[s.gender].insert(s.id);
  int claimants = cfg.Int("protocol.claimants_per_gender", 1, 1000000);
  for (const auto &[gender, ids] : per_gender) {
    if (static_cast<int>(ids.size()) < claimants) {
      out << "synth: only " << ids.size() << " " << gender << " speakers; using that many claimants\n";
      claimants = static_cast<int>(ids.size());
    }
  }
  std::vector<TrialSpec> trials;
  for (const auto &a : AssignClaims(split.test, claimants, MixSeed(cfg.Seed(), 3))) {
    const auto &r = split.test[a.record_index];
    trials.push_back({a.claimed_id, r.feature_path, "", r.prosody_path, r.speaker_id, r.emotion});
  }
  WriteTrialManifest((dir / "trials.jsonl").string(), trials);
  cfg.WriteTo(dir.string());
  out << "synth: " << records.size() << " utterances, " << split.train.size() << " training, "
      << trials.size() << " trials -> " << dir.string() << "\n";
  return kExitOk;
}

int CmdExtract(const RunConfig &cfg, const std::string &manifest, bool force, std::ostream &out) {
  const fs::path dir = OutputDir(cfg);
  const fs::path base = fs::path(manifest).parent_path();
  auto records = LoadManifest(manifest);
  const FrameSpec frames = cfg.Frames();
  const MfccSpec mfcc = cfg.Mfcc();
  fs::create_directories(dir);

  std::size_t extracted = 0, skipped = 0;
  int sample_rate = 0;
  for (auto &r : records) {
    if (r.audio_path.empty()) throw InvalidInput(r.Key() + ": no audio_path in manifest");
    const fs::path wav = Resolve(base, r.audio_path);
    const std::string stem = UtteranceStem(r);
    r.feature_path = "features/" + stem + ".shf";
    r.prosody_path = "features/" + stem + ".pros.shf";
    r.audio_path = fs::absolute(wav).lexically_normal().string();
    const fs::path feat = dir / r.feature_path, pros = dir / r.prosody_path;
    if (!force && fs::exists(feat) && fs::exists(pros)) {
      ++skipped;
      continue;
    }
    AudioBuffer audio;
    try {
      audio = ReadWav(wav.string());
    } catch (const Error &e) {
      const std::string what = e.what();
      throw InvalidInput(what.find(wav.string()) == std::string::npos ? wav.string() + ": " + what
                                                                       : what);
    }
    sample_rate = audio.sample_rate;
    fs::create_directories(feat.parent_path());
    WriteFeatureFile(feat.string(), ExtractMfcc(audio, frames, mfcc));
    WriteProsodyFile(pros.string(), ComputeProsodyTrack(audio, frames));
    ++extracted;
  }
  if (sample_rate > 0) WriteFeatureSidecar((dir / "frontend.txt").string(), frames, mfcc, sample_rate);
  WriteManifest((dir / "manifest.jsonl").string(), records);
  cfg.WriteTo(dir.string());
  out << "extract: " << extracted << " extracted, " << skipped << " skipped\n";
  return kExitOk;
}

void WriteTrace(const fs::path &path, const EnrollResult &r) {
  std::ofstream os(path);
  os << "stage\titeration\tloglik\n" << std::setprecision(17);
  for (std::size_t m = 0; m < r.acoustic_traces.size(); ++m)
    for (std::size_t i = 0; i < r.acoustic_traces[m].size(); ++i)
      os << "acoustic" << m + 1 << "\t" << i << "\t" << r.acoustic_traces[m][i] << "\n";
  for (std::size_t m = 0; m < r.supra_traces.size(); ++m)
    for (std::size_t i = 0; i < r.supra_traces[m].size(); ++i)
      os << "supra" << m + 1 << "\t" << i << "\t" << r.supra_traces[m][i] << "\n";
}

int CmdTrain(const RunConfig &cfg, const std::string &manifest, std::ostream &out) {
  const fs::path dir = OutputDir(cfg);
  const fs::path base = fs::path(manifest).parent_path();
  const auto records = LoadManifest(manifest);
  const CorpusSplit split = SplitTrainTest(records, cfg.Split());
  const EnrollConfig enroll = cfg.Enroll();

  std::map<std::string, std::vector<const UtteranceRecord *>> train;
  for (const auto &r : records) train[r.speaker_id];
  for (const auto &r : split.train) train[r.speaker_id].push_back(&r);
  std::string empty;
  for (const auto &[id, list] : train)
    if (list.empty()) empty += (empty.empty() ? "" : ", ") + id;
  if (!empty.empty()) throw TrainingDataEmpty("no training utterances for: " + empty);
  for (const auto &r : split.train) {
    if (r.feature_path.empty()) throw InvalidInput(r.Key() + ": no feature_path");
    if (enroll.with_supra && r.prosody_path.empty())
      throw InvalidInput(r.Key() + ": no prosody_path (needed by the suprasegmental layer)");
  }

  fs::create_directories(dir);
  std::vector<std::string> ids;
  for (const auto &[id, list] : train) ids.push_back(id);
  std::mutex log_mutex;
  ParallelFor(ids.size(), cfg.Threads(), [&](std::size_t i) {
    const std::string &id = ids[i];
    std::vector<FeatureSequence> feats;
    std::vector<ProsodyTrack> pros;
    for (const UtteranceRecord *r : train.at(id)) {
      feats.push_back(ReadFeatureFile(Resolve(base, r->feature_path).string()));
      if (enroll.with_supra) pros.push_back(ReadProsodyFile(Resolve(base, r->prosody_path).string()));
    }
    EnrollConfig ec = enroll;
    ec.init.seed = MixSeed(enroll.init.seed, StableHash(id));
    const EnrollResult result = EnrollSpeaker(feats, pros, ec);
    SaveSpeakerModel((dir / (id + ".shm3")).string(), result.model);
    WriteTrace(dir / (id + ".trace.tsv"), result);
    std::lock_guard lock(log_mutex);
    out << "train: " << id << " (" << feats.size() << " utterances)\n";
  });
  cfg.WriteTo(dir.string());
  out << "train: " << ids.size() << " speaker models -> " << dir.string() << "\n";
  return kExitOk;
}

int CmdVerify(const RunConfig &cfg, const std::string &models_dir, const std::string &trials_path,
              const std::string &manifest, std::ostream &out) {
  const fs::path dir = OutputDir(cfg);
  const ProtocolConfig protocol = cfg.Protocol();
  const std::string background = cfg.Str("protocol.background");
  if (background != "gender" && background != "all")
    throw InvalidInput("protocol.background must be 'gender' or 'all'");

  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(models_dir))
    if (e.path().extension() == ".shm3") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput(models_dir + ": no .shm3 model files");
  SpeakerModelSet set;
  for (const auto &f : files) set.Add(f.stem().string(), LoadSpeakerModel(f.string()));

  if (background == "gender") {
    if (manifest.empty())
      throw InvalidInput("protocol.background = gender needs --manifest for speaker genders");
    std::map<std::string, std::string> gender;
    for (const auto &r : LoadManifest(manifest)) gender[r.speaker_id] = r.gender;
    for (const auto &id : set.Ids()) {
      auto g = gender.find(id);
      if (g == gender.end()) throw LookupError("speaker '" + id + "' is not in " + manifest);
      std::vector<std::string> cohort;
      for (const auto &other : set.Ids())
        if (other != id && gender.count(other) && gender.at(other) == g->second) cohort.push_back(other);
      if (!cohort.empty()) set.SetCohort(id, std::move(cohort));
    }
  }

  const auto specs = ReadTrialManifest(trials_path);
  const fs::path base = fs::path(trials_path).parent_path();
  const FrameSpec frames = cfg.Frames();
  const MfccSpec mfcc = cfg.Mfcc();
  std::vector<Trial> trials(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const TrialSpec &s = specs[i];
    if (!set.Contains(s.claimed_id))
      throw LookupError(trials_path + ": trial " + std::to_string(i + 1) + ": unknown claimant '" +
                        s.claimed_id + "'");
    if (!s.true_id)
      throw InvalidInput(trials_path + ": trial " + std::to_string(i + 1) + ": no true_id");
  }
  ParallelFor(specs.size(), cfg.Threads(), [&](std::size_t i) {
    const TrialSpec &s = specs[i];
    Trial &t = trials[i];
    t.claimed_id = s.claimed_id;
    t.true_id = s.true_id;
    t.emotion = s.emotion;
    if (!s.feature_path.empty()) {
      t.obs = ReadFeatureFile(Resolve(base, s.feature_path).string());
      if (!s.prosody_path.empty()) t.prosody = ReadProsodyFile(Resolve(base, s.prosody_path).string());
    } else {
      const AudioBuffer audio = ReadWav(Resolve(base, s.wav_path).string());
      t.obs = ExtractMfcc(audio, frames, mfcc);
      t.prosody = ComputeProsodyTrack(audio, frames);
    }
  });

  const ProtocolResult result = RunProtocol(set, trials, protocol, cfg.Threads());
  fs::create_directories(dir);
  {
    std::ofstream log(dir / "decisions.jsonl");
    WriteDecisionLog(log, trials, result.log);
  }
  WriteCurves(dir, result.curves, out);
  cfg.WriteTo(dir.string());
  out << "verify: " << trials.size() << " trials -> " << dir.string() << "\n";
  return kExitOk;
}

int CmdEval(const RunConfig &cfg, const std::string &log_path, std::ostream &out) {
  const fs::path dir = OutputDir(cfg);
  std::ifstream is(log_path);
  if (!is) throw InvalidInput(log_path + ": cannot open decision log");
  std::map<std::string, std::vector<LabeledScore>> groups;
  std::string line;
  for (std::size_t line_no = 1; std::getline(is, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = log_path + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.contains("lambda") || !j["lambda"].is_number())
        throw InvalidInput(where + "lambda missing or not finite");
      if (!j.contains("true_id")) throw InvalidInput(where + "true_id missing");
      const LabeledScore s{j["lambda"].get<double>(),
                           j["true_id"].get<std::string>() == j.at("claimed_id").get<std::string>()};
      groups[kPooledKey].push_back(s);
      if (j.contains("emotion")) groups[j["emotion"].get<std::string>()].push_back(s);
    } catch (const nlohmann::json::exception &e) {
      throw InvalidInput(where + e.what());
    }
  }
  if (groups.empty()) throw InvalidInput(log_path + ": no decisions");
  std::map<std::string, DetCurve> curves;
  for (const auto &[g, scores] : groups) curves[g] = Evaluate(scores);
  fs::create_directories(dir);
  WriteCurves(dir, curves, out);
  cfg.WriteTo(dir.string());
  return kExitOk;
}

std::vector<double> ParseValueList(const std::string &text, const std::string &what) {
  std::string spaced = text;
  for (char &ch : spaced)
    if (ch == ',') ch = ' ';
  std::istringstream in(spaced);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::logic_error &) {
      throw InvalidInput(what + ": not a number: '" + token + "'");
    }
  }
  return values;
}

// Two numeric columns; lines whose first field is not numeric (headers, comments) are skipped.
void ReadTwoColumns(const std::string &path, std::vector<double> *a, std::vector<double> *b) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(path + ": cannot open");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string x, y;
    if (!(fields >> x)) continue;
    char *end = nullptr;
    const double va = std::strtod(x.c_str(), &end);
    if (end == x.c_str() || *end != '\0') continue;
    if (!(fields >> y))
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": expected two columns");
    const double vb = std::strtod(y.c_str(), &end);
    if (end == y.c_str() || *end != '\0')
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": not a number: '" + y + "'");
    a->push_back(va);
    b->push_back(vb);
  }
}

int CmdTTest(const std::string &a_text, const std::string &b_text, const std::string &table,
             double critical, double reference, std::ostream &out) {
  std::vector<double> a, b;
  if (!table.empty()) {
    if (!a_text.empty() || !b_text.empty())
      throw InvalidInput("ttest: give either --table or -a/-b, not both");
    ReadTwoColumns(table, &a, &b);
  } else {
    if (a_text.empty() || b_text.empty()) throw InvalidInput("ttest: both -a and -b are required");
    a = ParseValueList(a_text, "-a");
    b = ParseValueList(b_text, "-b");
  }
  out << FormatTTestReport(RunTTest(a, b, critical), reference);
  return kExitOk;
}

}  // namespace

int Main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Speaker verification with third-order circular suprasegmental HMMs"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("-c,--config", common.config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", common.sets, "override one setting: section.key=value");
    sub->add_option("-o,--out", common.out, "output directory (paths.output)");
  };

  auto *synth = app.add_subcommand("synth", "generate a synthetic multi-emotion corpus");
  add_common(synth);

  std::string manifest;
  bool force = false;
  auto *extract = app.add_subcommand("extract", "MFCC and prosody extraction for a WAV manifest");
  add_common(extract);
  extract->add_option("-m,--manifest", manifest, "utterance manifest (JSON lines)")->required();
  extract->add_flag("--force", force, "recompute existing outputs");

  auto *train = app.add_subcommand("train", "train one model file per speaker");
  add_common(train);
  train->add_option("-m,--manifest", manifest, "utterance manifest with feature paths")->required();

  std::string models, trials;
  auto *verify = app.add_subcommand("verify", "score a trial list and evaluate it");
  add_common(verify);
  verify->add_option("--models", models, "directory of .shm3 speaker models")->required();
  verify->add_option("-t,--trials", trials, "trial manifest (JSON lines)")->required();
  verify->add_option("-m,--manifest", manifest, "corpus manifest giving speaker genders");

  std::string log_path;
  auto *eval = app.add_subcommand("eval", "DET curves and EER from a decision log");
  add_common(eval);
  eval->add_option("-l,--log", log_path, "decisions.jsonl from verify")->required();

  std::string ta, tb, ttable;
  double critical = 1.645;
  double reference = std::nan("");
  auto *ttest = app.add_subcommand("ttest", "two-sample t statistic under both SD conventions");
  ttest->add_option("-a", ta, "first sample, whitespace or comma separated");
  ttest->add_option("-b", tb, "second sample, whitespace or comma separated");
  ttest->add_option("--table", ttable, "TSV with the two samples as columns")
      ->check(CLI::ExistingFile);
  ttest->add_option("--critical", critical, "critical value")->capture_default_str();
  ttest->add_option("--reference", reference, "published t value to compare against");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*ttest) return CmdTTest(ta, tb, ttable, critical, reference, out);
    const RunConfig cfg = Resolve(common);
    if (*synth) return CmdSynth(cfg, out);
    if (*extract) return CmdExtract(cfg, manifest, force, out);
    if (*train) return CmdTrain(cfg, manifest, out);
    if (*verify) return CmdVerify(cfg, models, trials, manifest, out);
    if (*eval) return CmdEval(cfg, log_path, out);
  } catch (const NumericFailure &e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NoValidPath &e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace csphmm::cli
