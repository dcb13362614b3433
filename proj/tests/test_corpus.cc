// tests/test_corpus.cc

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

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "csphmm/corpus.h"
#include "csphmm/error.h"
#include "test_util.h"

using namespace csphmm;
using csphmm::testing::TempDir;

namespace {

// Every (speaker, sentence, repetition, emotion) record of a corpus layout.
std::vector<UtteranceRecord> FullLayout(int speakers, int sentences, int reps) {
  std::vector<UtteranceRecord> out;
  for (int s = 1; s <= speakers; ++s) {
    const std::string id = (s < 10 ? "spk0" : "spk") + std::to_string(s);
    const std::string gender = s <= (speakers + 1) / 2 ? "female" : "male";
    for (int sent = 1; sent <= sentences; ++sent)
      for (int r = 1; r <= reps; ++r)
        for (const auto &emo : DefaultEmotions()) {
          UtteranceRecord rec;
          rec.speaker_id = id;
          rec.gender = gender;
          rec.sentence_id = sent;
          rec.repetition = r;
          rec.emotion = emo;
          out.push_back(rec);
        }
  }
  return out;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream f(path);
  f << text;
}

std::string ErrorText(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const std::exception &e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("manifest: empty file and blank lines") {
  const std::string dir = TempDir("corpus_manifest");
  WriteText(dir + "/empty.jsonl", "");
  CHECK(LoadManifest(dir + "/empty.jsonl").empty());
  WriteText(dir + "/blank.jsonl", "\n\n");
  CHECK(LoadManifest(dir + "/blank.jsonl").empty());
  CHECK_THROWS_AS(LoadManifest(dir + "/missing.jsonl"), InvalidInput);
}

TEST_CASE("manifest: round trip") {
  const std::string dir = TempDir("corpus_roundtrip");
  auto records = FullLayout(2, 2, 2);
  records[0].audio_path = "audio/a b.wav";
  records[1].feature_path = "f/\"quoted\".shf";
  records[2].prosody_path = "p.shf";
  WriteManifest(dir + "/m.jsonl", records);
  CHECK(LoadManifest(dir + "/m.jsonl") == records);
}

TEST_CASE("manifest: errors cite the line") {
  const std::string dir = TempDir("corpus_errors");
  WriteText(dir + "/nospk.jsonl", "{\"gender\":\"male\",\"sentence_id\":1,\"repetition\":1}\n");
  const std::string msg = ErrorText([&] { LoadManifest(dir + "/nospk.jsonl"); });
  CHECK(msg.find("nospk.jsonl:1") != std::string::npos);
  CHECK(msg.find("speaker_id") != std::string::npos);
  CHECK_THROWS_AS(LoadManifest(dir + "/nospk.jsonl"), InvalidInput);

  WriteText(dir + "/bad.jsonl", "\n" + ToJsonLine(FullLayout(1, 1, 1)[0]) + "\nnot json\n");
  const std::string msg2 = ErrorText([&] { LoadManifest(dir + "/bad.jsonl"); });
  CHECK(msg2.find("bad.jsonl:3") != std::string::npos);

  const std::string line = ToJsonLine(FullLayout(1, 1, 1)[0]);
  WriteText(dir + "/dup.jsonl", line + "\n" + line + "\n");
  const std::string msg3 = ErrorText([&] { LoadManifest(dir + "/dup.jsonl"); });
  CHECK(msg3.find("spk01/neutral/s1_r1") != std::string::npos);
}

TEST_CASE("split: counts on the full 30-speaker layout") {
  const auto records = FullLayout(30, 8, 9);
  const CorpusSplit split = SplitTrainTest(records);
  std::map<std::string, int> train_per_speaker;
  for (const auto &r : split.train) {
    CHECK(r.emotion == "neutral");
    CHECK(r.sentence_id <= 4);
    ++train_per_speaker[r.speaker_id];
  }
  CHECK(train_per_speaker.size() == 30);
  for (const auto &[id, n] : train_per_speaker) CHECK(n == 36);
  std::map<std::string, int> test_per_emotion;
  for (const auto &r : split.test) {
    CHECK(r.sentence_id >= 5);
    ++test_per_emotion[r.emotion];
  }
  CHECK(test_per_emotion.size() == 6);
  for (const auto &[emo, n] : test_per_emotion) CHECK(n == 1080);
  CHECK(split.train.size() + split.test.size() + split.unused.size() == records.size());
}

TEST_CASE("split: one speaker's records are partitioned exactly once") {
  const auto records = FullLayout(1, 8, 3);
  const CorpusSplit split = SplitTrainTest(records);
  std::multiset<std::string> seen;
  for (const auto *side : {&split.train, &split.test, &split.unused})
    for (const auto &r : *side) seen.insert(r.Key());
  CHECK(seen.size() == records.size());
  for (const auto &r : records) CHECK(seen.count(r.Key()) == 1);

  SplitConfig all;
  all.enroll_all_emotions = true;
  const CorpusSplit split_all = SplitTrainTest(records, all);
  CHECK(split_all.unused.empty());
  CHECK(split_all.train.size() == 4u * 3u * DefaultEmotions().size());
}

TEST_CASE("split: missing sentences are listed") {
  auto records = FullLayout(1, 8, 1);
  std::erase_if(records, [](const UtteranceRecord &r) {
    return r.sentence_id == 3 || r.sentence_id == 7;
  });
  const std::string msg = ErrorText([&] { SplitTrainTest(records); });
  CHECK(msg.find("3") != std::string::npos);
  CHECK(msg.find("7") != std::string::npos);
  CHECK_THROWS_AS(SplitTrainTest(records), InvalidInput);

  auto out_of_range = FullLayout(1, 8, 1);
  out_of_range[0].sentence_id = 9;
  CHECK_THROWS_AS(SplitTrainTest(out_of_range), InvalidInput);
}

TEST_CASE("synthesis is deterministic and shaped as configured") {
  PopulationConfig pc;
  pc.num_speakers = 2;
  pc.dim = 4;
  pc.num_states = 3;
  const auto specs = DefaultPopulation(pc);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].gender == "female");
  CHECK(specs[1].gender == "male");
  SynthConfig sc;
  sc.num_sentences = 2;
  sc.repetitions = 2;
  sc.seed = 9;
  const auto a = SynthesizeCorpus(specs, sc);
  const auto b = SynthesizeCorpus(specs, sc);
  REQUIRE(a.size() == 2u * 2u * 2u * DefaultEmotions().size());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].record == b[i].record);
    CHECK(a[i].features.values() == b[i].features.values());
    CHECK(a[i].states == b[i].states);
    CHECK(a[i].features.dim() == 4);
    CHECK(a[i].features.size() >= static_cast<std::size_t>(sc.min_frames));
    CHECK(a[i].features.size() <= static_cast<std::size_t>(sc.max_frames));
  }
  sc.seed = 10;
  const auto c = SynthesizeCorpus(specs, sc);
  CHECK(c[0].features.values() != a[0].features.values());
}

TEST_CASE("synthesis needs at least two speakers") {
  PopulationConfig pc;
  pc.num_speakers = 2;
  pc.dim = 4;
  auto specs = DefaultPopulation(pc);
  specs.pop_back();
  CHECK_THROWS_AS(SynthesizeCorpus(specs, SynthConfig{}), InvalidInput);
}

TEST_CASE("zero severity leaves emotions identical to neutral") {
  PopulationConfig pc;
  pc.num_speakers = 2;
  pc.dim = 4;
  for (auto &[emo, s] : pc.severity) s = 0.0;
  const auto specs = DefaultPopulation(pc);
  for (const auto &spec : specs)
    for (const auto &[emo, shift] : spec.shifts) {
      for (double v : shift.mean_offset) CHECK(v == 0.0);
      CHECK(shift.variance_scale == 1.0);
      CHECK(shift.energy_offset == 0.0);
    }
}

TEST_CASE("claim assignment on the full layout") {
  const auto records = FullLayout(30, 8, 9);
  const CorpusSplit split = SplitTrainTest(records);
  const auto claims = AssignClaims(split.test, 12, 5);
  REQUIRE(claims.size() == split.test.size());
  std::set<std::string> claimants;
  std::map<std::string, int> genuine, imposter;
  for (const auto &c : claims) {
    const auto &r = split.test[c.record_index];
    const bool is_genuine = r.speaker_id == c.claimed_id;
    (is_genuine ? genuine : imposter)[r.emotion]++;
    claimants.insert(c.claimed_id);
    // Claims never cross genders.
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const auto &x) { return x.speaker_id == c.claimed_id; });
    CHECK(it->gender == r.gender);
  }
  CHECK(claimants.size() == 24);
  for (const auto &emo : DefaultEmotions()) {
    CHECK(genuine[emo] == 24 * 4 * 9);
    CHECK(imposter[emo] == 6 * 4 * 9);
  }
  const auto again = AssignClaims(split.test, 12, 5);
  for (std::size_t i = 0; i < claims.size(); ++i) CHECK(again[i].claimed_id == claims[i].claimed_id);
  CHECK_THROWS_AS(AssignClaims(split.test, 16, 5), InvalidInput);
}

TEST_CASE("stable hash and seed mixing") {
  // FNV-1a 64-bit reference values.
  CHECK(StableHash("") == 0xcbf29ce484222325ULL);
  CHECK(StableHash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(MixSeed(1, 2) == MixSeed(1, 2));
  CHECK(MixSeed(1, 2) != MixSeed(2, 1));
}
