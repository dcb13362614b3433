// tools/run_config.h

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

#ifndef CSPHMM_TOOLS_RUN_CONFIG_H_
#define CSPHMM_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>

#include "csphmm/corpus.h"
#include "csphmm/experiment.h"
#include "csphmm/features.h"
#include "csphmm/verification.h"

namespace csphmm::cli {

/// Flat "section.key" -> value settings, seeded with every default so the
/// resolved configuration can be written out in full.
class RunConfig {
 public:
  RunConfig();

  /// Reads "[section]" headers and "key = value" lines; '#' starts a comment.
  /// Unknown keys are rejected.
  void LoadFile(const std::string &path);
  /// "section.key=value".
  void Set(const std::string &assignment);
  void Set(const std::string &key, const std::string &value);

  std::string Str(const std::string &key) const;
  int Int(const std::string &key, int lo, int hi) const;
  double Real(const std::string &key, double lo, double hi) const;
  bool Bool(const std::string &key) const;
  std::uint64_t Seed() const;

  FrameSpec Frames() const;
  MfccSpec Mfcc() const;
  EnrollConfig Enroll() const;
  SplitConfig Split() const;
  PopulationConfig Population() const;
  SynthConfig Synth() const;
  ProtocolConfig Protocol() const;
  int Threads() const { return Int("run.threads", 1, 256); }

  /// The resolved settings in file syntax.
  std::string ToIni() const;
  void WriteTo(const std::string &dir) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace csphmm::cli

#endif  // CSPHMM_TOOLS_RUN_CONFIG_H_
