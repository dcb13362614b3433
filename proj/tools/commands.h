// tools/commands.h

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

#ifndef CSPHMM_TOOLS_COMMANDS_H_
#define CSPHMM_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace csphmm::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command line; args excludes the program name. Never throws.
int Main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace csphmm::cli

#endif  // CSPHMM_TOOLS_COMMANDS_H_
