// include/csphmm/error.h

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

#ifndef CSPHMM_ERROR_H_
#define CSPHMM_ERROR_H_

#include <stdexcept>
#include <string>

namespace csphmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the caller's input was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value where a finite one is required.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string &what, int iteration = -1)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Every state path through the model has probability zero.
class NoValidPath : public Error {
 public:
  using Error::Error;
};

/// A named entity (speaker id, model) was not found.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for the supplied samples (e.g. zero spread).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

/// Training was requested but no usable data remained.
class TrainingDataEmpty : public Error {
 public:
  using Error::Error;
};

}  // namespace csphmm

#endif  // CSPHMM_ERROR_H_
