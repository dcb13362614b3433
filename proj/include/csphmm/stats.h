// include/csphmm/stats.h

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

#ifndef CSPHMM_STATS_H_
#define CSPHMM_STATS_H_

#include <span>
#include <string>
#include <vector>

namespace csphmm {

/// How the per-sample spread entering the pooled SD is measured.
enum class SdConvention {
  kSampleSd,        // sample standard deviation, n - 1 denominator
  kStandardError,   // sample SD / sqrt(n)
};

std::string ToString(SdConvention c);

struct SampleSummary {
  std::vector<double> values;
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1)

  /// Requires at least two values.
  static SampleSummary From(std::span<const double> values);
  std::size_t size() const { return values.size(); }
  double Spread(SdConvention c) const;
};

/// sqrt((s_a^2 + s_b^2) / 2) for equal-sized samples.
double PooledSd(const SampleSummary &a, const SampleSummary &b,
                SdConvention c = SdConvention::kSampleSd);

/// (mean_a - mean_b) / PooledSd. Throws UndefinedStatistic on zero spread.
double TStatistic(const SampleSummary &a, const SampleSummary &b,
                  SdConvention c = SdConvention::kSampleSd);

inline constexpr double kDefaultCriticalT = 1.645;

/// Significant iff t strictly exceeds the critical value.
bool SignificanceDecision(double t, double critical = kDefaultCriticalT);

struct TTestReport {
  double mean_a = 0.0, mean_b = 0.0;
  double sd_a = 0.0, sd_b = 0.0;
  double t_sample_sd = 0.0;
  double t_standard_error = 0.0;
  bool significant_sample_sd = false;
  bool significant_standard_error = false;
  double critical = kDefaultCriticalT;
};

/// Runs the test under both spread conventions.
TTestReport RunTTest(std::span<const double> a, std::span<const double> b,
                     double critical = kDefaultCriticalT);

/// Human-readable report; `reference_t` (if finite) is printed alongside.
std::string FormatTTestReport(const TTestReport &r, double reference_t);

}  // namespace csphmm

#endif  // CSPHMM_STATS_H_
