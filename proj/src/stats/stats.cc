// src/stats/stats.cc

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

#include "csphmm/stats.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "csphmm/error.h"

namespace csphmm {

std::string ToString(SdConvention c) {
  return c == SdConvention::kSampleSd ? "sample-sd" : "standard-error";
}

SampleSummary SampleSummary::From(std::span<const double> values) {
  if (values.size() < 2) throw InvalidInput("a sample needs at least two values");
  SampleSummary s;
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / (values.size() - 1));
  return s;
}

double SampleSummary::Spread(SdConvention c) const {
  return c == SdConvention::kSampleSd ? sd : sd / std::sqrt(static_cast<double>(size()));
}

double PooledSd(const SampleSummary &a, const SampleSummary &b, SdConvention c) {
  if (a.size() != b.size())
    throw InvalidInput("pooled SD needs samples of equal size (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + ")");
  const double sa = a.Spread(c), sb = b.Spread(c);
  return std::sqrt((sa * sa + sb * sb) / 2.0);
}

double TStatistic(const SampleSummary &a, const SampleSummary &b, SdConvention c) {
  const double pooled = PooledSd(a, b, c);
  if (!(pooled > 0.0)) throw UndefinedStatistic("pooled standard deviation is zero");
  return (a.mean - b.mean) / pooled;
}

bool SignificanceDecision(double t, double critical) { return t > critical; }

TTestReport RunTTest(std::span<const double> a, std::span<const double> b, double critical) {
  const SampleSummary sa = SampleSummary::From(a), sb = SampleSummary::From(b);
  TTestReport r;
  r.mean_a = sa.mean;
  r.mean_b = sb.mean;
  r.sd_a = sa.sd;
  r.sd_b = sb.sd;
  r.critical = critical;
  r.t_sample_sd = TStatistic(sa, sb, SdConvention::kSampleSd);
  r.t_standard_error = TStatistic(sa, sb, SdConvention::kStandardError);
  r.significant_sample_sd = SignificanceDecision(r.t_sample_sd, critical);
  r.significant_standard_error = SignificanceDecision(r.t_standard_error, critical);
  return r;
}

std::string FormatTTestReport(const TTestReport &r, double reference_t) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "mean_a\t" << r.mean_a << "\n"
     << "mean_b\t" << r.mean_b << "\n"
     << "sd_a\t" << r.sd_a << "\n"
     << "sd_b\t" << r.sd_b << "\n"
     << "t[sample-sd]\t" << r.t_sample_sd << "\t"
     << (r.significant_sample_sd ? "significant" : "not-significant") << "\n"
     << "t[standard-error]\t" << r.t_standard_error << "\t"
     << (r.significant_standard_error ? "significant" : "not-significant") << "\n"
     << "critical\t" << r.critical << "\n";
  if (std::isfinite(reference_t)) {
    os << "reference_t\t" << reference_t << "\n"
       << "reproduced[sample-sd]\t"
       << (std::abs(r.t_sample_sd - reference_t) < 5e-4 ? "yes" : "no") << "\n"
       << "reproduced[standard-error]\t"
       << (std::abs(r.t_standard_error - reference_t) < 5e-4 ? "yes" : "no") << "\n";
  }
  return os.str();
}

}  // namespace csphmm
