// python/bindings.cc

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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "commands.h"
#include "csphmm/audio_io.h"
#include "csphmm/error.h"
#include "csphmm/features.h"
#include "csphmm/hmm_model.h"
#include "csphmm/hmm_scoring.h"
#include "csphmm/hmm_train.h"
#include "csphmm/stats.h"
#include "csphmm/suprasegmental.h"
#include "csphmm/verification.h"

namespace py = pybind11;
using namespace csphmm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

FeatureSequence ToSequence(const Array &a) {
  if (a.ndim() != 2) throw InvalidInput("observations must be a 2-D array (frames x dim)");
  const auto t = static_cast<std::size_t>(a.shape(0)), d = static_cast<std::size_t>(a.shape(1));
  return FeatureSequence(d, std::vector<double>(a.data(), a.data() + t * d));
}

Array ToArray(const FeatureSequence &s) {
  Array out({s.size(), s.dim()});
  std::copy(s.values().begin(), s.values().end(), out.mutable_data());
  return out;
}

Array ToArray(const std::vector<double> &v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<FeatureSequence> ToSequences(const std::vector<Array> &list) {
  std::vector<FeatureSequence> out;
  for (const auto &a : list) out.push_back(ToSequence(a));
  return out;
}

AudioBuffer ToAudio(const Array &samples, int sample_rate) {
  if (samples.ndim() != 1) throw InvalidInput("audio must be a 1-D array");
  AudioBuffer a;
  a.samples.assign(samples.data(), samples.data() + samples.shape(0));
  a.sample_rate = sample_rate;
  return a;
}

ProsodyTrack ToTrack(const Array &f0, const Array &log_energy, double hop_seconds) {
  if (f0.ndim() != 1 || log_energy.ndim() != 1 || f0.shape(0) != log_energy.shape(0))
    throw InvalidInput("f0 and log_energy must be 1-D arrays of equal length");
  ProsodyTrack t;
  t.hop_seconds = hop_seconds;
  t.f0.assign(f0.data(), f0.data() + f0.shape(0));
  t.log_energy.assign(log_energy.data(), log_energy.data() + log_energy.shape(0));
  return t;
}

py::dict CurveDict(const DetCurve &c) {
  std::vector<double> theta, far, frr;
  for (const auto &p : c.points) {
    theta.push_back(p.theta);
    far.push_back(p.far);
    frr.push_back(p.frr);
  }
  py::dict d;
  d["eer"] = c.eer;
  d["theta"] = ToArray(theta);
  d["far"] = ToArray(far);
  d["frr"] = ToArray(frr);
  d["num_genuine"] = c.num_genuine;
  d["num_imposter"] = c.num_imposter;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Third-order circular suprasegmental HMMs for speaker verification";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidInput>(m, "InvalidInput", error.ptr());
  py::register_exception<NumericFailure>(m, "NumericFailure", error.ptr());
  py::register_exception<NoValidPath>(m, "NoValidPath", error.ptr());
  py::register_exception<LookupError>(m, "LookupError", error.ptr());
  py::register_exception<UndefinedStatistic>(m, "UndefinedStatistic", error.ptr());
  py::register_exception<TrainingDataEmpty>(m, "TrainingDataEmpty", error.ptr());

  py::class_<HmmModel>(m, "HmmModel")
      .def_readonly("order", &HmmModel::order)
      .def_property_readonly("num_states", &HmmModel::num_states)
      .def_property_readonly("dim", &HmmModel::dim)
      .def_property_readonly("psi1", [](const HmmModel &h) { return ToArray(h.initials.psi1); })
      .def_property_readonly("transitions",
                             [](const HmmModel &h) {
                               Array a({h.transitions.num_histories(),
                                        static_cast<std::size_t>(h.num_states())});
                               std::copy(h.transitions.values().begin(),
                                         h.transitions.values().end(), a.mutable_data());
                               return a;
                             })
      .def("validate", [](const HmmModel &h, double tol) { h.Validate(tol); }, py::arg("tol") = 1e-9)
      .def("save", [](const HmmModel &h, const std::string &path) { SaveHmm(path, h); })
      .def("__eq__", [](const HmmModel &a, const HmmModel &b) { return a == b; });

  m.def("load_hmm", &LoadHmm, py::arg("path"));
  m.def(
      "forward_log_likelihood",
      [](const HmmModel &h, const Array &obs) { return ForwardLogLikelihood(h, ToSequence(obs)); },
      py::arg("model"), py::arg("obs"));
  m.def(
      "normalized_log_likelihood",
      [](const HmmModel &h, const Array &obs) { return NormalizedLogLikelihood(h, ToSequence(obs)); },
      py::arg("model"), py::arg("obs"));
  m.def(
      "viterbi",
      [](const HmmModel &h, const Array &obs) {
        const Alignment a = ViterbiAlign(h, ToSequence(obs));
        return py::make_tuple(a.state_path, a.log_prob);
      },
      py::arg("model"), py::arg("obs"), "Returns (state path, joint log-probability).");
  m.def("expand_to_first_order", &ExpandToFirstOrder, py::arg("model"));
  m.def("lift_order", &LiftOrder, py::arg("model"));
  m.def(
      "sample",
      [](const HmmModel &h, std::size_t length, std::uint64_t seed) {
        auto [states, obs] = SampleSequence(h, length, seed);
        return py::make_tuple(states, ToArray(obs));
      },
      py::arg("model"), py::arg("length"), py::arg("seed"));
  m.def(
      "initialize_model",
      [](const std::vector<Array> &data, int num_states, int num_mixtures, std::uint64_t seed) {
        InitConfig c;
        c.num_states = num_states;
        c.num_mixtures = num_mixtures;
        c.seed = seed;
        return InitializeModel(ToSequences(data), c);
      },
      py::arg("data"), py::arg("num_states") = 6, py::arg("num_mixtures") = 2, py::arg("seed") = 1);
  m.def(
      "train_baum_welch",
      [](const HmmModel &h, const std::vector<Array> &data, int max_iters, double rel_tol) {
        TrainConfig c;
        c.max_iters = max_iters;
        c.rel_tol = rel_tol;
        TrainResult r;
        {
          const auto seqs = ToSequences(data);
          py::gil_scoped_release release;
          r = TrainBaumWelch(h, seqs, c);
        }
        return py::make_tuple(r.model, r.trace);
      },
      py::arg("model"), py::arg("data"), py::arg("max_iters") = 20, py::arg("rel_tol") = 1e-4,
      "Returns (trained model, log-likelihood trace).");
  m.def(
      "train_order_pipeline",
      [](const std::vector<Array> &data, int order, int num_states, int num_mixtures,
         int max_iters, std::uint64_t seed) {
        InitConfig ic;
        ic.num_states = num_states;
        ic.num_mixtures = num_mixtures;
        ic.seed = seed;
        TrainConfig tc;
        tc.max_iters = max_iters;
        PipelineResult r;
        {
          const auto seqs = ToSequences(data);
          py::gil_scoped_release release;
          r = TrainOrderPipeline(seqs, ic, tc, order);
        }
        return py::make_tuple(r.model, r.traces);
      },
      py::arg("data"), py::arg("order") = 3, py::arg("num_states") = 6, py::arg("num_mixtures") = 2,
      py::arg("max_iters") = 20, py::arg("seed") = 1);

  m.def(
      "extract_mfcc",
      [](const Array &samples, int sample_rate, int n_static, bool deltas) {
        MfccSpec spec;
        spec.n_static = n_static;
        spec.include_deltas = deltas;
        return ToArray(ExtractMfcc(ToAudio(samples, sample_rate), FrameSpec{}, spec));
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("n_static") = 16,
      py::arg("deltas") = true, "25 ms Hamming frames every 10 ms, 26 mel filters.");
  m.def(
      "prosody_track",
      [](const Array &samples, int sample_rate) {
        const ProsodyTrack t = ComputeProsodyTrack(ToAudio(samples, sample_rate), FrameSpec{});
        return py::make_tuple(ToArray(t.f0), ToArray(t.log_energy));
      },
      py::arg("samples"), py::arg("sample_rate"), "Returns per-frame (f0, log_energy); f0 is 0 when unvoiced.");
  m.def(
      "read_wav",
      [](const std::string &path) {
        const AudioBuffer a = ReadWav(path);
        return py::make_tuple(ToArray(a.samples), a.sample_rate);
      },
      py::arg("path"));

  py::class_<SpeakerModelFile>(m, "SpeakerModel")
      .def_readonly("acoustic", &SpeakerModelFile::acoustic)
      .def_property_readonly("has_supra", [](const SpeakerModelFile &s) { return s.supra.has_value(); })
      .def("save", [](const SpeakerModelFile &s, const std::string &path) { SaveSpeakerModel(path, s); });
  m.def("load_speaker_model", &LoadSpeakerModel, py::arg("path"));
  m.def(
      "fused_score",
      [](const SpeakerModelFile &s, const Array &obs, const Array &f0, const Array &log_energy,
         double alpha, double hop_seconds) {
        SpeakerScorer scorer(s.acoustic, s.supra ? &*s.supra : nullptr);
        const ProsodyTrack track = ToTrack(f0, log_energy, hop_seconds);
        const FusedScore f =
            SpeakerScorer::Fuse(scorer.Components(ToSequence(obs), &track), FusionWeight(alpha));
        py::dict d;
        d["value"] = f.value;
        d["acoustic"] = f.acoustic;
        d["supra"] = f.supra;
        d["num_segments"] = f.num_segments;
        d["fallback"] = f.fallback;
        return d;
      },
      py::arg("model"), py::arg("obs"), py::arg("f0"), py::arg("log_energy"), py::arg("alpha") = 0.5,
      py::arg("hop_seconds") = 0.01,
      "(1 - alpha) * acoustic per-frame + alpha * suprasegmental per-segment log-likelihood.");

  m.def(
      "evaluate",
      [](const std::vector<double> &scores, const std::vector<bool> &genuine) {
        if (scores.size() != genuine.size()) throw InvalidInput("scores and labels differ in length");
        std::vector<LabeledScore> s;
        for (std::size_t i = 0; i < scores.size(); ++i) s.push_back({scores[i], genuine[i]});
        return CurveDict(Evaluate(s));
      },
      py::arg("scores"), py::arg("genuine"), "DET sweep and EER of labeled LLR scores.");

  m.def(
      "ttest",
      [](const std::vector<double> &a, const std::vector<double> &b, double critical) {
        const TTestReport r = RunTTest(a, b, critical);
        py::dict d;
        d["mean_a"] = r.mean_a;
        d["mean_b"] = r.mean_b;
        d["sd_a"] = r.sd_a;
        d["sd_b"] = r.sd_b;
        d["t_sample_sd"] = r.t_sample_sd;
        d["t_standard_error"] = r.t_standard_error;
        d["significant_sample_sd"] = r.significant_sample_sd;
        d["significant_standard_error"] = r.significant_standard_error;
        d["critical"] = r.critical;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("critical") = kDefaultCriticalT);

  m.def(
      "run_cli",
      [](const std::vector<std::string> &args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::Main(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a csphmm subcommand in-process; returns (exit code, stdout, stderr).");
}
