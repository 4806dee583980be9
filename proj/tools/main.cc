// Copyright 2026 The Audio Spectral Enhancement Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Each subcommand wraps one library entry point.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ase/audio_io.h"
#include "ase/checkpoint.h"
#include "ase/config.h"
#include "ase/error.h"
#include "ase/metrics.h"
#include "ase/pipeline.h"
#include "ase/quantize.h"
#include "ase/train.h"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  int threads = 1;
};

ase::RunConfig ResolveConfig(const GlobalOptions& g) {
  ase::RunConfig cfg;
  if (!g.config_path.empty()) cfg = ase::LoadConfig(g.config_path);
  if (g.seed) cfg.train.seed = *g.seed;
  return cfg;
}

uint64_t SeedOr(const GlobalOptions& g, uint64_t fallback) {
  return g.seed.value_or(fallback);
}

void PrintLatency(const char* label, const ase::LatencyStats& s) {
  std::printf("%s trials=%zu mean_ms=%.3f p50_ms=%.3f p95_ms=%.3f\n", label,
              s.trials, s.mean_ms, s.p50_ms, s.p95_ms);
}

int Run(int argc, char** argv) {
  CLI::App app{"Spectral enhancement of low-bitrate audio"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--seed", g.seed, "seed for shuffling, init and benches");
  app.add_option("--threads", g.threads, "worker cap")->check(CLI::PositiveNumber);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "build degraded/reference pairs");
  std::string source_dir, work_dir;
  ase::PrepareOptions prep;
  prepare->add_option("source", source_dir, "directory of WAV files")->required();
  prepare->add_option("work", work_dir, "output directory")->required();
  prepare->add_option("--encoder", prep.encoder_template,
                      "codec round-trip command with {in} {out} {bitrate}");
  prepare->add_option("--parts", prep.parts)->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string manifest_path, out_dir;
  train->add_option("--manifest", manifest_path)->required();
  train->add_option("--out", out_dir)->required();

  // enhance
  auto* enhance = app.add_subcommand("enhance", "enhance one WAV file");
  ase::EnhanceRequest req;
  std::string in_path, ckpt_path, out_path;
  enhance->add_option("--input", in_path)->required();
  enhance->add_option("--checkpoint", ckpt_path)->required();
  enhance->add_option("--output", out_path)->required();
  enhance->add_flag("--quantized", req.use_quantized);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score the test split");
  ase::EvaluateOptions eval;
  std::string report_path;
  evaluate->add_option("--manifest", manifest_path)->required();
  evaluate->add_option("--checkpoint", ckpt_path);
  evaluate->add_option("--out", report_path, "CSV path (stdout if omitted)");
  evaluate->add_flag("--quantized", eval.use_quantized);
  evaluate->add_flag("--bypass", eval.oracle_bypass, "score each reference against itself");

  // quantize
  auto* quantize = app.add_subcommand("quantize", "convert a float checkpoint");
  bool f16 = false;
  quantize->add_option("--checkpoint", ckpt_path)->required();
  quantize->add_option("--out", out_path)->required();
  quantize->add_flag("--f16", f16, "store binary16 weights instead of int8");

  // spectrogram
  auto* spectrogram = app.add_subcommand("spectrogram", "write a PGM image");
  std::string view_name = "magnitude";
  spectrogram->add_option("--input", in_path)->required();
  spectrogram->add_option("--view", view_name)
      ->check(CLI::IsMember({"magnitude", "power_db", "phase"}));
  spectrogram->add_option("--out", out_path)->required();

  // bench
  auto* bench = app.add_subcommand("bench", "time the forward pass");
  size_t trials = 5;
  size_t clip_len = 100000;
  bench->add_option("--checkpoint", ckpt_path)->required();
  bench->add_option("--trials", trials);
  bench->add_option("--clip-len", clip_len);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    throw ase::Error(ase::ErrorCode::kUsage, e.what());
  }

  const ase::RunConfig cfg = ResolveConfig(g);

  if (*prepare) {
    prep.seed = SeedOr(g, 0);
    prep.workers = g.threads;
    const ase::DatasetManifest m = ase::PrepareDataset(source_dir, work_dir, prep);
    std::printf("pairs=%zu manifest=%s\n", m.entries.size(),
                (fs::path(work_dir) / "manifest.tsv").c_str());
  } else if (*train) {
    const ase::DatasetManifest m = ase::ReadManifest(manifest_path);
    const ase::TrainResult r =
        ase::Train(m, cfg.model, cfg.train, cfg.ssim, out_dir, g.threads);
    const ase::EpochRecord& last = r.log.back();
    std::printf("epochs=%zu steps=%llu train_loss=%.6f val_loss=%.6f\n",
                last.epoch, static_cast<unsigned long long>(last.step),
                last.train_loss, last.val_loss);
  } else if (*enhance) {
    req.input_path = in_path;
    req.checkpoint_path = ckpt_path;
    req.output_path = out_path;
    const ase::EnhanceTiming t = ase::EnhanceFile(req);
    std::printf("samples=%zu forward_ms=%.3f\n", t.samples, t.forward_ms);
  } else if (*evaluate) {
    ase::AnyModel model = ase::ZeroParams<float>(cfg.model);
    if (!ckpt_path.empty()) {
      model = ase::LoadAnyModel(ckpt_path);
    } else if (!eval.oracle_bypass) {
      throw ase::Error(ase::ErrorCode::kUsage, "--checkpoint or --bypass required");
    }
    eval.threads = g.threads;
    const ase::MetricsReport report =
        ase::EvaluateTestset(ase::ReadManifest(manifest_path), model, eval);
    const std::string csv = ase::FormatReportCsv(report);
    if (report_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream(report_path) << csv;
    }
  } else if (*quantize) {
    const ase::ModelParams<float> params = ase::LoadCheckpoint(ckpt_path);
    if (f16) {
      ase::SaveHalfModel(params, out_path);
    } else {
      const ase::QuantizedModel q = ase::QuantizeModel(params);
      ase::SaveQuantizedModel(q, out_path);
      std::printf("float_payload_bytes=%zu int8_payload_bytes=%zu\n",
                  ase::CheckpointPayloadBytes(params),
                  ase::QuantizedPayloadBytes(q));
    }
  } else if (*spectrogram) {
    ase::EmitSpectrogramImage(ase::ReadWav(in_path),
                              ase::ParseSpectralView(view_name), out_path);
  } else if (*bench) {
    const ase::AnyModel model = ase::LoadAnyModel(ckpt_path);
    const uint64_t seed = SeedOr(g, 0);
    if (const auto* p = std::get_if<ase::ModelParams<float>>(&model)) {
      PrintLatency("float", ase::BenchLatency(model, trials, clip_len, seed));
      const ase::AnyModel q = ase::QuantizeModel(*p);
      PrintLatency("int8", ase::BenchLatency(q, trials, clip_len, seed));
    } else {
      PrintLatency("int8", ase::BenchLatency(model, trials, clip_len, seed));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const ase::Error& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "error code=%s message=\"%s\"\n",
                 std::string(ase::ErrorCodeName(e.code())).c_str(), msg.c_str());
    return ase::ExitStatusFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error code=Internal message=\"%s\"\n", e.what());
    return 3;
  }
}
