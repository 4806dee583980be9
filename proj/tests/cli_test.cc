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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <string>

#include "ase/audio_io.h"
#include "ase/checkpoint.h"
#include "ase/model.h"
#include "ase/quantize.h"
#include "test_support.h"

namespace ase {
namespace {

using testing::TempDir;

struct RunResult {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string("'") + ASE_CLI + "' " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string Q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

void ExpectErrorLine(const RunResult& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.output;
  EXPECT_TRUE(std::regex_search(r.output, std::regex("^error code=" + code + " message=\".*\"\n$")))
      << r.output;
}

TEST(Cli, UsageErrorsExitWithOne) {
  ExpectErrorLine(RunCli(""), 1, "Usage");
  ExpectErrorLine(RunCli("enhance --input x.wav"), 1, "Usage");
  ExpectErrorLine(RunCli("bench --checkpoint a --trials nope"), 1, "Usage");
  EXPECT_EQ(RunCli("--help").status, 0);
}

TEST(Cli, ConfigErrorsExitWithOne) {
  TempDir dir;
  std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
  ExpectErrorLine(RunCli("--config " + Q(dir / "bad.cfg") + " bench --checkpoint x"), 1,
                  "ConfigError");
}

TEST(Cli, DataErrorsExitWithTwo) {
  TempDir dir;
  ExpectErrorLine(RunCli("spectrogram --input " + Q(dir / "missing.wav") + " --out " +
                         Q(dir / "o.pgm")),
                  2, "IoFailure");
  std::ofstream(dir / "junk.ase") << "definitely not a checkpoint";
  ExpectErrorLine(RunCli("quantize --checkpoint " + Q(dir / "junk.ase") + " --out " +
                         Q(dir / "q.aseq")),
                  2, "BadMagic");
  WriteWav(AudioClip{std::vector<float>(500, 0.1f), 22050}, dir / "short.wav");
  SaveCheckpoint(ZeroParams<float>(ModelConfig{}), dir / "z.ase");
  ExpectErrorLine(RunCli("enhance --input " + Q(dir / "short.wav") + " --checkpoint " +
                         Q(dir / "z.ase") + " --output " + Q(dir / "o.wav")),
                  2, "ClipTooShort");
}

TEST(Cli, EnhanceQuantizeSpectrogramBench) {
  TempDir dir;
  Rng rng(1);
  WriteWav(testing::HarmonicClip(rng, 12000), dir / "in.wav");
  ModelConfig cfg;
  cfg.latent_channels = 16;
  SaveCheckpoint(InitParams<float>(cfg, 2), dir / "m.ase");

  RunResult r = RunCli("enhance --input " + Q(dir / "in.wav") + " --checkpoint " +
                       Q(dir / "m.ase") + " --output " + Q(dir / "out.wav"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("forward_ms="), std::string::npos);
  EXPECT_EQ(ReadWav(dir / "out.wav").size(), 12000u);

  r = RunCli("quantize --checkpoint " + Q(dir / "m.ase") + " --out " + Q(dir / "m.aseq"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::holds_alternative<QuantizedModel>(LoadAnyModel(dir / "m.aseq")));
  r = RunCli("quantize --f16 --checkpoint " + Q(dir / "m.ase") + " --out " + Q(dir / "h.aseq"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::holds_alternative<ModelParams<float>>(LoadAnyModel(dir / "h.aseq")));

  r = RunCli("enhance --input " + Q(dir / "in.wav") + " --checkpoint " + Q(dir / "m.aseq") +
             " --output " + Q(dir / "q.wav"));
  ASSERT_EQ(r.status, 0) << r.output;

  r = RunCli("spectrogram --view power_db --input " + Q(dir / "in.wav") + " --out " +
             Q(dir / "s.pgm"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto pgm = testing::ReadBytes(dir / "s.pgm");
  EXPECT_EQ(std::string(pgm.begin(), pgm.begin() + 3), "P5\n");

  r = RunCli("--seed 3 bench --trials 3 --clip-len 5000 --checkpoint " + Q(dir / "m.ase"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::regex_search(r.output, std::regex("^float trials=3 mean_ms=\\S+ p50_ms=\\S+ p95_ms=\\S+\n")))
      << r.output;
  EXPECT_NE(r.output.find("\nint8 trials=3 "), std::string::npos) << r.output;
}

TEST(Cli, PrepareTrainEvaluate) {
  TempDir dir;
  std::filesystem::create_directories(dir / "src");
  Rng rng(4);
  for (int i = 0; i < 4; ++i) {
    WriteWav(testing::HarmonicClip(rng, 3 * 23000), dir / "src" / ("t" + std::to_string(i) + ".wav"));
  }
  const std::string enc = std::string("'") + ASE_FAKE_CODEC + "' {in} {out} {bitrate}";
  RunResult r = RunCli("--seed 9 --threads 2 prepare " + Q(dir / "src") + " " + Q(dir / "work") +
                       " --encoder \"" + enc + "\"");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("pairs=12"), std::string::npos) << r.output;
  const DatasetManifest m = ReadManifest(dir / "work" / "manifest.tsv");
  EXPECT_EQ(m.seed, 9u);
  ASSERT_EQ(m.entries.size(), 12u);

  std::ofstream(dir / "train.cfg") << "latent_channels = 8\nepochs = 2\nbatch_size = 4\n"
                                      "crop_length = 4000\n";
  r = RunCli("--config " + Q(dir / "train.cfg") + " train --manifest " +
             Q(dir / "work" / "manifest.tsv") + " --out " + Q(dir / "run"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "best.ase"));
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "train_log.csv"));
  EXPECT_EQ(LoadCheckpoint(dir / "run" / "final.ase").config.latent_channels, 8u);

  r = RunCli("evaluate --bypass --manifest " + Q(dir / "work" / "manifest.tsv") + " --out " +
             Q(dir / "report.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  std::ifstream in(dir / "report.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "clip,snr_db,lsd,stoi");

  r = RunCli("evaluate --checkpoint " + Q(dir / "run" / "best.ase") + " --manifest " +
             Q(dir / "work" / "manifest.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("MEAN,"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace ase
