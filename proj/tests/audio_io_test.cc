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

#include "ase/audio_io.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "ase/error.h"
#include "test_support.h"

namespace ase {
namespace {

using testing::TempDir;

// Hand-assembled RIFF bytes, independent of WriteWav.
std::vector<uint8_t> MakeWav(const std::vector<int16_t>& pcm, uint16_t format = 1,
                             uint16_t channels = 1, uint16_t bits = 16,
                             uint32_t rate = 22050) {
  std::vector<uint8_t> b;
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto u16 = [&](uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  const uint32_t data_bytes = static_cast<uint32_t>(pcm.size() * 2);
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<uint16_t>(channels * bits / 8));
  u16(bits);
  tag("data");
  u32(data_bytes);
  for (int16_t s : pcm) u16(static_cast<uint16_t>(s));
  return b;
}

using testing::WriteBytes;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternal;
}

TEST(ReadWav, ScalesByInverse32768) {
  TempDir dir;
  WriteBytes(dir / "a.wav", MakeWav({16384, -32768, 0, 32767}));
  const AudioClip clip = ReadWav(dir / "a.wav");
  ASSERT_EQ(clip.size(), 4u);
  EXPECT_EQ(clip.sample_rate, 22050);
  EXPECT_EQ(clip.samples[0], 0.5f);
  EXPECT_EQ(clip.samples[1], -1.0f);
  EXPECT_EQ(clip.samples[2], 0.0f);
  EXPECT_FLOAT_EQ(clip.samples[3], 32767.0f / 32768.0f);
}

TEST(ReadWav, SkipsUnknownChunks) {
  TempDir dir;
  std::vector<uint8_t> b = MakeWav({100, 200});
  // Insert a LIST chunk between fmt and data (fmt chunk ends at byte 36).
  const std::vector<uint8_t> list = {'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  b.insert(b.begin() + 36, list.begin(), list.end());
  WriteBytes(dir / "a.wav", b);
  const AudioClip clip = ReadWav(dir / "a.wav");
  ASSERT_EQ(clip.size(), 2u);
  EXPECT_EQ(clip.samples[1], 200.0f / 32768.0f);
}

TEST(ReadWav, RejectsBadMagicAndFormats) {
  TempDir dir;
  std::vector<uint8_t> bad = MakeWav({1, 2});
  bad[0] = 'X';
  WriteBytes(dir / "magic.wav", bad);
  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "magic.wav"); }), ErrorCode::kMalformedWav);

  WriteBytes(dir / "short.wav", {'R', 'I', 'F', 'F'});
  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "short.wav"); }), ErrorCode::kMalformedWav);

  WriteBytes(dir / "stereo.wav", MakeWav({1, 2}, 1, 2));
  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "stereo.wav"); }),
            ErrorCode::kUnsupportedFormat);

  WriteBytes(dir / "float.wav", MakeWav({1, 2}, 3));
  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "float.wav"); }),
            ErrorCode::kUnsupportedFormat);

  WriteBytes(dir / "pcm8.wav", MakeWav({1, 2}, 1, 1, 8));
  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "pcm8.wav"); }),
            ErrorCode::kUnsupportedFormat);

  EXPECT_EQ(CodeOf([&] { ReadWav(dir / "missing.wav"); }), ErrorCode::kIoFailure);
}

TEST(WriteWav, EncodesEndpoints) {
  TempDir dir;
  AudioClip clip{{0.0f, 1.0f, -1.0f, 0.5f, 2.0f}, 16000};
  WriteWav(clip, dir / "a.wav");
  const std::vector<uint8_t> bytes = testing::ReadBytes(dir / "a.wav");
  ASSERT_EQ(bytes.size(), 44u + 10u);
  auto sample = [&](size_t i) {
    int16_t v;
    std::memcpy(&v, bytes.data() + 44 + 2 * i, 2);
    return v;
  };
  EXPECT_EQ(sample(0), 0);
  EXPECT_EQ(sample(1), 32767);
  EXPECT_EQ(sample(2), -32768);
  EXPECT_EQ(sample(3), 16384);
  EXPECT_EQ(sample(4), 32767);
  EXPECT_EQ(ReadWav(dir / "a.wav").sample_rate, 16000);
}

TEST(WriteWav, RoundTripWithinQuantizationBound) {
  TempDir dir;
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    AudioClip clip{testing::UniformNoise(rng, 1 + rng.Below(3000), 1.0), 22050};
    WriteWav(clip, dir / "x.wav");
    const AudioClip once = ReadWav(dir / "x.wav");
    ASSERT_EQ(once.size(), clip.size());
    for (size_t i = 0; i < clip.size(); ++i) {
      ASSERT_LT(std::fabs(once.samples[i] - clip.samples[i]), 1.0 / 32767.0);
    }
    WriteWav(once, dir / "y.wav");
    EXPECT_EQ(ReadWav(dir / "y.wav"), once) << "second round trip must be exact";
  }
}

TEST(WriteWav, FailsOnUnwritablePath) {
  TempDir dir;
  AudioClip clip{{0.1f}, 22050};
  EXPECT_EQ(CodeOf([&] { WriteWav(clip, dir / "no" / "such" / "dir.wav"); }),
            ErrorCode::kIoFailure);
}

TEST(SplitClip, ThreeWaySplitOfThirtySeconds) {
  AudioClip clip{std::vector<float>(661500, 0.25f), 22050};
  const auto parts = SplitClip(clip, 3);
  ASSERT_EQ(parts.size(), 3u);
  for (const auto& p : parts) {
    EXPECT_EQ(p.size(), 220500u);
    EXPECT_EQ(p.sample_rate, 22050);
  }
}

TEST(SplitClip, FloorArithmeticAndConcatenation) {
  AudioClip clip;
  for (int i = 0; i < 10; ++i) clip.samples.push_back(static_cast<float>(i));
  EXPECT_EQ(SplitClip(clip, 1).at(0), clip);
  const auto parts = SplitClip(clip, 3);
  ASSERT_EQ(parts.size(), 3u);
  std::vector<float> joined;
  for (const auto& p : parts) {
    EXPECT_EQ(p.size(), 3u);
    joined.insert(joined.end(), p.samples.begin(), p.samples.end());
  }
  joined.push_back(clip.samples.back());  // the dropped tail
  EXPECT_EQ(joined, clip.samples);
}

TEST(SplitClip, RejectsTooFewSamples) {
  AudioClip clip{{1.0f, 2.0f}, 22050};
  EXPECT_EQ(CodeOf([&] { SplitClip(clip, 3); }), ErrorCode::kEmptyClip);
  EXPECT_EQ(CodeOf([&] { SplitClip(AudioClip{}, 1); }), ErrorCode::kEmptyClip);
}

TEST(CenterCrop, TakesTheMiddle) {
  AudioClip clip;
  for (int i = 0; i < 10; ++i) clip.samples.push_back(static_cast<float>(i));
  const AudioClip c = CenterCrop(clip, 4);
  EXPECT_EQ(c.samples, (std::vector<float>{3, 4, 5, 6}));
  EXPECT_EQ(CenterCrop(clip, 20), clip);
}

TEST(AlignPairFromHead, TrimsLongerClipFromFront) {
  AudioClip a{{9, 9, 1, 2, 3}, 22050};
  AudioClip b{{1, 2, 3}, 22050};
  AlignPairFromHead(a, b);
  EXPECT_EQ(a.samples, (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(b.samples, (std::vector<float>{1, 2, 3}));
}

TEST(AssignSplits, ProportionsAndDeterminism) {
  for (size_t n : {0u, 1u, 7u, 30u, 100u, 3000u}) {
    const auto s = AssignSplits(n, 42);
    ASSERT_EQ(s.size(), n);
    std::map<Split, double> count;
    for (Split x : s) count[x] += 1;
    EXPECT_LE(std::fabs(count[Split::kTrain] - 0.85 * n), 1.0) << n;
    EXPECT_LE(std::fabs(count[Split::kVal] - 0.08 * n), 1.0) << n;
    EXPECT_LE(std::fabs(count[Split::kTest] - 0.07 * n), 1.0) << n;
    EXPECT_EQ(s, AssignSplits(n, 42));
  }
  EXPECT_NE(AssignSplits(100, 1), AssignSplits(100, 2));
}

TEST(Manifest, RoundTripsWithRelativePaths) {
  TempDir dir;
  DatasetManifest m;
  m.seed = 99;
  m.entries.push_back({Split::kTrain, dir / "seg" / "a.deg.wav", dir / "seg" / "a.ref.wav"});
  m.entries.push_back({Split::kTest, dir / "seg" / "b.deg.wav", dir / "seg" / "b.ref.wav"});
  WriteManifest(m, dir / "manifest.tsv");
  std::ifstream in(dir / "manifest.tsv");
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(first, "# seed=99");
  EXPECT_EQ(second, "train\tseg/a.deg.wav\tseg/a.ref.wav");
  EXPECT_EQ(ReadManifest(dir / "manifest.tsv"), m);
  EXPECT_EQ(m.Select(Split::kTest).size(), 1u);
}

TEST(Manifest, RejectsMalformedLines) {
  TempDir dir;
  std::ofstream(dir / "m.tsv") << "# seed=1\nbogus\ta\tb\n";
  EXPECT_THROW(ReadManifest(dir / "m.tsv"), Error);
}

TEST(LoadPair, RejectsLengthMismatch) {
  TempDir dir;
  WriteWav(AudioClip{{0.1f, 0.2f}, 22050}, dir / "d.wav");
  WriteWav(AudioClip{{0.1f}, 22050}, dir / "r.wav");
  EXPECT_EQ(CodeOf([&] { LoadPair({Split::kTrain, dir / "d.wav", dir / "r.wav"}); }),
            ErrorCode::kPairLengthMismatch);
}

TEST(ExpandEncoderTemplate, QuotesPathsAndFillsBitrate) {
  EXPECT_EQ(ExpandEncoderTemplate("enc {in} {out} -b {bitrate}", "/a b/x.wav",
                                  "/o'q.wav", 32),
            "enc '/a b/x.wav' '/o'\\''q.wav' -b 32");
}

std::string FakeTemplate() {
  return std::string("'") + ASE_FAKE_CODEC + "' {in} {out} {bitrate}";
}

TEST(PrepareDataset, BuildsAlignedSegmentPairs) {
  TempDir dir;
  const auto src = dir / "src";
  std::filesystem::create_directories(src / "nested");
  Rng rng(3);
  for (const char* name : {"a.wav", "b.wav", "nested/c.WAV"}) {
    WriteWav(testing::HarmonicClip(rng, 3000 + rng.Below(100)), src / name);
  }
  std::ofstream(src / "notes.txt") << "ignored";

  PrepareOptions opt;
  opt.encoder_template = FakeTemplate();
  opt.seed = 5;
  opt.workers = 2;
  const DatasetManifest m = PrepareDataset(src, dir / "work", opt);
  ASSERT_EQ(m.entries.size(), 9u);
  EXPECT_EQ(ReadManifest(dir / "work" / "manifest.tsv"), m);
  for (const auto& e : m.entries) {
    auto [deg, ref] = LoadPair(e);
    EXPECT_GT(ref.size(), 900u);
    // The fake codec's extra delay is trimmed, so the degraded clip is the
    // 3-tap average of the reference away from the segment edges.
    for (size_t i = 1; i + 1 < ref.size(); ++i) {
      const float expect = (ref.samples[i - 1] + ref.samples[i] + ref.samples[i + 1]) / 3.0f;
      ASSERT_NEAR(deg.samples[i], expect, 3.0 / 32768.0) << e.degraded_path << " " << i;
    }
  }

  const DatasetManifest again = PrepareDataset(src, dir / "work2", opt);
  ASSERT_EQ(again.entries.size(), m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(again.entries[i].split, m.entries[i].split);
    EXPECT_EQ(again.entries[i].degraded_path.filename(),
              m.entries[i].degraded_path.filename());
  }
}

TEST(PrepareDataset, EmptySourceGivesEmptyManifest) {
  TempDir dir;
  std::filesystem::create_directories(dir / "src");
  PrepareOptions opt;
  opt.encoder_template = FakeTemplate();
  const DatasetManifest m = PrepareDataset(dir / "src", dir / "work", opt);
  EXPECT_TRUE(m.entries.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "work" / "manifest.tsv"));
}

TEST(PrepareDataset, ReportsEncoderFailureWithOutput) {
  TempDir dir;
  std::filesystem::create_directories(dir / "src");
  Rng rng(1);
  WriteWav(testing::HarmonicClip(rng, 2000), dir / "src" / "a.wav");
  PrepareOptions opt;
  opt.encoder_template = FakeTemplate();
  opt.degraded_kbps = 0;
  try {
    PrepareDataset(dir / "src", dir / "work", opt);
    FAIL() << "expected EncoderFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEncoderFailure);
    EXPECT_NE(std::string(e.what()).find("encoder exploded"), std::string::npos);
  }
}

}  // namespace
}  // namespace ase
