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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ase/checkpoint.h"
#include "ase/error.h"
#include "ase/losses.h"
#include "ase/metrics.h"
#include "ase/model.h"
#include "ase/pipeline.h"
#include "ase/quantize.h"
#include "ase/stft.h"
#include "ase/train.h"
#include "test_support.h"

namespace ase {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failures and a short summary for one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) pass_ = false;
  }
  void Note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome Finish() const {
    Outcome o{pass_, notes_};
    for (const auto& f : failures_) o.detail += " | failed: " + f;
    return o;
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string Fmt(const char* fmt, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Outcome StftShapeLaw() {
  Check c;
  const StackedSpectrogram s = StftStack(std::vector<float>(100000, 0.0f));
  c.Expect(s.shape() == std::vector<size_t>{2, 400, 512}, "100000 samples -> [2,400,512]");
  Rng rng(101);
  for (int i = 0; i < 20; ++i) {
    const size_t n = 1024 + rng.Below(120000);
    size_t frames = 0;
    for (size_t start = 0; start + 1024 <= n; start += 248) ++frames;
    const auto shape = StftStack(testing::UniformNoise(rng, n, 1.0)).shape();
    c.Expect(shape == std::vector<size_t>{2, frames, 512}, "length " + std::to_string(n));
  }
  c.Note("20 random lengths");
  return c.Finish();
}

Outcome IstftRoundTrip() {
  Check c;
  Rng rng(202);
  double worst = 1e9;
  for (int i = 0; i < 100; ++i) {
    const size_t n = 3000 + rng.Below(40000);
    const auto x = testing::BandLimitedNoise(rng, n, rng.Uniform(0.05, 1.0),
                                             rng.Uniform(2000.0, 9000.0));
    const AudioClip y = IstftUnstack(StftStack(x), {}, n, 22050);
    const double snr = testing::SnrDb(x, y.samples, 1024, n - 1024);
    worst = std::min(worst, snr);
    c.Expect(snr >= 60.0, "clip " + std::to_string(i) + Fmt(" snr %.2f dB", snr));
  }
  c.Note("100 band-limited clips, worst interior SNR " + Fmt("%.2f dB", worst));
  // Broadband input loses its Nyquist share in every frame. Reported only.
  const auto white = testing::UniformNoise(rng, 100000, 1.0);
  const AudioClip yw = IstftUnstack(StftStack(white), {}, white.size(), 22050);
  c.Note(Fmt("white-noise interior SNR %.2f dB (informational)",
             testing::SnrDb(white, yw.samples, 1024, white.size() - 1024)));
  return c.Finish();
}

struct FdResult {
  double rel = 0.0;
  size_t used = 0;
  size_t reprobed = 0;
  size_t straddled = 0;
};

// Max central-difference error over the entries, relative to the largest
// numeric derivative. With piecewise_linear set, the objective is linear in
// each entry between PReLU kinks, so a nonzero second difference means the
// bracket contains a kink. Such entries are re-probed with smaller steps and
// skipped only if every step straddles a kink.
template <typename Fn>
FdResult GroupError(std::vector<double*> entries, const std::vector<double>& analytic,
                    Fn&& loss, double step, bool piecewise_linear = false) {
  FdResult r;
  double max_err = 0.0, max_ref = 0.0;
  const double center = piecewise_linear ? loss() : 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    const double saved = *entries[i];
    bool clean = false;
    double numeric = 0.0;
    for (double h = step; h >= step / 100 * 0.999; h /= 10) {
      *entries[i] = saved + h;
      const double up = loss();
      *entries[i] = saved - h;
      const double down = loss();
      *entries[i] = saved;
      numeric = (up - down) / (2 * h);
      if (!piecewise_linear) {
        clean = true;
        break;
      }
      const double scale = std::fabs(up) + std::fabs(center) + std::fabs(down);
      if (std::fabs(up - 2 * center + down) <= 1e-11 * scale + 1e-14) {
        clean = true;
        if (h < step) ++r.reprobed;
        break;
      }
    }
    if (!clean) {
      ++r.straddled;
      continue;
    }
    max_err = std::max(max_err, std::fabs(numeric - analytic[i]));
    max_ref = std::max(max_ref, std::fabs(numeric));
    ++r.used;
  }
  r.rel = max_ref > 0 ? max_err / max_ref : (max_err > 0 ? INFINITY : 0.0);
  return r;
}

Outcome GradientSuite() {
  Check c;
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-4;
  constexpr size_t kSamplesPerGroup = 128;
  ModelConfig cfg;
  cfg.n_blocks = 2;
  ModelParams<double> p = InitParams<double>(cfg, 303);
  Rng rng(304);
  for (auto& b : p.blocks) {
    for (double& a : b.alpha.values()) a = rng.Uniform(0.0, 0.5);
  }
  const Tensor<double> x = testing::RandomTensor<double>(rng, {2, 16, 16});
  const Tensor<double> target = testing::RandomTensor<double>(rng, {2, 16, 16});
  const SsimConfig ssim;

  // Scalar objective <dy, f(x)> with a fixed random cotangent dy.
  const Tensor<double> dy = testing::RandomTensor<double>(rng, {2, 16, 16});
  auto dot = [&](const Tensor<double>& y) {
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) s += dy[i] * y[i];
    return s;
  };
  ForwardCache<double> cache;
  Forward(p, x, &cache);
  const BackwardResult<double> back = Backward(p, cache, dy);

  ModelParams<double> probe = p;
  std::vector<Tensor<double>*> groups;
  ForEachTensor(probe, [&](Tensor<double>& t) { groups.push_back(&t); });
  std::vector<const Tensor<double>*> grads;
  ForEachTensor(back.grads, [&](const Tensor<double>& t) { grads.push_back(&t); });
  auto objective = [&] { return dot(Forward(probe, x)); };
  double worst = 0.0;
  size_t probes = 0, straddled = 0, reprobed = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    std::vector<double*> entries;
    std::vector<double> analytic;
    const size_t n = groups[g]->size();
    const size_t stride = std::max<size_t>(1, n / kSamplesPerGroup);
    for (size_t i = 0; i < n; i += stride) {
      entries.push_back(&(*groups[g])[i]);
      analytic.push_back((*grads[g])[i]);
    }
    const FdResult r = GroupError(entries, analytic, objective, kStep, true);
    worst = std::max(worst, r.rel);
    probes += r.used + r.straddled;
    straddled += r.straddled;
    reprobed += r.reprobed;
    const std::string name =
        "block " + std::to_string(g / 5) + " " + std::string(kBlockTensorNames[g % 5]);
    c.Expect(r.rel < kTol, name + Fmt(" rel %.2e", r.rel));
    c.Expect(r.straddled * 20 <= r.used + r.straddled, name + " too many kink probes");
  }
  {
    Tensor<double> xp = x;
    std::vector<double*> entries;
    std::vector<double> analytic;
    for (size_t i = 0; i < xp.size(); i += 3) {
      entries.push_back(&xp[i]);
      analytic.push_back(back.dx[i]);
    }
    const FdResult r = GroupError(
        entries, analytic, [&] { return dot(Forward(p, xp)); }, kStep, true);
    worst = std::max(worst, r.rel);
    probes += r.used + r.straddled;
    straddled += r.straddled;
    reprobed += r.reprobed;
    c.Expect(r.rel < kTol, Fmt("model input rel %.2e", r.rel));
    c.Expect(r.straddled * 20 <= r.used + r.straddled, "model input too many kink probes");
  }

  // Loss functions on their own.
  Tensor<double> yh = testing::RandomTensor<double>(rng, {2, 16, 16});
  auto all = [](Tensor<double>& t) {
    std::vector<double*> v;
    for (double& e : t.values()) v.push_back(&e);
    return v;
  };
  const auto pixel = PixelLoss(yh, target);
  const double e_pixel = GroupError(all(yh), {pixel.grad.values().begin(), pixel.grad.values().end()},
                                    [&] { return PixelLoss(yh, target).loss; }, 1e-5).rel;
  c.Expect(e_pixel < kTol, Fmt("pixel loss rel %.2e", e_pixel));
  Tensor<double> mag_hat = Magnitude(yh);
  const Tensor<double> mag = Magnitude(target);
  const auto ss = SsimLoss(mag_hat, mag, ssim);
  const double e_ssim = GroupError(all(mag_hat), {ss.grad.values().begin(), ss.grad.values().end()},
                                   [&] { return SsimLoss(mag_hat, mag, ssim).loss; }, 1e-5).rel;
  c.Expect(e_ssim < kTol, Fmt("ssim loss rel %.2e", e_ssim));
  const auto total = TotalLoss(yh, target, ssim);
  const double e_total = GroupError(all(yh), {total.grad.values().begin(), total.grad.values().end()},
                                    [&] { return TotalLoss(yh, target, ssim).loss; }, 1e-6).rel;
  c.Expect(e_total < kTol, Fmt("total loss rel %.2e", e_total));
  worst = std::max({worst, e_pixel, e_ssim, e_total});
  c.Note("N=2, latent 256, [2,16,16], 10 parameter groups + input + 3 losses; worst rel " +
         Fmt("%.2e", worst) + "; " + std::to_string(straddled + reprobed) + " of " +
         std::to_string(probes) + " model probes straddled a PReLU kink at 1e-4, " +
         std::to_string(reprobed) + " re-probed cleanly at a smaller step, " +
         std::to_string(straddled) + " skipped");
  return c.Finish();
}

Outcome IdentityModel() {
  Check c;
  ModelConfig cfg;
  cfg.n_blocks = 5;
  const ModelParams<float> zero = ZeroParams<float>(cfg);
  Rng rng(404);
  const Tensor<float> x = testing::RandomTensor<float>(rng, {2, 40, 512});
  c.Expect(Forward(zero, x) == x, "zero-kernel N=5 forward is exact identity");
  const AudioClip in{testing::BandLimitedNoise(rng, 30000, 0.7), 22050};
  const AudioClip out = EnhanceClip(zero, in);
  const double snr = testing::SnrDb(in.samples, out.samples, 1024, in.size() - 1024);
  c.Expect(out.size() == in.size() && snr >= 60.0, Fmt("enhance interior SNR %.2f dB", snr));
  c.Note(Fmt("enhance interior SNR %.2f dB", snr));
  return c.Finish();
}

Outcome LossIdentities() {
  Check c;
  Rng rng(505);
  const Tensor<double> y = testing::RandomTensor<double>(rng, {2, 30, 40});
  double mean = 0.0;
  for (double v : y.values()) mean += v;
  mean /= static_cast<double>(y.size());
  const double p0 = PixelLoss(y, y).loss;
  const double p1 = PixelLoss(Tensor<double>(y.shape(), mean), y).loss;
  const Tensor<double> mag = Magnitude(y);
  const double s1 = SsimLoss(mag, mag, SsimConfig{}).ssim_mean;
  const double t0 = TotalLoss(y, y, SsimConfig{}).loss;
  c.Expect(std::fabs(p0) <= 1e-12, Fmt("pixel(y,y) = %.3e", p0));
  c.Expect(std::fabs(p1 - 1.0) <= 1e-12, Fmt("pixel(y,mean) - 1 = %.3e", p1 - 1.0));
  c.Expect(std::fabs(s1 - 1.0) <= 1e-12, Fmt("ssim(y,y) - 1 = %.3e", s1 - 1.0));
  c.Expect(std::fabs(t0) <= 1e-12, Fmt("total(y,y) = %.3e", t0));
  c.Note("pixel 0 and 1, ssim 1, total 0 within 1e-12");
  return c.Finish();
}

Outcome MetricOracles() {
  Check c;
  Rng rng(606);
  double worst_snr = 0.0, worst_lsd = 0.0;
  for (int i = 0; i < 16; ++i) {
    const size_t n = 2048 + rng.Below(4000);
    const auto y = testing::UniformNoise(rng, n, 1.0);
    const auto yh = testing::UniformNoise(rng, n, rng.Uniform(0.1, 1.0));
    const double ds = std::fabs(Snr(y, yh) - testing::BruteForceSnr(y, yh));
    const double dl = std::fabs(Lsd(y, yh) - testing::BruteForceLsd(y, yh));
    worst_snr = std::max(worst_snr, ds);
    worst_lsd = std::max(worst_lsd, dl);
    c.Expect(ds <= 1e-9, Fmt("snr pair diff %.2e", ds));
    c.Expect(dl <= 1e-9, Fmt("lsd pair diff %.2e", dl));
  }
  const auto y = testing::UniformNoise(rng, 3 * 22050, 0.3);
  std::vector<float> ten(y);
  for (float& v : ten) v *= 10.0f;
  const double lsd10 = Lsd(y, ten);
  c.Expect(std::fabs(lsd10 - 2.0) <= 1e-9, Fmt("lsd(y,10y) - 2 = %.2e", lsd10 - 2.0));
  const AudioClip speech = testing::HarmonicClip(rng, 3 * 22050);
  const double st = Stoi(speech.samples, speech.samples, 22050);
  c.Expect(st >= 0.999, Fmt("stoi(y,y) = %.6f", st));
  c.Note(Fmt("max |snr diff| %.1e", worst_snr) + Fmt(", max |lsd diff| %.1e", worst_lsd) +
         Fmt(", stoi(y,y) %.6f", st));
  return c.Finish();
}

Outcome Quantization() {
  Check c;
  for (size_t n : {1u, 5u}) {
    ModelConfig cfg;
    cfg.n_blocks = n;
    const ModelParams<float> p = InitParams<float>(cfg, 700 + n);
    const QuantizedModel q = QuantizeModel(p);
    const double ratio = static_cast<double>(QuantizedPayloadBytes(q)) /
                         static_cast<double>(CheckpointPayloadBytes(p));
    c.Expect(ratio <= 0.5, "N=" + std::to_string(n) + Fmt(" payload ratio %.4f", ratio));
    c.Note("N=" + std::to_string(n) + Fmt(" payload ratio %.4f", ratio));
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      const auto& fb = p.blocks[b];
      const auto& qb = q.blocks[b];
      const std::pair<const Tensor<float>*, const QuantizedTensor*> pairs[] = {
          {&fb.dw1, &qb.dw1}, {&fb.pw1, &qb.pw1}, {&fb.dw2, &qb.dw2}, {&fb.pw2, &qb.pw2}};
      for (const auto& [f, qt] : pairs) {
        const Tensor<float> d = Dequantize(*qt);
        for (size_t i = 0; i < f->size(); ++i) {
          if (std::fabs(d[i] - (*f)[i]) > qt->scale / 2 * (1 + 1e-6)) {
            c.Expect(false, "per-weight error above scale/2");
            break;
          }
        }
      }
    }
  }
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    ModelConfig cfg;
    ModelParams<float> p = InitParams<float>(cfg, 7000 + seed);
    Rng rng(8000 + seed);
    for (float& a : p.blocks[0].alpha.values()) a = static_cast<float>(rng.Uniform(0.0, 0.3));
    const Tensor<float> x = testing::RandomTensor<float>(rng, {2, 32, 64});
    const Tensor<float> f = Forward(p, x);
    const Tensor<float> qy = QuantizedForward(QuantizeModel(p), x);
    float dev = 0.0f, ref = 0.0f;
    for (size_t i = 0; i < f.size(); ++i) {
      dev = std::max(dev, std::fabs(f[i] - qy[i]));
      ref = std::max(ref, std::fabs(f[i]));
    }
    worst = std::max(worst, static_cast<double>(dev / ref));
    c.Expect(dev <= 0.05f * ref, "seed " + std::to_string(seed) + Fmt(" deviation %.4f", dev / ref));
  }
  c.Note(Fmt("worst forward deviation %.4f of max-abs over 50 trials", worst));
  return c.Finish();
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome TrainingSmoke() {
  Check c;
  testing::TempDir dir;
  // 32 STFT frames per clip.
  constexpr size_t kLength = 1024 + 31 * 248;
  const DatasetManifest m = testing::WriteSyntheticPairs(dir / "data", 30, kLength, 808);
  ModelConfig model;
  model.n_blocks = 1;
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 4;
  cfg.seed = 809;
  cfg.crop_length = kLength;
  const TrainResult a = Train(m, model, cfg, SsimConfig{}, dir / "run_a", 1);
  const double first = a.log.front().train_loss;
  const double last = a.log.back().train_loss;
  c.Expect(a.log.size() == 20, "20 epoch records");
  c.Expect(last <= 0.5 * first, Fmt("final/first = %.4f", last / first));
  const TrainResult b = Train(m, model, cfg, SsimConfig{}, dir / "run_b", 1);
  const bool same = Slurp(dir / "run_a" / "train_log.csv") == Slurp(dir / "run_b" / "train_log.csv");
  c.Expect(same, "rerun reproduces the loss log bit-exactly");
  c.Note(Fmt("first %.5f", first) + Fmt(", final %.5f", last) + Fmt(" (ratio %.4f)", last / first) +
         (same ? ", rerun log identical" : ", rerun log differs"));
  return c.Finish();
}

Outcome LatencySanity() {
  Check c;
  const ModelParams<float> p = InitParams<float>(ModelConfig{}, 909);
  const QuantizedModel q = QuantizeModel(p);
  // Interleave the two paths so drift in machine load affects both.
  std::vector<double> fl, qu;
  for (int round = 0; round < 5; ++round) {
    fl.push_back(BenchLatency(p, 3, 100000, 910 + round).mean_ms);
    qu.push_back(BenchLatency(q, 3, 100000, 910 + round).mean_ms);
  }
  const LatencyStats f = SummarizeLatency(fl), qs = SummarizeLatency(qu);
  c.Expect(qs.mean_ms <= 1.5 * f.mean_ms,
           Fmt("int8 mean %.1f ms", qs.mean_ms) + Fmt(" vs float %.1f ms", f.mean_ms));
  c.Note(Fmt("float mean %.1f ms", f.mean_ms) + Fmt(" p50 %.1f", f.p50_ms) +
         Fmt(" p95 %.1f", f.p95_ms) + Fmt("; int8 mean %.1f ms", qs.mean_ms) +
         Fmt(" p50 %.1f", qs.p50_ms) + Fmt(" p95 %.1f", qs.p95_ms) +
         Fmt("; ratio %.3f", qs.mean_ms / f.mean_ms));
  return c.Finish();
}

}  // namespace
}  // namespace ase

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<ase::Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"stft_shape_law", ase::StftShapeLaw},
      {"istft_round_trip", ase::IstftRoundTrip},
      {"gradient_suite", ase::GradientSuite},
      {"identity_model", ase::IdentityModel},
      {"loss_identities", ase::LossIdentities},
      {"metric_oracles", ase::MetricOracles},
      {"quantization", ase::Quantization},
      {"training_smoke", ase::TrainingSmoke},
      {"latency_sanity", ase::LatencySanity},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.name) continue;
    const auto start = std::chrono::steady_clock::now();
    ase::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
