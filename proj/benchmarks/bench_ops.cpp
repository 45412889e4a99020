#include <benchmark/benchmark.h>

#include "mmnet/codec.hpp"
#include "mmnet/detector.hpp"
#include "mmnet/eval.hpp"
#include "mmnet/synth.hpp"

using namespace mmnet;

namespace {

RawFrame test_frame(int h, int w, uint64_t seed) {
  Rng rng(seed);
  RawFrame f = Tensor::map(h, w, 3);
  for (int64_t i = 0; i < f.size(); ++i) f[i] = rng.uniform(0.0, 1.0);
  return f;
}

void BM_Conv2dForward(benchmark::State& state) {
  Rng rng(1);
  const int ch = static_cast<int>(state.range(0));
  FeatureMap in = Tensor::map(20, 20, ch);
  for (int64_t i = 0; i < in.size(); ++i) in[i] = rng.uniform(-1.0, 1.0);
  ConvParams p = make_conv(ch, ch, 3, 3, 1, 1, rng);
  for (auto _ : state) {
    FeatureMap out = conv2d(in, p);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(32)->Arg(64);

void BM_BilinearWarp(benchmark::State& state) {
  Rng rng(2);
  FeatureMap f = Tensor::map(5, 5, 64);
  for (int64_t i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
  MotionField m = MotionField::zero(5, 5);
  for (size_t i = 0; i < m.dy.size(); ++i) {
    m.dy[i] = rng.uniform(-2.0, 2.0);
    m.dx[i] = rng.uniform(-2.0, 2.0);
  }
  for (auto _ : state) {
    FeatureMap out = bilinear_warp(f, m);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_BilinearWarp);

void BM_BlockMatchEncode(benchmark::State& state) {
  SceneConfig cfg;
  cfg.height = 80;
  cfg.width = 80;
  cfg.frames = 12;
  cfg.speed_min = 1.0;
  cfg.speed_max = 6.0;
  auto [frames, truth] = generate_synthetic_video(cfg, 3);
  for (auto _ : state) {
    auto gops = block_match_encode(frames, {12, 8, false});
    benchmark::DoNotOptimize(gops.data());
  }
}
BENCHMARK(BM_BlockMatchEncode);

void BM_ExtractPyramid(benchmark::State& state) {
  Model m = make_model({}, 4);
  RawFrame f = test_frame(80, 80, 5);
  for (auto _ : state) {
    PyramidFeatures p = extract_pyramid(f, m.extractor, m.config);
    benchmark::DoNotOptimize(p.levels.data());
  }
}
BENCHMARK(BM_ExtractPyramid);

void BM_LstmStep(benchmark::State& state) {
  Rng rng(6);
  Model m = make_model({}, 6);
  FeatureMap init = Tensor::map(5, 5, 64);
  for (int64_t i = 0; i < init.size(); ++i) init[i] = rng.uniform(-1.0, 1.0);
  MemoryState s = init_state(init);
  ResidualGrid res = Tensor::map(5, 5, 3);
  MotionField field = MotionField::uniform(5, 5, 0.25, -0.5);
  for (auto _ : state) {
    StepResult r = step(s, field, res, m.cell);
    benchmark::DoNotOptimize(r.output.data());
  }
}
BENCHMARK(BM_LstmStep);

void BM_InferGop(benchmark::State& state) {
  SceneConfig cfg;
  cfg.height = 80;
  cfg.width = 80;
  cfg.frames = 12;
  cfg.speed_min = 1.0;
  cfg.speed_max = 4.0;
  auto [frames, truth] = generate_synthetic_video(cfg, 7);
  auto gops = block_match_encode(frames, {12, 8, false});
  Model m = make_model({}, 8);
  for (auto _ : state) {
    GopDetections d = infer_gop(gops[0], m, ablation_config('f'), {});
    benchmark::DoNotOptimize(d.frames.data());
  }
}
BENCHMARK(BM_InferGop);

void BM_FullPerFrame(benchmark::State& state) {
  SceneConfig cfg;
  cfg.height = 80;
  cfg.width = 80;
  cfg.frames = 12;
  cfg.speed_min = 1.0;
  cfg.speed_max = 4.0;
  auto [frames, truth] = generate_synthetic_video(cfg, 7);
  Model m = make_model({}, 8);
  for (auto _ : state) {
    for (const RawFrame& f : frames) {
      PyramidFeatures p = extract_pyramid(f, m.extractor, m.config);
      FrameDetections d = detect(p.top(), m.head, {});
      benchmark::DoNotOptimize(d.data());
    }
  }
}
BENCHMARK(BM_FullPerFrame);

}  // namespace

BENCHMARK_MAIN();
