#include "mmnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mmnet/threading.hpp"

namespace mmnet {

double iou(const Box& a, const Box& b) {
  if (a.y2 <= a.y1 || a.x2 <= a.x1 || b.y2 <= b.y1 || b.x2 <= b.x1)
    throw UsageError("iou: degenerate box");
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  if (iy <= 0 || ix <= 0) return 0.0;
  const double inter = iy * ix;
  const double uni = (a.y2 - a.y1) * (a.x2 - a.x1) + (b.y2 - b.y1) * (b.x2 - b.x1) - inter;
  return inter / uni;
}

const char* bucket_name(SpeedBucket b) {
  switch (b) {
    case SpeedBucket::kFast: return "fast";
    case SpeedBucket::kMedium: return "medium";
    case SpeedBucket::kSlow: return "slow";
  }
  return "?";
}

std::vector<SpeedBucket> motion_speed_split(const std::vector<std::vector<TruthBox>>& boxes,
                                            int window) {
  const int frames = static_cast<int>(boxes.size());
  const int objects = frames > 0 ? static_cast<int>(boxes[0].size()) : 0;
  std::vector<SpeedBucket> out(static_cast<size_t>(objects), SpeedBucket::kSlow);
  for (int o = 0; o < objects; ++o) {
    double sum = 0.0;
    int n = 0;
    for (int t = 0; t < frames; ++t) {
      const TruthBox& a = boxes[static_cast<size_t>(t)][static_cast<size_t>(o)];
      for (int d = -window; d <= window; ++d) {
        if (d == 0) continue;
        const int s = t + d;
        if (s < 0 || s >= frames) continue;
        const TruthBox& b = boxes[static_cast<size_t>(s)][static_cast<size_t>(o)];
        sum += iou(Box{a.y1, a.x1, a.y2, a.x2}, Box{b.y1, b.x1, b.y2, b.x2});
        ++n;
      }
    }
    if (n == 0) {
      out[static_cast<size_t>(o)] = SpeedBucket::kSlow;  // length-1 track
      continue;
    }
    const double miou = sum / n;
    out[static_cast<size_t>(o)] =
        miou < 0.7 ? SpeedBucket::kFast : (miou > 0.9 ? SpeedBucket::kSlow : SpeedBucket::kMedium);
  }
  return out;
}

namespace {

struct FlatDet {
  int clip, frame;
  double score;
  Box box;
};

}  // namespace

double average_precision(const std::vector<ClipEval>& clips, int cls, double iou_thresh,
                         const SpeedBucket* bucket) {
  // Gather class detections and per-frame truth (real vs ignored).
  std::vector<FlatDet> dets;
  int total_truths = 0;
  // matched flags per clip/frame/object
  std::vector<std::vector<std::vector<uint8_t>>> used(clips.size());
  for (size_t ci = 0; ci < clips.size(); ++ci) {
    used[ci].resize(clips[ci].truth.size());
    for (size_t fi = 0; fi < clips[ci].truth.size(); ++fi) {
      used[ci][fi].assign(clips[ci].truth[fi].size(), 0);
      for (size_t oi = 0; oi < clips[ci].truth[fi].size(); ++oi) {
        if (clips[ci].truth[fi][oi].cls != cls) continue;
        const bool ignored = bucket && clips[ci].object_bucket[oi] != *bucket;
        if (!ignored) ++total_truths;
      }
    }
    for (size_t fi = 0; fi < clips[ci].detections.size(); ++fi)
      for (const DetectionBox& d : clips[ci].detections[fi])
        if (d.cls == cls)
          dets.push_back({static_cast<int>(ci), static_cast<int>(fi), d.score,
                          Box{d.y1, d.x1, d.y2, d.x2}});
  }
  if (total_truths == 0) return -1.0;

  std::sort(dets.begin(), dets.end(), [](const FlatDet& a, const FlatDet& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.clip != b.clip) return a.clip < b.clip;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.box.y1 < b.box.y1;
  });

  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  int tp = 0, fp = 0;
  for (const FlatDet& d : dets) {
    const auto& truth = clips[static_cast<size_t>(d.clip)].truth[static_cast<size_t>(d.frame)];
    auto& flags = used[static_cast<size_t>(d.clip)][static_cast<size_t>(d.frame)];
    int best_real = -1, best_ignored = -1;
    double best_real_iou = iou_thresh, best_ignored_iou = iou_thresh;
    for (size_t oi = 0; oi < truth.size(); ++oi) {
      if (truth[oi].cls != cls) continue;
      const double v = iou(d.box, Box{truth[oi].y1, truth[oi].x1, truth[oi].y2, truth[oi].x2});
      const bool ignored =
          bucket && clips[static_cast<size_t>(d.clip)].object_bucket[oi] != *bucket;
      if (ignored) {
        if (v >= best_ignored_iou) {
          best_ignored_iou = v;
          best_ignored = static_cast<int>(oi);
        }
      } else if (!flags[oi] && v >= best_real_iou) {
        best_real_iou = v;
        best_real = static_cast<int>(oi);
      }
    }
    if (best_real >= 0) {
      flags[static_cast<size_t>(best_real)] = 1;
      ++tp;
    } else if (best_ignored >= 0) {
      continue;  // matches an ignored truth: neither TP nor FP
    } else {
      ++fp;
    }
    pr.emplace_back(static_cast<double>(tp) / total_truths,
                    static_cast<double>(tp) / (tp + fp));
  }

  // All-points interpolation: integrate max precision at recall >= r.
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < pr.size(); ++i) {
    double pmax = 0.0;
    for (size_t j = i; j < pr.size(); ++j) pmax = std::max(pmax, pr[j].second);
    ap += (pr[i].first - prev_recall) * pmax;
    prev_recall = pr[i].first;
  }
  return ap;
}

MapResult mean_average_precision(const std::vector<ClipEval>& clips, int num_classes,
                                 double iou_thresh, const SpeedBucket* bucket) {
  MapResult r;
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double ap = average_precision(clips, c, iou_thresh, bucket);
    r.per_class.push_back(ap);
    if (ap >= 0.0) {
      sum += ap;
      ++n;
    }
  }
  r.map = n > 0 ? sum / n : 0.0;
  return r;
}

MeanIou mean_best_iou(const std::vector<ClipEval>& clips) {
  MeanIou m;
  double sums[3] = {0, 0, 0};
  double total = 0.0;
  for (const ClipEval& clip : clips) {
    for (size_t fi = 0; fi < clip.truth.size(); ++fi) {
      for (size_t oi = 0; oi < clip.truth[fi].size(); ++oi) {
        const TruthBox& t = clip.truth[fi][oi];
        double best = 0.0;
        if (fi < clip.detections.size())
          for (const DetectionBox& d : clip.detections[fi])
            best = std::max(best, iou(Box{t.y1, t.x1, t.y2, t.x2}, Box{d.y1, d.x1, d.y2, d.x2}));
        const int b = static_cast<int>(clip.object_bucket[oi]);
        sums[b] += best;
        ++m.counts[b];
        total += best;
        ++m.count_overall;
      }
    }
  }
  m.overall = m.count_overall > 0 ? total / m.count_overall : 0.0;
  for (int b = 0; b < 3; ++b) m.per_bucket[b] = m.counts[b] > 0 ? sums[b] / m.counts[b] : 0.0;
  return m;
}

std::string eval_csv_header() {
  return "config,map,map_fast,map_medium,map_slow,fps_full,fps_prop,ratio";
}

std::string eval_csv_row(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f", r.config.c_str(), r.map,
                r.map_fast, r.map_medium, r.map_slow, r.fps_full, r.fps_prop, r.ratio);
  return buf;
}

EvalReport evaluate(const Model& model, const std::vector<TrainClip>& dataset,
                    const AblationConfig& config, const DetectOptions& opts) {
  if (dataset.empty()) throw UsageError("evaluate: empty dataset");
  std::vector<ClipEval> clips(dataset.size());
  parallel_for(static_cast<int>(dataset.size()), [&](int ci) {
    const TrainClip& clip = dataset[static_cast<size_t>(ci)];
    ClipEval ce;
    ce.truth = clip.truth;
    ce.object_bucket = motion_speed_split(clip.truth);
    for (const Gop& gop : clip.gops) {
      GopDetections gd = infer_gop(gop, model, config, opts);
      for (auto& f : gd.frames) ce.detections.push_back(std::move(f));
    }
    clips[static_cast<size_t>(ci)] = std::move(ce);
  });

  EvalReport r;
  r.config = ablation_name(config);
  MapResult overall = mean_average_precision(clips, kNumClasses, 0.5);
  r.map = overall.map;
  r.per_class_ap = overall.per_class;
  SpeedBucket b = SpeedBucket::kFast;
  r.map_fast = mean_average_precision(clips, kNumClasses, 0.5, &b).map;
  b = SpeedBucket::kMedium;
  r.map_medium = mean_average_precision(clips, kNumClasses, 0.5, &b).map;
  b = SpeedBucket::kSlow;
  r.map_slow = mean_average_precision(clips, kNumClasses, 0.5, &b).map;
  MeanIou mi = mean_best_iou(clips);
  r.mean_iou = mi.overall;
  r.mean_iou_fast = mi.per_bucket[0];
  r.mean_iou_medium = mi.per_bucket[1];
  r.mean_iou_slow = mi.per_bucket[2];
  return r;
}

ThroughputResult bench_throughput(const Model& model, const std::vector<TrainClip>& dataset,
                                  int repetitions, const AblationConfig& config) {
  if (repetitions < 1) throw UsageError("bench_throughput: repetitions must be >= 1");
  int frames = 0;
  for (const TrainClip& c : dataset) frames += static_cast<int>(c.frames.size());
  if (frames < 100) throw UsageError("bench_throughput: need at least 100 frames");

  DetectOptions opts;
  using clock = std::chrono::steady_clock;
  auto run_full = [&] {
    for (const TrainClip& clip : dataset)
      for (const RawFrame& f : clip.frames) {
        PyramidFeatures pf = extract_pyramid(f, model.extractor, model.config);
        FrameDetections d = detect(pf.top(), model.head, opts);
        (void)d;
      }
  };
  auto run_prop = [&] {
    for (const TrainClip& clip : dataset)
      for (const Gop& gop : clip.gops) {
        GopDetections d = infer_gop(gop, model, config, opts);
        (void)d;
      }
  };

  // Warm-up pass, excluded from timing.
  run_full();
  run_prop();

  std::vector<double> full_times, prop_times;
  for (int rep = 0; rep < repetitions; ++rep) {
    auto t0 = clock::now();
    run_full();
    auto t1 = clock::now();
    run_prop();
    auto t2 = clock::now();
    full_times.push_back(std::chrono::duration<double>(t1 - t0).count());
    prop_times.push_back(std::chrono::duration<double>(t2 - t1).count());
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  ThroughputResult r;
  r.frames = frames;
  r.fps_full = frames / median(full_times);
  r.fps_prop = frames / median(prop_times);
  r.ratio = r.fps_prop / r.fps_full;
  return r;
}

std::vector<EvalReport> run_ablation(const Model& base, const std::vector<TrainClip>& train,
                                     const std::vector<TrainClip>& eval,
                                     const std::vector<AblationConfig>& configs,
                                     const Phase2Config& phase2, const DetectOptions& opts,
                                     int fps_reps) {
  std::vector<EvalReport> reports;
  for (const AblationConfig& config : configs) {
    validate_ablation(config);
    Model model = base;
    train_phase2(model, train, config, phase2);
    EvalReport r = evaluate(model, eval, config, opts);
    if (fps_reps > 0) {
      ThroughputResult t = bench_throughput(model, eval, fps_reps, config);
      r.fps_full = t.fps_full;
      r.fps_prop = t.fps_prop;
      r.ratio = t.ratio;
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace mmnet
