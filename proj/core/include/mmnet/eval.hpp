#pragma once

#include <string>
#include <vector>

#include "mmnet/detector.hpp"
#include "mmnet/synth.hpp"

namespace mmnet {

struct Box {
  double y1 = 0, x1 = 0, y2 = 0, x2 = 0;
};

// Intersection over union; 0 for disjoint boxes.  Degenerate boxes are a
// usage error.
double iou(const Box& a, const Box& b);

enum class SpeedBucket { kFast = 0, kMedium = 1, kSlow = 2 };
const char* bucket_name(SpeedBucket b);

// Average IoU of each object's box against the same object's boxes within
// +-window nearby frames: fast < 0.7, slow > 0.9, medium between.  Length-1
// tracks are slow by convention.
std::vector<SpeedBucket> motion_speed_split(const std::vector<std::vector<TruthBox>>& boxes,
                                            int window = 10);

// One clip's detections and ground truth.
struct ClipEval {
  std::vector<FrameDetections> detections;    // per frame
  std::vector<std::vector<TruthBox>> truth;   // [frame][object]
  std::vector<SpeedBucket> object_bucket;     // per object instance
};

// Greedy score-descending matching at the IoU threshold, all-points
// interpolated precision/recall integral.  When `bucket` is set, truths
// outside the bucket are ignore regions: detections matching them are
// dropped rather than counted as false positives.
double average_precision(const std::vector<ClipEval>& clips, int cls, double iou_thresh,
                         const SpeedBucket* bucket = nullptr);

struct MapResult {
  double map = 0.0;
  std::vector<double> per_class;  // AP per class id, -1 when the class has no truths
};
MapResult mean_average_precision(const std::vector<ClipEval>& clips, int num_classes,
                                 double iou_thresh, const SpeedBucket* bucket = nullptr);

// Localization quality: per truth box, the best IoU over that frame's
// detections (class-agnostic); averaged overall and per bucket.
struct MeanIou {
  double overall = 0.0;
  double per_bucket[3] = {0, 0, 0};
  int count_overall = 0;
  int counts[3] = {0, 0, 0};
};
MeanIou mean_best_iou(const std::vector<ClipEval>& clips);

struct EvalReport {
  std::string config;
  double map = 0, map_fast = 0, map_medium = 0, map_slow = 0;
  std::vector<double> per_class_ap;
  double mean_iou = 0, mean_iou_fast = 0, mean_iou_medium = 0, mean_iou_slow = 0;
  double fps_full = 0, fps_prop = 0, ratio = 0;
};

std::string eval_csv_header();
std::string eval_csv_row(const EvalReport& r);

// Runs inference over every GOP of every clip and scores the detections.
EvalReport evaluate(const Model& model, const std::vector<TrainClip>& dataset,
                    const AblationConfig& config, const DetectOptions& opts);

// Wall-clock throughput: full per-frame extraction+detection versus
// GOP propagation.  Median of `repetitions` timed passes over all frames;
// decoding and file IO stay outside the timed regions, motion/residual
// rescaling inside.
struct ThroughputResult {
  double fps_full = 0, fps_prop = 0, ratio = 0;
  int frames = 0;
};
ThroughputResult bench_throughput(const Model& model, const std::vector<TrainClip>& dataset,
                                  int repetitions, const AblationConfig& config = {});

// Phase-2 trains each flagged mechanism set on `train` and evaluates on
// `eval`.  Timing columns are filled only when fps_reps > 0.
std::vector<EvalReport> run_ablation(const Model& base, const std::vector<TrainClip>& train,
                                     const std::vector<TrainClip>& eval,
                                     const std::vector<AblationConfig>& configs,
                                     const Phase2Config& phase2, const DetectOptions& opts,
                                     int fps_reps);

}  // namespace mmnet
