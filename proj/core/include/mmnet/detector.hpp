#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mmnet/codec.hpp"
#include "mmnet/lstm.hpp"
#include "mmnet/pyramid.hpp"
#include "mmnet/synth.hpp"

namespace mmnet {

// Three-stage extractor: stride-2 stem, then per stage `convs_per_stage`
// convolutions at the incoming stride followed by a stride-2 downsample.
// Stage outputs form the pyramid at strides 4/8/16.
struct ExtractorConfig {
  int convs_per_stage = 4;
  std::array<int, 3> widths = {16, 32, 64};
  int top_channels() const { return widths[2]; }
};

struct ExtractorParams {
  ConvParams stem;
  std::vector<std::vector<ConvParams>> stage_convs;  // [stage][conv]
  std::vector<ConvParams> stage_down;                // [stage]
};

struct ExtractorVars {
  ConvVars stem;
  std::vector<std::vector<ConvVars>> stage_convs;
  std::vector<ConvVars> stage_down;
};

// Anchor-free head: a 1x1 conv emitting (objectness, class logits, dy, dx,
// log h, log w) per stride-16 cell.
struct HeadParams {
  ConvParams conv;
  int num_classes = kNumClasses;
  int stride = 16;
};

struct DetectionBox {
  int cls = 0;
  double score = 0.0;
  double y1 = 0, x1 = 0, y2 = 0, x2 = 0;
};
using FrameDetections = std::vector<DetectionBox>;

struct GopDetections {
  std::vector<FrameDetections> frames;  // length n+1
};

struct DetectOptions {
  double score_thresh = 0.5;
  double nms_iou = 0.5;
};

// Table-1-style mechanism switches.  At least one of mv / residual / lstm
// must be enabled.
struct AblationConfig {
  bool use_mv = true;
  bool use_residual = true;
  bool use_lstm = true;
  bool use_attention = true;
};
AblationConfig ablation_config(char letter);  // 'a'..'f'
std::string ablation_name(const AblationConfig& c);
void validate_ablation(const AblationConfig& c);

struct Model {
  ExtractorConfig config;
  ExtractorParams extractor;
  AttentionParams attention;
  CellParams cell;
  ConvParams direct_residual;  // 1x1 3 -> top channels, for the lstm-off path
  HeadParams head;
};

Model make_model(const ExtractorConfig& config, uint64_t seed);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// Named parameter traversal (checkpointing, SGD bookkeeping).
void for_each_param(Model& model, const std::function<void(const std::string&, Tensor&)>& fn);

struct ModelVars {
  ExtractorVars extractor;
  AttentionVars attention;
  CellVars cell;
  ConvVars direct_residual;
  ConvVars head;
};

struct TrainableSet {
  bool extractor = false, head = false, attention = false, cell = false, direct_residual = false;
};

ModelVars register_model(Tape& tape, const Model& model, const TrainableSet& trainable);

// (tensor in model, leaf on tape) pairs for every trainable group.
std::vector<std::pair<Tensor*, Var>> trainable_pairs(Model& model, const ModelVars& vars,
                                                     const TrainableSet& trainable);

// Graph builders.
std::vector<Var> extract_pyramid_t(Tape& tape, Var frame, const ExtractorVars& ev);
Var head_map_t(Tape& tape, Var features, const ConvVars& head);

// Pure forward passes.
PyramidFeatures extract_pyramid(const RawFrame& frame, const ExtractorParams& params,
                                const ExtractorConfig& config);
FrameDetections detect(const FeatureMap& features, const HeadParams& head,
                       const DetectOptions& opts);
GopDetections infer_gop(const Gop& gop, const Model& model, const AblationConfig& config,
                        const DetectOptions& opts);

// Per-frame memory features [c_t .. c_{t+n}] for a GOP (visualization and
// feature-level checks).
std::vector<FeatureMap> gop_memory_features(const Gop& gop, const Model& model,
                                            const AblationConfig& config);

// Head targets: positives are cells whose center falls inside a truth box.
struct CellTargets {
  int grid_h = 0, grid_w = 0, num_classes = 0;
  std::vector<uint8_t> positive;
  std::vector<int> cls;
  std::vector<std::array<double, 4>> box;  // dy, dx, log h, log w
};
CellTargets make_targets(const std::vector<TruthBox>& truth, int grid_h, int grid_w, int stride,
                         int num_classes);
// Inverse of target encoding for one positive cell.
DetectionBox decode_cell(int iy, int ix, const std::array<double, 4>& box, int stride);

// Objectness BCE over all cells plus class CE and weighted L1 box terms over
// positive cells.
Var detection_loss_t(Tape& tape, Var head_map, const CellTargets& targets, double box_weight);

// Training data: decoded clips with truth.
struct TrainClip {
  std::vector<Gop> gops;
  std::vector<RawFrame> frames;           // decoded, concatenated over gops
  std::vector<std::vector<TruthBox>> truth;  // [frame][object]
};

struct Phase1Config {
  int epochs = 30;
  double lr = 3e-3;
  double lr_drop_factor = 0.1;
  double lr_drop_after = 2.0 / 3.0;  // fraction of epochs at full lr
  double momentum = 0.9;
  int frames_per_clip = 8;  // sampled per epoch
  double box_weight = 2.0;
  uint64_t seed = 7;
};

struct Phase2Config {
  int epochs = 16;
  double lr = 5e-4;
  double lr_drop_factor = 0.1;
  double lr_drop_after = 2.0 / 3.0;
  double momentum = 0.9;
  double box_weight = 2.0;
  uint64_t seed = 7;
};

Model train_phase1(const std::vector<TrainClip>& dataset, const ExtractorConfig& config,
                   const Phase1Config& cfg);
void train_phase2(Model& model, const std::vector<TrainClip>& dataset,
                  const AblationConfig& ablation, const Phase2Config& cfg);

}  // namespace mmnet
