#include "mmnet/detector.hpp"

#include <algorithm>
#include <cmath>

#include "mmnet/checkpoint.hpp"
#include "mmnet/eval.hpp"

namespace mmnet {

namespace {

constexpr int kResidualChannels = 8;
constexpr int kMlpHidden = 16;
constexpr double kBoxLogClamp = 4.0;

int head_channels(int num_classes) { return 1 + num_classes + 4; }

double sigmoid1(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

AblationConfig ablation_config(char letter) {
  switch (letter) {
    case 'a': return {false, false, true, false};
    case 'b': return {false, true, true, false};
    case 'c': return {true, true, false, false};
    case 'd': return {true, false, true, false};
    case 'e': return {true, true, true, false};
    case 'f': return {true, true, true, true};
    default: throw UsageError(std::string("unknown ablation config '") + letter + "', expected a-f");
  }
}

std::string ablation_name(const AblationConfig& c) {
  for (char l = 'a'; l <= 'f'; ++l) {
    AblationConfig ref = ablation_config(l);
    if (ref.use_mv == c.use_mv && ref.use_residual == c.use_residual &&
        ref.use_lstm == c.use_lstm && ref.use_attention == c.use_attention)
      return std::string(1, l);
  }
  std::string s = "custom";
  s += c.use_mv ? "+mv" : "-mv";
  s += c.use_residual ? "+res" : "-res";
  s += c.use_lstm ? "+lstm" : "-lstm";
  s += c.use_attention ? "+attn" : "-attn";
  return s;
}

void validate_ablation(const AblationConfig& c) {
  if (!c.use_mv && !c.use_residual && !c.use_lstm)
    throw ConfigError("ablation: at least one propagation mechanism must be enabled");
}

Model make_model(const ExtractorConfig& config, uint64_t seed) {
  Rng rng(seed);
  Model m;
  m.config = config;
  m.extractor.stem = make_conv(config.widths[0], 3, 3, 3, 2, 1, rng);
  // Pixels sit in [0, 1] around a large DC level; folding a -0.5 input shift
  // into the stem bias keeps the deep ReLU stack responsive to the small
  // texture signal at initialization while staying a plain learnable bias.
  for (int oc = 0; oc < config.widths[0]; ++oc) {
    double wsum = 0.0;
    for (int ic = 0; ic < 3; ++ic)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) wsum += m.extractor.stem.kernel.at4(oc, ic, ky, kx);
    m.extractor.stem.bias[oc] = -0.5 * wsum;
  }
  int prev = config.widths[0];
  for (int s = 0; s < 3; ++s) {
    const int w = config.widths[static_cast<size_t>(s)];
    std::vector<ConvParams> convs;
    for (int i = 0; i < config.convs_per_stage; ++i) {
      convs.push_back(make_conv(w, i == 0 ? prev : w, 3, 3, 1, 1, rng));
    }
    m.extractor.stage_convs.push_back(std::move(convs));
    m.extractor.stage_down.push_back(make_conv(w, w, 3, 3, 2, 1, rng));
    prev = w;
  }
  m.attention = make_attention({config.widths[0], config.widths[1], config.widths[2]},
                               config.top_channels(), kMlpHidden, rng);
  m.cell = make_cell(config.top_channels(), kResidualChannels, rng);
  m.direct_residual = make_conv(config.top_channels(), 3, 1, 1, 1, 0, rng);
  m.head.conv = make_conv(head_channels(kNumClasses), config.top_channels(), 1, 1, 1, 0, rng);
  m.head.num_classes = kNumClasses;
  m.head.stride = 16;
  return m;
}

void for_each_param(Model& m, const std::function<void(const std::string&, Tensor&)>& fn) {
  auto conv = [&fn](const std::string& name, ConvParams& p) {
    fn(name + ".kernel", p.kernel);
    fn(name + ".bias", p.bias);
  };
  conv("extractor.stem", m.extractor.stem);
  for (size_t s = 0; s < m.extractor.stage_convs.size(); ++s) {
    for (size_t i = 0; i < m.extractor.stage_convs[s].size(); ++i)
      conv("extractor.stage" + std::to_string(s) + ".conv" + std::to_string(i),
           m.extractor.stage_convs[s][i]);
    conv("extractor.stage" + std::to_string(s) + ".down", m.extractor.stage_down[s]);
  }
  for (size_t l = 0; l < m.attention.embeds.size(); ++l)
    conv("attention.embed" + std::to_string(l), m.attention.embeds[l]);
  for (size_t l = 0; l < m.attention.mlp.layers.size(); ++l) {
    fn("attention.mlp" + std::to_string(l) + ".weights", m.attention.mlp.layers[l].weights);
    fn("attention.mlp" + std::to_string(l) + ".bias", m.attention.mlp.layers[l].bias);
  }
  conv("cell.residual_embed", m.cell.residual_embed);
  conv("cell.gate_g", m.cell.gate_g);
  conv("cell.gate_i", m.cell.gate_i);
  conv("cell.gate_c", m.cell.gate_c);
  conv("cell.gate_o", m.cell.gate_o);
  conv("direct_residual", m.direct_residual);
  conv("head", m.head.conv);
}

void save_model(const std::string& path, const Model& model) {
  std::map<std::string, Tensor> tensors;
  Model& m = const_cast<Model&>(model);
  for_each_param(m, [&tensors](const std::string& name, Tensor& t) { tensors[name] = t; });
  Tensor meta = Tensor::vec(5);
  meta[0] = model.config.convs_per_stage;
  meta[1] = model.config.widths[0];
  meta[2] = model.config.widths[1];
  meta[3] = model.config.widths[2];
  meta[4] = model.head.num_classes;
  tensors["meta.config"] = meta;
  save_checkpoint(path, tensors);
}

Model load_model(const std::string& path) {
  std::map<std::string, Tensor> tensors = load_checkpoint(path);
  auto it = tensors.find("meta.config");
  if (it == tensors.end()) throw DataError("checkpoint " + path + ": missing meta.config");
  const Tensor& meta = it->second;
  if (meta.size() != 5) throw DataError("checkpoint " + path + ": bad meta.config");
  ExtractorConfig config;
  config.convs_per_stage = static_cast<int>(meta[0]);
  config.widths = {static_cast<int>(meta[1]), static_cast<int>(meta[2]), static_cast<int>(meta[3])};
  Model m = make_model(config, 0);
  for_each_param(m, [&tensors, &path](const std::string& name, Tensor& t) {
    auto f = tensors.find(name);
    if (f == tensors.end()) throw DataError("checkpoint " + path + ": missing tensor " + name);
    if (!f->second.same_shape(t))
      throw DataError("checkpoint " + path + ": shape mismatch for " + name);
    t = f->second;
  });
  return m;
}

ModelVars register_model(Tape& tape, const Model& model, const TrainableSet& tr) {
  ModelVars v;
  v.extractor.stem = register_conv(tape, model.extractor.stem, tr.extractor);
  for (const auto& stage : model.extractor.stage_convs) {
    std::vector<ConvVars> cv;
    for (const ConvParams& p : stage) cv.push_back(register_conv(tape, p, tr.extractor));
    v.extractor.stage_convs.push_back(std::move(cv));
  }
  for (const ConvParams& p : model.extractor.stage_down)
    v.extractor.stage_down.push_back(register_conv(tape, p, tr.extractor));
  v.attention = register_attention(tape, model.attention, tr.attention);
  v.cell = register_cell(tape, model.cell, tr.cell);
  v.direct_residual = register_conv(tape, model.direct_residual, tr.direct_residual);
  v.head = register_conv(tape, model.head.conv, tr.head);
  return v;
}

std::vector<std::pair<Tensor*, Var>> trainable_pairs(Model& model, const ModelVars& vars,
                                                     const TrainableSet& tr) {
  std::vector<std::pair<Tensor*, Var>> out;
  auto conv = [&out](ConvParams& p, const ConvVars& v) {
    out.emplace_back(&p.kernel, v.kernel);
    out.emplace_back(&p.bias, v.bias);
  };
  if (tr.extractor) {
    conv(model.extractor.stem, vars.extractor.stem);
    for (size_t s = 0; s < model.extractor.stage_convs.size(); ++s) {
      for (size_t i = 0; i < model.extractor.stage_convs[s].size(); ++i)
        conv(model.extractor.stage_convs[s][i], vars.extractor.stage_convs[s][i]);
      conv(model.extractor.stage_down[s], vars.extractor.stage_down[s]);
    }
  }
  if (tr.attention) {
    for (size_t l = 0; l < model.attention.embeds.size(); ++l)
      conv(model.attention.embeds[l], vars.attention.embeds[l]);
    for (size_t l = 0; l < model.attention.mlp.layers.size(); ++l) {
      out.emplace_back(&model.attention.mlp.layers[l].weights, vars.attention.mlp.layers[l].weights);
      out.emplace_back(&model.attention.mlp.layers[l].bias, vars.attention.mlp.layers[l].bias);
    }
  }
  if (tr.cell) {
    conv(model.cell.residual_embed, vars.cell.residual_embed);
    conv(model.cell.gate_g, vars.cell.gate_g);
    conv(model.cell.gate_i, vars.cell.gate_i);
    conv(model.cell.gate_c, vars.cell.gate_c);
    conv(model.cell.gate_o, vars.cell.gate_o);
  }
  if (tr.direct_residual) conv(model.direct_residual, vars.direct_residual);
  if (tr.head) conv(model.head.conv, vars.head);
  return out;
}

std::vector<Var> extract_pyramid_t(Tape& tape, Var frame, const ExtractorVars& ev) {
  Var cur = tape.relu(apply_conv(tape, frame, ev.stem));
  std::vector<Var> levels;
  for (size_t s = 0; s < ev.stage_convs.size(); ++s) {
    for (const ConvVars& cv : ev.stage_convs[s]) cur = tape.relu(apply_conv(tape, cur, cv));
    cur = tape.relu(apply_conv(tape, cur, ev.stage_down[s]));
    levels.push_back(cur);
  }
  return levels;
}

Var head_map_t(Tape& tape, Var features, const ConvVars& head) {
  return apply_conv(tape, features, head);
}

PyramidFeatures extract_pyramid(const RawFrame& frame, const ExtractorParams& params,
                                const ExtractorConfig& config) {
  if (frame.h() % 16 != 0 || frame.w() % 16 != 0)
    throw ConfigError("extract_pyramid: frame dims " + frame.shape_str() +
                      " not divisible by total stride 16");
  (void)config;
  Tape tape;
  Var f = tape.leaf(frame);
  ExtractorVars ev;
  ev.stem = register_conv(tape, params.stem, false);
  for (const auto& stage : params.stage_convs) {
    std::vector<ConvVars> cv;
    for (const ConvParams& p : stage) cv.push_back(register_conv(tape, p, false));
    ev.stage_convs.push_back(std::move(cv));
  }
  for (const ConvParams& p : params.stage_down) ev.stage_down.push_back(register_conv(tape, p, false));
  std::vector<Var> levels = extract_pyramid_t(tape, f, ev);
  PyramidFeatures out;
  for (Var v : levels) out.levels.push_back(tape.value(v));
  return out;
}

CellTargets make_targets(const std::vector<TruthBox>& truth, int grid_h, int grid_w, int stride,
                         int num_classes) {
  CellTargets t;
  t.grid_h = grid_h;
  t.grid_w = grid_w;
  t.num_classes = num_classes;
  const size_t cells = static_cast<size_t>(grid_h) * grid_w;
  t.positive.assign(cells, 0);
  t.cls.assign(cells, 0);
  t.box.assign(cells, {0, 0, 0, 0});
  std::vector<double> claim_dist(cells, 1e300);
  for (const TruthBox& b : truth) {
    const double cy = (b.y1 + b.y2) / 2.0, cx = (b.x1 + b.x2) / 2.0;
    for (int iy = 0; iy < grid_h; ++iy) {
      for (int ix = 0; ix < grid_w; ++ix) {
        const double py = (iy + 0.5) * stride, px = (ix + 0.5) * stride;
        if (py < b.y1 || py >= b.y2 || px < b.x1 || px >= b.x2) continue;
        // Nearest box center wins when boxes overlap a cell.
        const double d = (py - cy) * (py - cy) + (px - cx) * (px - cx);
        const size_t idx = static_cast<size_t>(iy) * grid_w + ix;
        if (d >= claim_dist[idx]) continue;
        claim_dist[idx] = d;
        t.positive[idx] = 1;
        t.cls[idx] = b.cls;
        t.box[idx] = {cy / stride - (iy + 0.5), cx / stride - (ix + 0.5),
                      std::log((b.y2 - b.y1) / stride), std::log((b.x2 - b.x1) / stride)};
      }
    }
  }
  return t;
}

DetectionBox decode_cell(int iy, int ix, const std::array<double, 4>& box, int stride) {
  const double cy = ((iy + 0.5) + box[0]) * stride;
  const double cx = ((ix + 0.5) + box[1]) * stride;
  const double bh = stride * std::exp(std::clamp(box[2], -kBoxLogClamp, kBoxLogClamp));
  const double bw = stride * std::exp(std::clamp(box[3], -kBoxLogClamp, kBoxLogClamp));
  DetectionBox d;
  d.y1 = cy - bh / 2;
  d.x1 = cx - bw / 2;
  d.y2 = cy + bh / 2;
  d.x2 = cx + bw / 2;
  return d;
}

FrameDetections detect(const FeatureMap& features, const HeadParams& head,
                       const DetectOptions& opts) {
  FeatureMap hm = conv2d(features, head.conv);
  const int K = head.num_classes;
  FrameDetections dets;
  for (int iy = 0; iy < hm.h(); ++iy) {
    for (int ix = 0; ix < hm.w(); ++ix) {
      const double score = sigmoid1(hm.at(iy, ix, 0));
      if (score < opts.score_thresh) continue;
      int best_cls = 0;
      double best_logit = hm.at(iy, ix, 1);
      for (int k = 1; k < K; ++k)
        if (hm.at(iy, ix, 1 + k) > best_logit) {
          best_logit = hm.at(iy, ix, 1 + k);
          best_cls = k;
        }
      std::array<double, 4> box{hm.at(iy, ix, 1 + K), hm.at(iy, ix, 2 + K), hm.at(iy, ix, 3 + K),
                                hm.at(iy, ix, 4 + K)};
      DetectionBox d = decode_cell(iy, ix, box, head.stride);
      d.cls = best_cls;
      d.score = score;
      dets.push_back(d);
    }
  }
  // Greedy NMS by descending score with a total order for determinism.
  std::sort(dets.begin(), dets.end(), [](const DetectionBox& a, const DetectionBox& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y1 != b.y1) return a.y1 < b.y1;
    if (a.x1 != b.x1) return a.x1 < b.x1;
    return a.cls < b.cls;
  });
  FrameDetections kept;
  for (const DetectionBox& d : dets) {
    bool suppressed = false;
    for (const DetectionBox& k : kept) {
      if (iou(Box{d.y1, d.x1, d.y2, d.x2}, Box{k.y1, k.x1, k.y2, k.x2}) > opts.nms_iou) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

namespace {

struct GopFeatures {
  std::vector<FeatureMap> per_frame;  // c_t .. c_{t+n}
};

GopFeatures gop_features_impl(const Gop& gop, const Model& model, const AblationConfig& config) {
  validate_ablation(config);
  Tape tape;
  TrainableSet none;
  ModelVars mv = register_model(tape, model, none);
  Var frame = tape.leaf(gop.iframe);
  std::vector<Var> levels = extract_pyramid_t(tape, frame, mv.extractor);

  Var c0;
  if (config.use_attention) {
    std::vector<Var> embedded;
    for (size_t l = 0; l < levels.size(); ++l)
      embedded.push_back(embed_level_t(tape, levels[l], mv.attention.embeds[l]));
    c0 = attention_fuse_t(tape, embedded, mv.attention.mlp).fused;
  } else {
    c0 = levels.back();
  }

  const FeatureMap& top = tape.value(c0);
  const int fh = top.h(), fw = top.w();

  GopFeatures out;
  out.per_frame.push_back(top);

  StateVars state{c0, c0};
  Var prev_c = c0;
  for (const PFrameData& pf : gop.pframes) {
    MotionField field = config.use_mv
                            ? mv_to_feature_grid(pf.motions, gop.iframe.h(), gop.iframe.w(), fh, fw)
                            : MotionField::zero(fh, fw);
    ResidualGrid grid = config.use_residual
                            ? residual_to_feature_grid(pf.residual, fh, fw)
                            : Tensor::map(fh, fw, 3);
    Var residual = tape.leaf(grid);
    Var c_new;
    if (config.use_lstm) {
      state = step_t(tape, state, field, residual, mv.cell);
      c_new = state.cell;
    } else {
      Var warped = tape.warp(prev_c, field);
      Var addend = apply_conv(tape, residual, mv.direct_residual);
      c_new = tape.add(warped, addend);
      prev_c = c_new;
    }
    out.per_frame.push_back(tape.value(c_new));
  }
  return out;
}

}  // namespace

std::vector<FeatureMap> gop_memory_features(const Gop& gop, const Model& model,
                                            const AblationConfig& config) {
  return gop_features_impl(gop, model, config).per_frame;
}

GopDetections infer_gop(const Gop& gop, const Model& model, const AblationConfig& config,
                        const DetectOptions& opts) {
  GopFeatures feats = gop_features_impl(gop, model, config);
  GopDetections out;
  out.frames.reserve(feats.per_frame.size());
  for (const FeatureMap& f : feats.per_frame) out.frames.push_back(detect(f, model.head, opts));
  return out;
}

Var detection_loss_t(Tape& tape, Var head_map, const CellTargets& targets, double box_weight) {
  const Tensor& hm = tape.value(head_map);
  const int gh = hm.h(), gw = hm.w(), K = targets.num_classes;
  if (gh != targets.grid_h || gw != targets.grid_w)
    throw ConfigError("detection_loss: grid mismatch");
  if (hm.c() != head_channels(K)) throw ConfigError("detection_loss: channel mismatch");
  const int cells = gh * gw;
  int npos = 0;
  for (uint8_t p : targets.positive) npos += p;
  const double pos_norm = 1.0 / std::max(1, npos);

  double loss = 0.0;
  Tensor grad(hm.dims());
  for (int i = 0; i < cells; ++i) {
    const double* cell = hm.data() + static_cast<size_t>(i) * hm.c();
    double* g = grad.data() + static_cast<size_t>(i) * hm.c();
    const double z = cell[0];
    const double y = targets.positive[static_cast<size_t>(i)] ? 1.0 : 0.0;
    // Stable BCE with logits.
    loss += (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)))) / cells;
    g[0] = (sigmoid1(z) - y) / cells;
    if (!targets.positive[static_cast<size_t>(i)]) continue;

    // Class cross-entropy via log-softmax.
    double mx = cell[1];
    for (int k = 1; k < K; ++k) mx = std::max(mx, cell[1 + k]);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(cell[1 + k] - mx);
    const int label = targets.cls[static_cast<size_t>(i)];
    loss += (std::log(sum) + mx - cell[1 + label]) * pos_norm;
    for (int k = 0; k < K; ++k) {
      const double p = std::exp(cell[1 + k] - mx) / sum;
      g[1 + k] = (p - (k == label ? 1.0 : 0.0)) * pos_norm;
    }

    // L1 box regression.
    const std::array<double, 4>& tb = targets.box[static_cast<size_t>(i)];
    for (int d = 0; d < 4; ++d) {
      const double diff = cell[1 + K + d] - tb[static_cast<size_t>(d)];
      loss += box_weight * std::abs(diff) * pos_norm;
      g[1 + K + d] = box_weight * (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) * pos_norm;
    }
  }

  Var hm_var = head_map;
  return tape.custom(Tensor::scalar(loss), {head_map},
                     [hm_var, grad = std::move(grad)](const Tensor& out_grad, Tape& t) {
                       Tensor g = grad;
                       const double s = out_grad[0];
                       for (int64_t i = 0; i < g.size(); ++i) g[i] *= s;
                       t.accum_grad(hm_var, g);
                     });
}

namespace {

struct Sgd {
  double lr;
  double momentum;
  std::map<const Tensor*, Tensor> velocity;

  void apply(const std::vector<std::pair<Tensor*, Var>>& pairs, Tape& tape) {
    for (const auto& [param, var] : pairs) {
      Tensor g = tape.grad(var);
      if (!g.all_finite()) throw NumericError("sgd: non-finite gradient");
      Tensor& v = velocity.try_emplace(param, Tensor(param->dims())).first->second;
      for (int64_t i = 0; i < g.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        (*param)[i] += v[i];
      }
    }
  }
};

}  // namespace

Model train_phase1(const std::vector<TrainClip>& dataset, const ExtractorConfig& config,
                   const Phase1Config& cfg) {
  if (dataset.empty()) throw UsageError("train_phase1: empty dataset");
  Model model = make_model(config, cfg.seed);
  TrainableSet tr;
  tr.extractor = true;
  tr.head = true;
  Sgd sgd{cfg.lr, cfg.momentum, {}};
  Rng rng(cfg.seed ^ 0x5eedf00dull);

  const int drop_epoch = static_cast<int>(cfg.epochs * cfg.lr_drop_after);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    sgd.lr = epoch >= drop_epoch ? cfg.lr * cfg.lr_drop_factor : cfg.lr;
    // Deterministic shuffled sample of frames: clip index + frame index pairs.
    std::vector<std::pair<int, int>> samples;
    for (size_t ci = 0; ci < dataset.size(); ++ci) {
      const int frames = static_cast<int>(dataset[ci].frames.size());
      for (int k = 0; k < cfg.frames_per_clip; ++k)
        samples.emplace_back(static_cast<int>(ci), rng.uniform_int(0, frames - 1));
    }
    for (size_t i = samples.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(samples[i - 1], samples[j]);
    }

    for (const auto& [ci, fi] : samples) {
      const TrainClip& clip = dataset[static_cast<size_t>(ci)];
      Tape tape;
      ModelVars mv = register_model(tape, model, tr);
      Var frame = tape.leaf(clip.frames[static_cast<size_t>(fi)]);
      std::vector<Var> levels = extract_pyramid_t(tape, frame, mv.extractor);
      Var hm = head_map_t(tape, levels.back(), mv.head);
      const Tensor& top = tape.value(levels.back());
      CellTargets targets = make_targets(clip.truth[static_cast<size_t>(fi)], top.h(), top.w(),
                                         model.head.stride, model.head.num_classes);
      Var loss = detection_loss_t(tape, hm, targets, cfg.box_weight);
      if (!std::isfinite(tape.value(loss)[0])) throw NumericError("train_phase1: loss is not finite");
      tape.backward(loss);
      sgd.apply(trainable_pairs(model, mv, tr), tape);
    }
  }
  return model;
}

void train_phase2(Model& model, const std::vector<TrainClip>& dataset,
                  const AblationConfig& ablation, const Phase2Config& cfg) {
  if (dataset.empty()) throw UsageError("train_phase2: empty dataset");
  validate_ablation(ablation);
  TrainableSet tr;
  tr.attention = ablation.use_attention;
  tr.cell = ablation.use_lstm;
  tr.direct_residual = !ablation.use_lstm && ablation.use_residual;
  Sgd sgd{cfg.lr, cfg.momentum, {}};
  Rng rng(cfg.seed ^ 0xfeedbeefull);
  const int drop_epoch = static_cast<int>(cfg.epochs * cfg.lr_drop_after);

  // All (clip, gop) pairs, with I-frame pyramids precomputed once: the
  // extractor is frozen in this phase.
  std::vector<std::pair<int, int>> samples;
  std::vector<PyramidFeatures> pyramids;
  std::vector<int> frame_offsets;
  for (size_t ci = 0; ci < dataset.size(); ++ci) {
    int frame0 = 0;
    for (size_t gi = 0; gi < dataset[ci].gops.size(); ++gi) {
      samples.emplace_back(static_cast<int>(ci), static_cast<int>(gi));
      pyramids.push_back(
          extract_pyramid(dataset[ci].gops[gi].iframe, model.extractor, model.config));
      frame_offsets.push_back(frame0);
      frame0 += dataset[ci].gops[gi].length();
    }
  }
  if (samples.empty()) throw UsageError("train_phase2: no gops in dataset");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    sgd.lr = epoch >= drop_epoch ? cfg.lr * cfg.lr_drop_factor : cfg.lr;
    std::vector<int> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (int si : order) {
      const auto& [ci, gi] = samples[static_cast<size_t>(si)];
      const TrainClip& clip = dataset[static_cast<size_t>(ci)];
      const Gop& gop = clip.gops[static_cast<size_t>(gi)];
      const int frame0 = frame_offsets[static_cast<size_t>(si)];

      Tape tape;
      ModelVars mv = register_model(tape, model, tr);
      std::vector<Var> levels;
      for (const FeatureMap& level : pyramids[static_cast<size_t>(si)].levels)
        levels.push_back(tape.leaf(level));
      Var c0;
      if (ablation.use_attention) {
        std::vector<Var> embedded;
        for (size_t l = 0; l < levels.size(); ++l)
          embedded.push_back(embed_level_t(tape, levels[l], mv.attention.embeds[l]));
        c0 = attention_fuse_t(tape, embedded, mv.attention.mlp).fused;
      } else {
        c0 = levels.back();
      }
      const Tensor& top = tape.value(c0);
      const int fh = top.h(), fw = top.w();

      std::vector<Var> features{c0};
      StateVars state{c0, c0};
      Var prev_c = c0;
      for (const PFrameData& pf : gop.pframes) {
        MotionField field =
            ablation.use_mv ? mv_to_feature_grid(pf.motions, gop.iframe.h(), gop.iframe.w(), fh, fw)
                            : MotionField::zero(fh, fw);
        ResidualGrid grid = ablation.use_residual ? residual_to_feature_grid(pf.residual, fh, fw)
                                                  : Tensor::map(fh, fw, 3);
        Var residual = tape.leaf(grid);
        if (ablation.use_lstm) {
          state = step_t(tape, state, field, residual, mv.cell);
          features.push_back(state.cell);
        } else {
          Var warped = tape.warp(prev_c, field);
          prev_c = tape.add(warped, apply_conv(tape, residual, mv.direct_residual));
          features.push_back(prev_c);
        }
      }

      // Loss summed over every frame of the GOP.
      Var total;
      for (size_t k = 0; k < features.size(); ++k) {
        Var hm = head_map_t(tape, features[k], mv.head);
        CellTargets targets =
            make_targets(clip.truth[static_cast<size_t>(frame0) + k], fh, fw, model.head.stride,
                         model.head.num_classes);
        Var loss = detection_loss_t(tape, hm, targets, cfg.box_weight);
        total = k == 0 ? loss : tape.add(total, loss);
      }
      if (!std::isfinite(tape.value(total)[0]))
        throw NumericError("train_phase2: loss is not finite");
      tape.backward(total);
      sgd.apply(trainable_pairs(model, mv, tr), tape);
    }
  }
}

}  // namespace mmnet
