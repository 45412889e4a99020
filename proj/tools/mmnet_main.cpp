#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mmnet/dataset.hpp"
#include "mmnet/detector.hpp"
#include "mmnet/eval.hpp"
#include "mmnet/image_io.hpp"
#include "mmnet/sidecar.hpp"
#include "mmnet/synth.hpp"
#include "mmnet/viz.hpp"

namespace fs = std::filesystem;
using namespace mmnet;

namespace {

// Reference speed bands cycled per clip when no explicit range is given, so
// a default dataset populates every motion-speed bucket.
constexpr double kSpeedBands[3][2] = {{0.0, 0.1}, {0.7, 1.1}, {3.0, 7.0}};

std::string clip_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip%03d", i);
  return buf;
}

AblationConfig config_from_flags(const std::string& named, bool no_mv, bool no_residual,
                                 bool no_lstm, bool no_attention) {
  AblationConfig c = named.empty() ? ablation_config('f') : ablation_config(named[0]);
  if (no_mv) c.use_mv = false;
  if (no_residual) c.use_residual = false;
  if (no_lstm) c.use_lstm = false;
  if (no_attention) c.use_attention = false;
  validate_ablation(c);
  return c;
}

void print_report(const EvalReport& r) {
  std::printf("%-8s %8s %8s %8s %8s %9s %9s %7s\n", "config", "mAP", "fast", "medium", "slow",
              "fps_full", "fps_prop", "ratio");
  std::printf("%-8s %8.4f %8.4f %8.4f %8.4f %9.3f %9.3f %7.3f\n", r.config.c_str(), r.map,
              r.map_fast, r.map_medium, r.map_slow, r.fps_full, r.fps_prop, r.ratio);
  std::printf("mean IoU: overall %.4f fast %.4f medium %.4f slow %.4f\n", r.mean_iou,
              r.mean_iou_fast, r.mean_iou_medium, r.mean_iou_slow);
  for (size_t c = 0; c < r.per_class_ap.size(); ++c) {
    if (r.per_class_ap[c] >= 0.0)
      std::printf("class %zu AP: %.4f\n", c, r.per_class_ap[c]);
    else
      std::printf("class %zu AP: n/a (no truths)\n", c);
  }
}

void write_csv(const std::string& path, const std::vector<EvalReport>& reports) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for write: " + path);
  os << eval_csv_header() << "\n";
  for (const EvalReport& r : reports) os << eval_csv_row(r) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"MMNet-style compressed-domain detection pipeline"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "Generate synthetic clips as PPM frames plus truth files");
  std::string gen_out;
  uint64_t gen_seed = 7;
  int gen_clips = 8, gen_frames = 24, gen_height = 112, gen_width = 112, gen_objects = 2;
  double gen_speed_min = -1.0, gen_speed_max = -1.0, gen_noise = 0.08;
  double gen_size_min = 28.0, gen_size_max = 42.0;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Base RNG seed")->capture_default_str();
  gen->add_option("--clips", gen_clips, "Clip count")->capture_default_str();
  gen->add_option("--frames", gen_frames, "Frames per clip")->capture_default_str();
  gen->add_option("--height", gen_height, "Frame height (pixels)")->capture_default_str();
  gen->add_option("--width", gen_width, "Frame width (pixels)")->capture_default_str();
  gen->add_option("--objects", gen_objects, "Objects per clip")->capture_default_str();
  gen->add_option("--speed-min", gen_speed_min,
                  "Min speed in px/frame; negative = cycle slow/medium/fast bands")
      ->capture_default_str();
  gen->add_option("--speed-max", gen_speed_max,
                  "Max speed in px/frame; negative = cycle slow/medium/fast bands")
      ->capture_default_str();
  gen->add_option("--size-min", gen_size_min, "Min object side (pixels)")->capture_default_str();
  gen->add_option("--size-max", gen_size_max, "Max object side (pixels)")->capture_default_str();
  gen->add_option("--noise", gen_noise, "Texture noise amplitude")->capture_default_str();

  // ---- encode ----
  auto* enc = app.add_subcommand("encode", "Block-match encode PPM frames into .mmgp sidecars");
  std::string enc_input, enc_out;
  int enc_gop = 12, enc_range = 8;
  bool enc_quantize = false;
  enc->add_option("dir", enc_input, "Directory of PPM frames, or of clip subdirectories");
  enc->add_option("--input", enc_input, "Same as the positional directory argument");
  enc->add_option("--out", enc_out, "Output .mmgp file (single clip) or directory");
  enc->add_option("--gop", enc_gop, "GOP length")->capture_default_str();
  enc->add_option("--range", enc_range, "Motion search range (pixels)")->capture_default_str();
  enc->add_flag("--quantize", enc_quantize, "Quantize residuals to 1/255 steps");

  // ---- train ----
  auto* tr = app.add_subcommand("train", "Two-phase training on an encoded dataset");
  std::string tr_data, tr_out, tr_config = "f";
  uint64_t tr_seed = 7;
  int tr_epochs1 = 30, tr_epochs2 = 24, tr_frames_per_clip = 8;
  double tr_lr1 = 3e-3, tr_lr2 = 5e-4, tr_momentum = 0.9, tr_box_weight = 2.0;
  tr->add_option("--data", tr_data, "Dataset directory (.mmgp + .truth.txt)")->required();
  tr->add_option("--out", tr_out, "Output checkpoint path")->required();
  tr->add_option("--seed", tr_seed, "RNG seed")->capture_default_str();
  tr->add_option("--epochs1", tr_epochs1, "Phase-1 epochs")->capture_default_str();
  tr->add_option("--epochs2", tr_epochs2, "Phase-2 epochs (0 = skip)")->capture_default_str();
  tr->add_option("--lr1", tr_lr1, "Phase-1 learning rate")->capture_default_str();
  tr->add_option("--lr2", tr_lr2, "Phase-2 learning rate")->capture_default_str();
  tr->add_option("--momentum", tr_momentum, "SGD momentum")->capture_default_str();
  tr->add_option("--box-weight", tr_box_weight, "L1 box loss weight")->capture_default_str();
  tr->add_option("--frames-per-clip", tr_frames_per_clip, "Phase-1 frames sampled per clip per epoch")
      ->capture_default_str();
  tr->add_option("--config", tr_config, "Phase-2 mechanism config (a-f)")->capture_default_str();

  // ---- infer ----
  auto* inf = app.add_subcommand("infer", "Run GOP inference on one .mmgp clip");
  std::string inf_clip, inf_ckpt, inf_out;
  bool inf_no_mv = false, inf_no_residual = false, inf_no_lstm = false, inf_no_attention = false;
  double inf_score = 0.3, inf_nms = 0.5;
  inf->add_option("clip", inf_clip, "Input .mmgp clip")->required();
  inf->add_option("--ckpt", inf_ckpt, "Model checkpoint")->required();
  inf->add_option("--out", inf_out, "Output detections text file")->required();
  inf->add_flag("--no-mv", inf_no_mv, "Disable motion-vector warping");
  inf->add_flag("--no-residual", inf_no_residual, "Disable residual input");
  inf->add_flag("--no-lstm", inf_no_lstm, "Replace the memory cell with warp+residual add");
  inf->add_flag("--no-attention", inf_no_attention, "Propagate top-level features only");
  inf->add_option("--score", inf_score, "Score threshold")->capture_default_str();
  inf->add_option("--nms", inf_nms, "NMS IoU threshold")->capture_default_str();

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ev_data, ev_ckpt, ev_out, ev_config = "f";
  int ev_reps = 0;
  double ev_score = 0.3, ev_nms = 0.5;
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--ckpt", ev_ckpt, "Model checkpoint")->required();
  ev->add_option("--out", ev_out, "Write the report as CSV");
  ev->add_option("--config", ev_config, "Mechanism config (a-f)")->capture_default_str();
  ev->add_option("--reps", ev_reps, "Timing repetitions (0 = skip timing)")->capture_default_str();
  ev->add_option("--score", ev_score, "Score threshold")->capture_default_str();
  ev->add_option("--nms", ev_nms, "NMS IoU threshold")->capture_default_str();

  // ---- bench ----
  auto* be = app.add_subcommand("bench", "Throughput of full extraction vs propagation");
  std::string be_data, be_ckpt, be_out, be_config = "f";
  int be_reps = 5;
  be->add_option("--data", be_data, "Dataset directory")->required();
  be->add_option("--ckpt", be_ckpt, "Model checkpoint")->required();
  be->add_option("--reps", be_reps, "Timing repetitions (0 = skip timing)")->capture_default_str();
  be->add_option("--config", be_config, "Mechanism config (a-f)")->capture_default_str();
  be->add_option("--out", be_out, "Write the result as CSV");

  // ---- ablate ----
  auto* ab = app.add_subcommand("ablate", "Phase-2 train and evaluate mechanism configs");
  std::string ab_data, ab_eval_data, ab_ckpt, ab_out, ab_configs = "a,b,c,d,e,f";
  uint64_t ab_seed = 7;
  int ab_epochs = 16, ab_reps = 0;
  double ab_lr = 5e-4;
  ab->add_option("--data", ab_data, "Training dataset directory")->required();
  ab->add_option("--eval-data", ab_eval_data, "Evaluation dataset directory")->required();
  ab->add_option("--ckpt", ab_ckpt, "Phase-1 base checkpoint")->required();
  ab->add_option("--out", ab_out, "Output CSV path")->required();
  ab->add_option("--configs", ab_configs, "Comma-separated config letters")->capture_default_str();
  ab->add_option("--epochs", ab_epochs, "Phase-2 epochs per config")->capture_default_str();
  ab->add_option("--lr", ab_lr, "Phase-2 learning rate")->capture_default_str();
  ab->add_option("--seed", ab_seed, "RNG seed")->capture_default_str();
  ab->add_option("--reps", ab_reps, "Timing repetitions (0 = skip timing)")->capture_default_str();

  // ---- viz-motion ----
  auto* vm = app.add_subcommand("viz-motion", "Render a P-frame motion field as a color wheel");
  std::string vm_clip, vm_out;
  int vm_gop = 0, vm_frame = 0;
  vm->add_option("clip", vm_clip, "Input .mmgp clip")->required();
  vm->add_option("--out", vm_out, "Output PPM path")->required();
  vm->add_option("--gop", vm_gop, "GOP index")->capture_default_str();
  vm->add_option("--frame", vm_frame, "P-frame index within the GOP")->capture_default_str();

  // ---- viz-memory ----
  auto* vz = app.add_subcommand("viz-memory", "Dump per-frame memory heatmaps for one GOP");
  std::string vz_clip, vz_ckpt, vz_dir;
  int vz_gop = 0;
  bool vz_no_mv = false, vz_no_residual = false, vz_no_lstm = false, vz_no_attention = false;
  vz->add_option("clip", vz_clip, "Input .mmgp clip")->required();
  vz->add_option("--ckpt", vz_ckpt, "Model checkpoint")->required();
  vz->add_option("--out-dir", vz_dir, "Output directory for PGM heatmaps")->required();
  vz->add_option("--gop", vz_gop, "GOP index")->capture_default_str();
  vz->add_flag("--no-mv", vz_no_mv, "Disable motion-vector warping (mis-aligned memory)");
  vz->add_flag("--no-residual", vz_no_residual, "Disable residual input");
  vz->add_flag("--no-lstm", vz_no_lstm, "Replace the memory cell with warp+residual add");
  vz->add_flag("--no-attention", vz_no_attention, "Propagate top-level features only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // any flag/usage problem maps to exit code 1
  }

  if (gen->parsed()) {
    std::printf("gen: out=%s seed=%llu clips=%d frames=%d dims=%dx%d objects=%d speed=[%g,%g] "
                "size=[%g,%g] noise=%g\n",
                gen_out.c_str(), static_cast<unsigned long long>(gen_seed), gen_clips, gen_frames,
                gen_height, gen_width, gen_objects, gen_speed_min, gen_speed_max, gen_size_min,
                gen_size_max, gen_noise);
    fs::create_directories(gen_out);
    for (int c = 0; c < gen_clips; ++c) {
      SceneConfig cfg;
      cfg.height = gen_height;
      cfg.width = gen_width;
      cfg.frames = gen_frames;
      cfg.objects = gen_objects;
      if (gen_speed_min >= 0.0 && gen_speed_max >= 0.0) {
        cfg.speed_min = gen_speed_min;
        cfg.speed_max = gen_speed_max;
      } else {
        cfg.speed_min = kSpeedBands[c % 3][0];
        cfg.speed_max = kSpeedBands[c % 3][1];
      }
      cfg.size_min = gen_size_min;
      cfg.size_max = gen_size_max;
      cfg.noise_amp = gen_noise;
      auto [frames, truth] = generate_synthetic_video(cfg, gen_seed + static_cast<uint64_t>(c));
      const fs::path clip_dir = fs::path(gen_out) / clip_name(c);
      fs::create_directories(clip_dir);
      char buf[32];
      for (size_t f = 0; f < frames.size(); ++f) {
        std::snprintf(buf, sizeof(buf), "frame_%04zu.ppm", f);
        write_ppm((clip_dir / buf).string(), frames[f]);
      }
      save_truth((fs::path(gen_out) / (clip_name(c) + ".truth.txt")).string(), truth);
    }
    return 0;
  }

  if (enc->parsed()) {
    if (enc_input.empty()) throw UsageError("encode: missing input directory");
    std::printf("encode: input=%s out=%s gop=%d range=%d quantize=%d\n", enc_input.c_str(),
                enc_out.c_str(), enc_gop, enc_range, enc_quantize ? 1 : 0);
    auto encode_dir = [&](const fs::path& dir, const fs::path& out_file) {
      std::vector<std::string> ppms;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".ppm") ppms.push_back(e.path().string());
      if (ppms.empty()) throw DataError("encode: no .ppm frames in " + dir.string());
      std::sort(ppms.begin(), ppms.end());
      std::vector<RawFrame> frames;
      frames.reserve(ppms.size());
      for (const std::string& p : ppms) frames.push_back(read_ppm(p));
      EncodeOptions opt;
      opt.gop_len = enc_gop;
      opt.search_range = enc_range;
      opt.quantize_residual = enc_quantize;
      save_gops(out_file.string(), block_match_encode(frames, opt));
      std::printf("encoded %zu frames -> %s\n", frames.size(), out_file.string().c_str());
    };

    const fs::path input(enc_input);
    if (!fs::is_directory(input)) throw DataError("encode: not a directory: " + enc_input);
    bool has_ppm = false;
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.path().extension() == ".ppm") has_ppm = true;
      if (e.is_directory()) subdirs.push_back(e.path());
    }
    if (has_ppm) {
      const fs::path out = enc_out.empty() ? input / "clip.mmgp" : fs::path(enc_out);
      encode_dir(input, out);
    } else {
      if (subdirs.empty()) throw DataError("encode: no frames or clip subdirectories in " + enc_input);
      std::sort(subdirs.begin(), subdirs.end());
      const fs::path out_dir = enc_out.empty() ? input : fs::path(enc_out);
      fs::create_directories(out_dir);
      for (const fs::path& d : subdirs) encode_dir(d, out_dir / (d.filename().string() + ".mmgp"));
    }
    return 0;
  }

  if (tr->parsed()) {
    std::printf("train: data=%s out=%s seed=%llu epochs1=%d epochs2=%d lr1=%g lr2=%g momentum=%g "
                "box_weight=%g frames_per_clip=%d config=%s\n",
                tr_data.c_str(), tr_out.c_str(), static_cast<unsigned long long>(tr_seed),
                tr_epochs1, tr_epochs2, tr_lr1, tr_lr2, tr_momentum, tr_box_weight,
                tr_frames_per_clip, tr_config.c_str());
    auto dataset = load_dataset(tr_data);
    Phase1Config p1;
    p1.epochs = tr_epochs1;
    p1.lr = tr_lr1;
    p1.momentum = tr_momentum;
    p1.box_weight = tr_box_weight;
    p1.frames_per_clip = tr_frames_per_clip;
    p1.seed = tr_seed;
    Model model = train_phase1(dataset, {}, p1);
    if (tr_epochs2 > 0) {
      Phase2Config p2;
      p2.epochs = tr_epochs2;
      p2.lr = tr_lr2;
      p2.momentum = tr_momentum;
      p2.box_weight = tr_box_weight;
      p2.seed = tr_seed;
      train_phase2(model, dataset, config_from_flags(tr_config, false, false, false, false), p2);
    }
    save_model(tr_out, model);
    std::printf("saved %s\n", tr_out.c_str());
    return 0;
  }

  if (inf->parsed()) {
    std::printf("infer: clip=%s ckpt=%s out=%s no_mv=%d no_residual=%d no_lstm=%d no_attention=%d "
                "score=%g nms=%g\n",
                inf_clip.c_str(), inf_ckpt.c_str(), inf_out.c_str(), inf_no_mv ? 1 : 0,
                inf_no_residual ? 1 : 0, inf_no_lstm ? 1 : 0, inf_no_attention ? 1 : 0, inf_score,
                inf_nms);
    Model model = load_model(inf_ckpt);
    AblationConfig cfg = config_from_flags("f", inf_no_mv, inf_no_residual, inf_no_lstm,
                                           inf_no_attention);
    auto gops = load_gops(inf_clip);
    std::vector<GopDetections> dets;
    dets.reserve(gops.size());
    for (const Gop& gop : gops) dets.push_back(infer_gop(gop, model, cfg, {inf_score, inf_nms}));
    save_detections_file(inf_out, dets);
    std::printf("wrote %s\n", inf_out.c_str());
    return 0;
  }

  if (ev->parsed()) {
    std::printf("eval: data=%s ckpt=%s out=%s config=%s reps=%d score=%g nms=%g\n", ev_data.c_str(),
                ev_ckpt.c_str(), ev_out.c_str(), ev_config.c_str(), ev_reps, ev_score, ev_nms);
    Model model = load_model(ev_ckpt);
    auto dataset = load_dataset(ev_data);
    AblationConfig cfg = config_from_flags(ev_config, false, false, false, false);
    EvalReport r = evaluate(model, dataset, cfg, {ev_score, ev_nms});
    if (ev_reps > 0) {
      ThroughputResult t = bench_throughput(model, dataset, ev_reps, cfg);
      r.fps_full = t.fps_full;
      r.fps_prop = t.fps_prop;
      r.ratio = t.ratio;
    }
    print_report(r);
    if (!ev_out.empty()) write_csv(ev_out, {r});
    return 0;
  }

  if (be->parsed()) {
    std::printf("bench: data=%s ckpt=%s reps=%d config=%s out=%s\n", be_data.c_str(),
                be_ckpt.c_str(), be_reps, be_config.c_str(), be_out.c_str());
    Model model = load_model(be_ckpt);
    auto dataset = load_dataset(be_data);
    AblationConfig cfg = config_from_flags(be_config, false, false, false, false);
    EvalReport r;
    r.config = ablation_name(cfg);
    if (be_reps > 0) {
      ThroughputResult t = bench_throughput(model, dataset, be_reps, cfg);
      r.fps_full = t.fps_full;
      r.fps_prop = t.fps_prop;
      r.ratio = t.ratio;
      std::printf("frames=%d fps_full=%.3f fps_prop=%.3f ratio=%.3f\n", t.frames, t.fps_full,
                  t.fps_prop, t.ratio);
    } else {
      std::printf("timing skipped (reps=0)\n");
    }
    if (!be_out.empty()) write_csv(be_out, {r});
    return 0;
  }

  if (ab->parsed()) {
    std::printf("ablate: data=%s eval_data=%s ckpt=%s out=%s configs=%s epochs=%d lr=%g seed=%llu "
                "reps=%d\n",
                ab_data.c_str(), ab_eval_data.c_str(), ab_ckpt.c_str(), ab_out.c_str(),
                ab_configs.c_str(), ab_epochs, ab_lr, static_cast<unsigned long long>(ab_seed),
                ab_reps);
    Model base = load_model(ab_ckpt);
    auto train_ds = load_dataset(ab_data);
    auto eval_ds = load_dataset(ab_eval_data);
    std::vector<AblationConfig> configs;
    for (size_t i = 0; i < ab_configs.size(); ++i) {
      if (ab_configs[i] == ',') continue;
      configs.push_back(ablation_config(ab_configs[i]));
    }
    if (configs.empty()) throw UsageError("ablate: no configs given");
    Phase2Config p2;
    p2.epochs = ab_epochs;
    p2.lr = ab_lr;
    p2.seed = ab_seed;
    auto reports = run_ablation(base, train_ds, eval_ds, configs, p2, {}, ab_reps);
    std::printf("%s\n", eval_csv_header().c_str());
    for (const EvalReport& r : reports) std::printf("%s\n", eval_csv_row(r).c_str());
    write_csv(ab_out, reports);
    return 0;
  }

  if (vm->parsed()) {
    std::printf("viz-motion: clip=%s out=%s gop=%d frame=%d\n", vm_clip.c_str(), vm_out.c_str(),
                vm_gop, vm_frame);
    auto gops = load_gops(vm_clip);
    if (vm_gop < 0 || static_cast<size_t>(vm_gop) >= gops.size())
      throw UsageError("viz-motion: gop index out of range");
    const Gop& gop = gops[static_cast<size_t>(vm_gop)];
    if (vm_frame < 0 || static_cast<size_t>(vm_frame) >= gop.pframes.size())
      throw UsageError("viz-motion: frame index out of range (P-frames only)");
    const PFrameData& pf = gop.pframes[static_cast<size_t>(vm_frame)];
    const int fh = gop.iframe.h() / 16, fw = gop.iframe.w() / 16;
    MotionField field = mv_to_feature_grid(pf.motions, gop.iframe.h(), gop.iframe.w(), fh, fw);
    write_ppm(vm_out, viz_motion_field(field));
    std::printf("wrote %s\n", vm_out.c_str());
    return 0;
  }

  if (vz->parsed()) {
    std::printf("viz-memory: clip=%s ckpt=%s out_dir=%s gop=%d no_mv=%d no_residual=%d no_lstm=%d "
                "no_attention=%d\n",
                vz_clip.c_str(), vz_ckpt.c_str(), vz_dir.c_str(), vz_gop, vz_no_mv ? 1 : 0,
                vz_no_residual ? 1 : 0, vz_no_lstm ? 1 : 0, vz_no_attention ? 1 : 0);
    Model model = load_model(vz_ckpt);
    auto gops = load_gops(vz_clip);
    if (vz_gop < 0 || static_cast<size_t>(vz_gop) >= gops.size())
      throw UsageError("viz-memory: gop index out of range");
    const Gop& gop = gops[static_cast<size_t>(vz_gop)];
    AblationConfig cfg = config_from_flags("f", vz_no_mv, vz_no_residual, vz_no_lstm,
                                           vz_no_attention);
    auto features = gop_memory_features(gop, model, cfg);
    fs::create_directories(vz_dir);
    char buf[48];
    for (size_t k = 0; k < features.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "memory_%04zu.pgm", k);
      write_pgm((fs::path(vz_dir) / buf).string(),
                viz_memory(features[k], gop.iframe.h(), gop.iframe.w()));
    }
    std::printf("wrote %zu heatmaps to %s\n", features.size(), vz_dir.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
