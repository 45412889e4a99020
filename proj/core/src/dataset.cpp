#include "mmnet/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmnet/sidecar.hpp"
#include "mmnet/threading.hpp"

namespace fs = std::filesystem;

namespace mmnet {

void save_truth(const std::string& path, const SyntheticSceneTruth& truth) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for write: " + path);
  char buf[160];
  for (int f = 0; f < truth.frames; ++f) {
    for (const TruthBox& b : truth.boxes[static_cast<size_t>(f)]) {
      std::snprintf(buf, sizeof(buf), "%d %d %.4f %.4f %.4f %.4f\n", b.frame, b.cls, b.y1, b.x1,
                    b.y2, b.x2);
      os << buf;
    }
  }
  if (!os) throw DataError("write failed: " + path);
}

std::vector<std::vector<TruthBox>> load_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  std::vector<std::vector<TruthBox>> boxes;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TruthBox b;
    if (!(ss >> b.frame >> b.cls >> b.y1 >> b.x1 >> b.y2 >> b.x2))
      throw DataError("truth " + path + ": malformed line " + std::to_string(lineno));
    if (b.frame < 0 || b.y2 <= b.y1 || b.x2 <= b.x1)
      throw DataError("truth " + path + ": invalid box on line " + std::to_string(lineno));
    if (static_cast<size_t>(b.frame) >= boxes.size()) boxes.resize(static_cast<size_t>(b.frame) + 1);
    boxes[static_cast<size_t>(b.frame)].push_back(b);
  }
  return boxes;
}

std::vector<std::string> list_clips(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".mmgp") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<TrainClip> load_dataset(const std::string& dir) {
  const std::vector<std::string> names = list_clips(dir);
  if (names.empty()) throw UsageError("dataset " + dir + ": no .mmgp clips found");
  std::vector<TrainClip> clips(names.size());
  parallel_for(static_cast<int>(names.size()), [&](int i) {
    const fs::path base = fs::path(dir) / names[static_cast<size_t>(i)];
    TrainClip clip;
    clip.gops = load_gops(base.string() + ".mmgp");
    clip.truth = load_truth(base.string() + ".truth.txt");
    for (const Gop& gop : clip.gops) {
      std::vector<RawFrame> frames = decode_reconstruct(gop);
      for (auto& f : frames) clip.frames.push_back(std::move(f));
    }
    if (clip.truth.size() < clip.frames.size())
      throw DataError("dataset clip " + names[static_cast<size_t>(i)] + ": truth covers " +
                      std::to_string(clip.truth.size()) + " frames, clip has " +
                      std::to_string(clip.frames.size()));
    clips[static_cast<size_t>(i)] = std::move(clip);
  });
  return clips;
}

void save_detections_file(const std::string& path, const std::vector<GopDetections>& per_gop) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for write: " + path);
  char buf[200];
  int frame = 0;
  for (const GopDetections& gd : per_gop) {
    for (const FrameDetections& fd : gd.frames) {
      for (const DetectionBox& d : fd) {
        std::snprintf(buf, sizeof(buf), "%d %d %.6f %.4f %.4f %.4f %.4f\n", frame, d.cls, d.score,
                      d.y1, d.x1, d.y2, d.x2);
        os << buf;
      }
      ++frame;
    }
  }
  if (!os) throw DataError("write failed: " + path);
}

void save_detections(const std::string& path, const GopDetections& dets, int frame_offset) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for write: " + path);
  char buf[200];
  int frame = frame_offset;
  for (const FrameDetections& fd : dets.frames) {
    for (const DetectionBox& d : fd) {
      std::snprintf(buf, sizeof(buf), "%d %d %.6f %.4f %.4f %.4f %.4f\n", frame, d.cls, d.score,
                    d.y1, d.x1, d.y2, d.x2);
      os << buf;
    }
    ++frame;
  }
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace mmnet
