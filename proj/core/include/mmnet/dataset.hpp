#pragma once

#include <string>
#include <vector>

#include "mmnet/detector.hpp"
#include "mmnet/synth.hpp"

namespace mmnet {

// Truth files are line-oriented text: "frame_idx class y1 x1 y2 x2", grouped
// by ascending frame with a stable per-frame object order, so the index
// within a frame identifies the object instance.
void save_truth(const std::string& path, const SyntheticSceneTruth& truth);
std::vector<std::vector<TruthBox>> load_truth(const std::string& path);

// Dataset directory: clip NNN stored as <name>.mmgp plus <name>.truth.txt.
// Clips are decoded on load.
std::vector<TrainClip> load_dataset(const std::string& dir);

// Clip names found in a dataset directory, sorted.
std::vector<std::string> list_clips(const std::string& dir);

// Detection text files: "frame_idx class score y1 x1 y2 x2".
void save_detections(const std::string& path, const GopDetections& dets, int frame_offset);
void save_detections_file(const std::string& path, const std::vector<GopDetections>& per_gop);

}  // namespace mmnet
