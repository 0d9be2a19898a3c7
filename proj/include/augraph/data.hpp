#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "augraph/encoder.hpp"

namespace augraph {

constexpr int64_t kClipLength = 16;

struct VideoRecord {
  std::string video_id;
  std::vector<std::string> frame_paths;   // sorted by numeric filename
  std::vector<int64_t> frame_numbers;     // parsed stems, same order
  std::vector<std::vector<int>> labels;   // per frame, length N; {0,1,-1}
  bool labeled = false;
  bool has_unannotated = false;  // any -1 among labels

  int64_t num_frames() const { return static_cast<int64_t>(frame_paths.size()); }
};

struct DataSet {
  std::string root;
  std::vector<VideoRecord> videos;
  std::vector<std::string> au_names;  // from labels.csv headers; empty if none labeled

  int num_aus() const { return static_cast<int>(au_names.size()); }
};

struct ClipSpec {
  int video_index = -1;
  std::string video_id;
  int64_t start_index = 0;
  int64_t length = kClipLength;
  int64_t pad_count = 0;

  int64_t real_frames() const { return length - pad_count; }
};

struct LoadedClip {
  FrameSequence frames;
  std::vector<int> labels;  // [length * N], -1 on padded frames
  ClipSpec spec;
};

DataSet scan_dataset(const std::string& root);

// Uniform random start over the valid windows of one video; videos shorter
// than the clip length produce a fully loaded prefix plus blank padding.
ClipSpec sample_clip_spec(const VideoRecord& record, int video_index,
                          std::mt19937_64& rng);

// Consecutive non-overlapping windows covering every frame exactly once;
// the final partial window is padded.
std::vector<ClipSpec> segment_plan(int64_t num_frames, int video_index,
                                   const std::string& video_id);
std::vector<ClipSpec> segment_for_eval(const VideoRecord& record,
                                       int video_index);

// Decodes the clip's frames into [0,1] doubles and pads the tail with
// all-zero frames (valid_mask false, labels -1).
LoadedClip load_clip(const VideoRecord& record, const ClipSpec& spec,
                     const EncoderConfig& cfg, int num_aus);

// One frame as a single-image sequence (pretraining input).
FrameSequence load_single_frame(const VideoRecord& record, int64_t frame_idx,
                                const EncoderConfig& cfg);

struct SyntheticConfig {
  int num_videos = 4;
  int frames_per_video = 16;
  int num_aus = 12;
  int image_size = 64;
  uint64_t seed = 0;
};

// Writes a labeled dataset in the on-disk layout scan_dataset reads. Each AU
// is keyed to one cell of a 4x4 grid: the cell is bright on positive frames
// and dark on negative ones, so the label equals "mean cell intensity > 0.5"
// and is learnable from pixels. AU states follow a sticky Markov chain over
// frames; per video, labels are resampled until every AU has at least one
// positive and one negative frame. Deterministic per seed.
void generate_synthetic(const std::string& root, const SyntheticConfig& cfg);

}  // namespace augraph
