#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xugt/tensor.hpp"

namespace xugt {

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

struct BoxTrack {
  std::vector<Box> boxes;  // one per source frame

  int64_t count() const { return static_cast<int64_t>(boxes.size()); }
};

struct Frame {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> rgb;  // interleaved RGB8, row-major

  uint8_t at(int64_t y, int64_t x, int64_t channel) const {
    return rgb[static_cast<size_t>((y * width + x) * 3 + channel)];
  }
};

struct ClipSource {
  std::vector<Frame> frames;

  int64_t count() const { return static_cast<int64_t>(frames.size()); }
};

struct Keypoint {
  double x = 0, y = 0, confidence = 0;
};

// index_i = floor((i + 0.5) * total / target), clamped; non-decreasing, with
// duplicates when total < target.
std::vector<int64_t> uniform_sample(int64_t total_frames, int64_t target = 16);

// Scales the box about its center by (1 + pad_ratio) per side.
Box expand_box(const Box& b, double pad_ratio);
// Clamps to [0, frame_width] x [0, frame_height].
Box clamp_box(const Box& b, int64_t frame_width, int64_t frame_height);

// Per-coordinate centered moving average with edge replication over an odd
// window, then clamped to frame bounds.
BoxTrack smooth_boxes(const BoxTrack& track, int64_t window, int64_t frame_width,
                      int64_t frame_height);

// Tight box over keypoints whose confidence reaches min_confidence.
Box box_from_keypoints(std::span<const Keypoint> keypoints, double min_confidence = 0.05);

struct CropConfig {
  double pad_ratio = 0.2;
  int64_t out_size = 224;
  bool square = false;  // grow the shorter side before cropping instead of warping
  std::array<double, 3> mean{0.45, 0.45, 0.45};
  std::array<double, 3> stdev{0.225, 0.225, 0.225};
};

// Crops each referenced frame at its (expanded, clamped) box, bilinearly
// resizes to out_size squared, scales to [0,1], and normalizes per channel.
// boxes must carry one box per source frame.  Output shape is
// (1, 3, len(frame_indices), out_size, out_size).
Tensor5 crop_resize(const ClipSource& clip, std::span<const int64_t> frame_indices,
                    const BoxTrack& boxes, const CropConfig& cfg);

struct PreprocessConfig {
  int64_t target_frames = 16;
  int64_t smooth_window = 5;
  CropConfig crop;
};

// Full pipeline: uniform frame sampling, box smoothing, padded crop, resize,
// normalize.  boxes may be null for full-frame crops.
Tensor5 preprocess_clip(const ClipSource& clip, const BoxTrack* boxes,
                        const PreprocessConfig& cfg = {});

// Directory of numbered binary PPM (P6) frames, sorted by numeric suffix.
ClipSource load_ppm_dir(const std::filesystem::path& dir);
// Raw planar RGB bytes ([frame][channel][y][x]) described by a JSON sidecar
// at <path>.json holding {"frames": N, "height": H, "width": W}.
ClipSource load_raw_clip(const std::filesystem::path& path);
// JSON array of per-frame [x0, y0, x1, y1].
BoxTrack load_boxes_json(const std::filesystem::path& path);

void save_ppm(const Frame& frame, const std::filesystem::path& path);

}  // namespace xugt
