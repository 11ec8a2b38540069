#include "xugt/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xugt/errors.hpp"

namespace xugt {

std::vector<int64_t> uniform_sample(int64_t total_frames, int64_t target) {
  if (target < 1) throw ConfigError("uniform_sample target must be >= 1, got " +
                                    std::to_string(target));
  if (total_frames < 1) {
    throw ShapeError("uniform_sample needs at least one frame, got " +
                     std::to_string(total_frames));
  }
  std::vector<int64_t> indices(static_cast<size_t>(target));
  for (int64_t i = 0; i < target; ++i) {
    // floor((i + 0.5) * total / target) in integer arithmetic
    int64_t idx = (2 * i + 1) * total_frames / (2 * target);
    indices[static_cast<size_t>(i)] = std::clamp<int64_t>(idx, 0, total_frames - 1);
  }
  return indices;
}

Box expand_box(const Box& b, double pad_ratio) {
  if (pad_ratio < 0.0) {
    throw ConfigError("pad_ratio must be >= 0, got " + std::to_string(pad_ratio));
  }
  const double cx = (b.x0 + b.x1) * 0.5;
  const double cy = (b.y0 + b.y1) * 0.5;
  const double hw = b.width() * 0.5 * (1.0 + pad_ratio);
  const double hh = b.height() * 0.5 * (1.0 + pad_ratio);
  return Box{cx - hw, cy - hh, cx + hw, cy + hh};
}

Box clamp_box(const Box& b, int64_t frame_width, int64_t frame_height) {
  const double w = static_cast<double>(frame_width);
  const double h = static_cast<double>(frame_height);
  return Box{std::clamp(b.x0, 0.0, w), std::clamp(b.y0, 0.0, h), std::clamp(b.x1, 0.0, w),
             std::clamp(b.y1, 0.0, h)};
}

BoxTrack smooth_boxes(const BoxTrack& track, int64_t window, int64_t frame_width,
                      int64_t frame_height) {
  if (window < 1 || window % 2 == 0) {
    throw ConfigError("smoothing window must be odd and >= 1, got " + std::to_string(window));
  }
  const int64_t n = track.count();
  if (n == 0) return track;
  BoxTrack out;
  out.boxes.resize(static_cast<size_t>(n));
  const int64_t r = window / 2;
  auto averaged = [&](auto pick, int64_t i) {
    double sum = 0.0;
    for (int64_t d = -r; d <= r; ++d) {
      const int64_t j = std::clamp<int64_t>(i + d, 0, n - 1);  // edge replication
      sum += pick(track.boxes[static_cast<size_t>(j)]);
    }
    return sum / static_cast<double>(window);
  };
  for (int64_t i = 0; i < n; ++i) {
    Box b;
    b.x0 = averaged([](const Box& bb) { return bb.x0; }, i);
    b.y0 = averaged([](const Box& bb) { return bb.y0; }, i);
    b.x1 = averaged([](const Box& bb) { return bb.x1; }, i);
    b.y1 = averaged([](const Box& bb) { return bb.y1; }, i);
    out.boxes[static_cast<size_t>(i)] = clamp_box(b, frame_width, frame_height);
  }
  return out;
}

Box box_from_keypoints(std::span<const Keypoint> keypoints, double min_confidence) {
  Box b{0, 0, 0, 0};
  bool any = false;
  for (const Keypoint& kp : keypoints) {
    if (kp.confidence < min_confidence) continue;
    if (!any) {
      b = Box{kp.x, kp.y, kp.x, kp.y};
      any = true;
    } else {
      b.x0 = std::min(b.x0, kp.x);
      b.y0 = std::min(b.y0, kp.y);
      b.x1 = std::max(b.x1, kp.x);
      b.y1 = std::max(b.y1, kp.y);
    }
  }
  if (!any) throw ShapeError("no keypoints at or above the confidence threshold");
  return b;
}

namespace {

void validate_clip(const ClipSource& clip) {
  if (clip.count() < 1) throw ShapeError("clip has no frames");
  const Frame& first = clip.frames[0];
  for (size_t i = 0; i < clip.frames.size(); ++i) {
    const Frame& f = clip.frames[i];
    if (f.height < 1 || f.width < 1) {
      throw ShapeError("clip frame " + std::to_string(i) + " has empty dimensions");
    }
    if (static_cast<int64_t>(f.rgb.size()) != f.height * f.width * 3) {
      throw ShapeError("clip frame " + std::to_string(i) + " pixel buffer length mismatch");
    }
    if (f.height != first.height || f.width != first.width) {
      throw ShapeError("clip frame " + std::to_string(i) + " size differs from frame 0");
    }
  }
}

double bilinear_sample(const Frame& f, double sx, double sy, int64_t channel) {
  sx = std::clamp(sx, 0.0, static_cast<double>(f.width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(f.height - 1));
  const int64_t x0 = static_cast<int64_t>(std::floor(sx));
  const int64_t y0 = static_cast<int64_t>(std::floor(sy));
  const int64_t x1 = std::min<int64_t>(x0 + 1, f.width - 1);
  const int64_t y1 = std::min<int64_t>(y0 + 1, f.height - 1);
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  const double top = (1.0 - fx) * f.at(y0, x0, channel) + fx * f.at(y0, x1, channel);
  const double bot = (1.0 - fx) * f.at(y1, x0, channel) + fx * f.at(y1, x1, channel);
  return (1.0 - fy) * top + fy * bot;
}

Box square_grow(const Box& b) {
  const double side = std::max(b.width(), b.height());
  const double cx = (b.x0 + b.x1) * 0.5;
  const double cy = (b.y0 + b.y1) * 0.5;
  return Box{cx - side * 0.5, cy - side * 0.5, cx + side * 0.5, cy + side * 0.5};
}

}  // namespace

Tensor5 crop_resize(const ClipSource& clip, std::span<const int64_t> frame_indices,
                    const BoxTrack& boxes, const CropConfig& cfg) {
  validate_clip(clip);
  if (cfg.out_size < 1) throw ConfigError("crop out_size must be >= 1");
  if (boxes.count() != clip.count()) {
    throw ShapeError("box track has " + std::to_string(boxes.count()) + " boxes for " +
                     std::to_string(clip.count()) + " frames");
  }
  const int64_t t = static_cast<int64_t>(frame_indices.size());
  if (t < 1) throw ShapeError("crop_resize needs at least one frame index");
  const int64_t out = cfg.out_size;
  Tensor5 result(Shape5{1, 3, t, out, out});
  for (int64_t i = 0; i < t; ++i) {
    const int64_t idx = frame_indices[static_cast<size_t>(i)];
    if (idx < 0 || idx >= clip.count()) {
      throw ShapeError("frame index " + std::to_string(idx) + " out of range [0, " +
                       std::to_string(clip.count()) + ")");
    }
    const Frame& frame = clip.frames[static_cast<size_t>(idx)];
    Box b = expand_box(boxes.boxes[static_cast<size_t>(idx)], cfg.pad_ratio);
    if (cfg.square) b = square_grow(b);
    b = clamp_box(b, frame.width, frame.height);
    if (b.width() <= 1e-9 || b.height() <= 1e-9) {
      throw ShapeError("degenerate box after clamping at frame " + std::to_string(idx));
    }
    const double sx_scale = b.width() / static_cast<double>(out);
    const double sy_scale = b.height() / static_cast<double>(out);
    for (int64_t c = 0; c < 3; ++c) {
      const double mean = cfg.mean[static_cast<size_t>(c)];
      const double stdev = cfg.stdev[static_cast<size_t>(c)];
      for (int64_t oy = 0; oy < out; ++oy) {
        const double sy = b.y0 + (static_cast<double>(oy) + 0.5) * sy_scale - 0.5;
        for (int64_t ox = 0; ox < out; ++ox) {
          const double sx = b.x0 + (static_cast<double>(ox) + 0.5) * sx_scale - 0.5;
          const double v = bilinear_sample(frame, sx, sy, c) / 255.0;
          result.at(0, c, i, oy, ox) = static_cast<float>((v - mean) / stdev);
        }
      }
    }
  }
  return result;
}

Tensor5 preprocess_clip(const ClipSource& clip, const BoxTrack* boxes,
                        const PreprocessConfig& cfg) {
  validate_clip(clip);
  const std::vector<int64_t> indices = uniform_sample(clip.count(), cfg.target_frames);
  BoxTrack track;
  if (boxes) {
    track = smooth_boxes(*boxes, cfg.smooth_window, clip.frames[0].width, clip.frames[0].height);
  } else {
    track.boxes.assign(static_cast<size_t>(clip.count()),
                       Box{0, 0, static_cast<double>(clip.frames[0].width),
                           static_cast<double>(clip.frames[0].height)});
  }
  return crop_resize(clip, indices, track, cfg.crop);
}

namespace {

// frame_12.ppm sorts after frame_2.ppm: order by (prefix, numeric suffix, name)
struct PpmName {
  std::filesystem::path path;
  std::string prefix;
  int64_t number = -1;
};

PpmName split_name(const std::filesystem::path& p) {
  PpmName out;
  out.path = p;
  const std::string stem = p.stem().string();
  size_t digits = 0;
  while (digits < stem.size() && std::isdigit(static_cast<unsigned char>(stem[stem.size() - 1 - digits]))) {
    ++digits;
  }
  out.prefix = stem.substr(0, stem.size() - digits);
  if (digits > 0 && digits <= 18) {
    out.number = std::stoll(stem.substr(stem.size() - digits));
  }
  return out;
}

int read_ppm_token(std::istream& in, std::string& token) {
  token.clear();
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {  // comment runs to end of line
      while (ch != EOF && ch != '\n') ch = in.get();
      ch = in.get();
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return ch;
      ch = in.get();
      continue;
    }
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return token.empty() ? EOF : ' ';
}

Frame load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frame file " + path.string());
  std::string token;
  read_ppm_token(in, token);
  if (token == "P5") {
    throw ShapeError("frame " + path.string() + " is grayscale (P5); 3-channel P6 required");
  }
  if (token != "P6") {
    throw IoError("frame " + path.string() + " is not a binary PPM (P6) file");
  }
  auto next_int = [&](const char* what) {
    if (read_ppm_token(in, token) == EOF && token.empty()) {
      throw IoError("frame " + path.string() + ": missing " + what);
    }
    try {
      return static_cast<int64_t>(std::stoll(token));
    } catch (const std::exception&) {
      throw IoError("frame " + path.string() + ": bad " + what + " \"" + token + "\"");
    }
  };
  Frame f;
  f.width = next_int("width");
  f.height = next_int("height");
  const int64_t maxval = next_int("maxval");
  if (f.width < 1 || f.height < 1) {
    throw IoError("frame " + path.string() + " has empty dimensions");
  }
  if (maxval != 255) {
    throw IoError("frame " + path.string() + " maxval " + std::to_string(maxval) +
                  " unsupported (need 255)");
  }
  const int64_t bytes = f.width * f.height * 3;
  f.rgb.resize(static_cast<size_t>(bytes));
  in.read(reinterpret_cast<char*>(f.rgb.data()), bytes);
  if (in.gcount() != bytes) {
    throw IoError("frame " + path.string() + " truncated pixel data");
  }
  return f;
}

}  // namespace

ClipSource load_ppm_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("clip directory " + dir.string() + " does not exist");
  }
  std::vector<PpmName> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".ppm") continue;
    names.push_back(split_name(entry.path()));
  }
  if (names.empty()) throw IoError("clip directory " + dir.string() + " holds no .ppm frames");
  std::sort(names.begin(), names.end(), [](const PpmName& a, const PpmName& b) {
    if (a.prefix != b.prefix) return a.prefix < b.prefix;
    if (a.number != b.number) return a.number < b.number;
    return a.path.filename().string() < b.path.filename().string();
  });
  ClipSource clip;
  for (const PpmName& n : names) clip.frames.push_back(load_ppm(n.path));
  validate_clip(clip);
  return clip;
}

ClipSource load_raw_clip(const std::filesystem::path& path) {
  const std::filesystem::path sidecar = path.string() + ".json";
  std::ifstream meta(sidecar, std::ios::binary);
  if (!meta) throw IoError("cannot open clip sidecar " + sidecar.string());
  nlohmann::json doc;
  try {
    std::ostringstream buf;
    buf << meta.rdbuf();
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("clip sidecar " + sidecar.string() + " parse failure: " + e.what());
  }
  int64_t frames = 0, height = 0, width = 0;
  try {
    frames = doc.at("frames").get<int64_t>();
    height = doc.at("height").get<int64_t>();
    width = doc.at("width").get<int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("clip sidecar " + sidecar.string() + " field failure: " + e.what());
  }
  if (frames < 1 || height < 1 || width < 1) {
    throw IoError("clip sidecar " + sidecar.string() + " has non-positive dimensions");
  }
  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw IoError("cannot open clip file " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(raw)),
                             std::istreambuf_iterator<char>());
  const int64_t expected = frames * 3 * height * width;
  if (static_cast<int64_t>(bytes.size()) != expected) {
    throw IoError("clip file " + path.string() + " holds " + std::to_string(bytes.size()) +
                  " bytes, sidecar implies " + std::to_string(expected));
  }
  ClipSource clip;
  clip.frames.resize(static_cast<size_t>(frames));
  const int64_t plane = height * width;
  for (int64_t fi = 0; fi < frames; ++fi) {
    Frame& f = clip.frames[static_cast<size_t>(fi)];
    f.height = height;
    f.width = width;
    f.rgb.resize(static_cast<size_t>(plane * 3));
    const uint8_t* src = bytes.data() + fi * 3 * plane;
    // planar [channel][y][x] to interleaved rgb
    for (int64_t c = 0; c < 3; ++c) {
      for (int64_t i = 0; i < plane; ++i) {
        f.rgb[static_cast<size_t>(i * 3 + c)] = src[c * plane + i];
      }
    }
  }
  return clip;
}

BoxTrack load_boxes_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open box file " + path.string());
  nlohmann::json doc;
  try {
    std::ostringstream buf;
    buf << in.rdbuf();
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("box file " + path.string() + " parse failure: " + e.what());
  }
  if (!doc.is_array()) throw IoError("box file " + path.string() + " must be a JSON array");
  BoxTrack track;
  size_t idx = 0;
  for (const auto& row : doc) {
    if (!row.is_array() || row.size() != 4 || !row[0].is_number() || !row[1].is_number() ||
        !row[2].is_number() || !row[3].is_number()) {
      throw IoError("box file " + path.string() + " frame " + std::to_string(idx) +
                    " must be [x0, y0, x1, y1]");
    }
    Box b{row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>()};
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) {
      throw ShapeError("box file " + path.string() + " frame " + std::to_string(idx) +
                       " is degenerate (needs x0 < x1 and y0 < y1)");
    }
    track.boxes.push_back(b);
    ++idx;
  }
  return track;
}

void save_ppm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write frame file " + path.string());
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.rgb.data()),
            static_cast<std::streamsize>(frame.rgb.size()));
  if (!out) throw IoError("failed writing frame file " + path.string());
}

}  // namespace xugt
