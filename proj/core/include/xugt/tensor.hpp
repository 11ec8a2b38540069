#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xugt {

// All feature maps are rank-5, layout (n, c, t, h, w) with w fastest.
struct Shape5 {
  int64_t n = 0;
  int64_t c = 0;
  int64_t t = 0;
  int64_t h = 0;
  int64_t w = 0;

  int64_t numel() const { return n * c * t * h * w; }
  bool operator==(const Shape5&) const = default;
  std::string str() const;  // "(n,c,t,h,w)"
};

class Tensor5 {
public:
  Tensor5() = default;
  explicit Tensor5(const Shape5& shape, float fill = 0.0f);
  static Tensor5 from_data(const Shape5& shape, std::vector<float> data);

  const Shape5& shape() const { return shape_; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& buffer() { return data_; }
  const std::vector<float>& buffer() const { return data_; }

  int64_t index(int64_t n, int64_t c, int64_t t, int64_t h, int64_t w) const {
    return (((n * shape_.c + c) * shape_.t + t) * shape_.h + h) * shape_.w + w;
  }
  float& at(int64_t n, int64_t c, int64_t t, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(index(n, c, t, h, w))];
  }
  float at(int64_t n, int64_t c, int64_t t, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(index(n, c, t, h, w))];
  }

  bool all_finite() const;

private:
  Shape5 shape_{};
  std::vector<float> data_;
};

// Throws ShapeError naming `what` when the two shapes differ.
void require_shape(const Shape5& got, const Shape5& want, const std::string& what);

}  // namespace xugt
