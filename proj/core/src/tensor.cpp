#include "xugt/tensor.hpp"

#include <cmath>

#include "xugt/errors.hpp"

namespace xugt {

std::string Shape5::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(t) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor5::Tensor5(const Shape5& shape, float fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.t < 0 || shape.h < 0 || shape.w < 0) {
    throw ShapeError("tensor shape has a negative dimension: " + shape.str());
  }
  data_.assign(static_cast<size_t>(shape.numel()), fill);
}

Tensor5 Tensor5::from_data(const Shape5& shape, std::vector<float> data) {
  if (static_cast<int64_t>(data.size()) != shape.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape.str());
  }
  Tensor5 t(shape);
  t.data_ = std::move(data);
  return t;
}

bool Tensor5::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_shape(const Shape5& got, const Shape5& want, const std::string& what) {
  if (!(got == want)) {
    throw ShapeError(what + ": expected shape " + want.str() + ", got " + got.str());
  }
}

}  // namespace xugt
