#include "snd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snd/errors.hpp"

namespace snd {

ImageTensor::ImageTensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

ImageTensor::ImageTensor(Shape shape, Vec data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw DimensionError("image data has " + std::to_string(data_.size()) +
                         " values, shape requires " + std::to_string(shape_.size()));
  }
}

ImageTensor ImageTensor::flat(Vec data) {
  Shape s{data.size(), 1, 1};
  return ImageTensor(s, std::move(data));
}

double l2_norm(std::span<const double> v) {
  // Scaled accumulation keeps huge or tiny entries from overflowing.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double x : v) {
    const double r = x / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("l2_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

Vec subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("subtract: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec add_scaled(std::span<const double> a, double s, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("add_scaled: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

void scale_in_place(std::span<double> v, double s) {
  for (double& x : v) x *= s;
}

Vec normalized(std::span<const double> v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw ParameterError("cannot normalize a zero vector");
  Vec out(v.begin(), v.end());
  scale_in_place(out, 1.0 / n);
  return out;
}

void clip01_in_place(std::span<double> v) {
  for (double& x : v) x = std::min(1.0, std::max(0.0, x));
}

ImageTensor clip01(const ImageTensor& x) {
  ImageTensor out = x;
  clip01_in_place(out.values());
  return out;
}

ImageTensor step_clipped(const ImageTensor& x, double s, std::span<const double> dir) {
  return ImageTensor(x.shape(), [&] {
    Vec v = add_scaled(x.values(), s, dir);
    clip01_in_place(v);
    return v;
  }());
}

}  // namespace snd
