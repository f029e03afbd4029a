#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace snd {

using Vec = std::vector<double>;

// Image geometry. Storage is channel-last, row-major: index = (y * width + x) * channels + c.
struct Shape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;

  std::size_t size() const { return width * height * channels; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return (y * width + x) * channels + c;
  }
  bool operator==(const Shape&) const = default;
};

// Flat vector of pixel values with image shape metadata.
class ImageTensor {
 public:
  ImageTensor() = default;
  explicit ImageTensor(Shape shape, double fill = 0.0);
  ImageTensor(Shape shape, Vec data);
  // A 1 x d x 1 "image" for models that are not image shaped.
  static ImageTensor flat(Vec data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  const Vec& vec() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data_[shape_.index(x, y, c)];
  }
  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data_[shape_.index(x, y, c)];
  }

  bool operator==(const ImageTensor&) const = default;

 private:
  Shape shape_;
  Vec data_;
};

double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double l2_distance(std::span<const double> a, std::span<const double> b);
// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

// a - b
Vec subtract(std::span<const double> a, std::span<const double> b);
// a + s * b
Vec add_scaled(std::span<const double> a, double s, std::span<const double> b);
void scale_in_place(std::span<double> v, double s);
// Returns v / ||v||; throws ParameterError on a zero vector.
Vec normalized(std::span<const double> v);

ImageTensor clip01(const ImageTensor& x);
void clip01_in_place(std::span<double> v);

// x + s * dir, clipped to [0, 1], shape of x preserved.
ImageTensor step_clipped(const ImageTensor& x, double s, std::span<const double> dir);

}  // namespace snd
