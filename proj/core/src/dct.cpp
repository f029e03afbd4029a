#include "snd/dct.hpp"

#include <cmath>
#include <numbers>

#include "snd/errors.hpp"

namespace snd {

namespace {

// Row k holds basis vector k: c_k(n) = a_k cos(pi (2n + 1) k / 2N).
std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> m(n * n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
    for (std::size_t i = 0; i < n; ++i) {
      m[k * n + i] = a * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) *
                                  static_cast<double>(k) / (2.0 * nn));
    }
  }
  return m;
}

void check_image(const ImageTensor& x) {
  const Shape& s = x.shape();
  if (s.width == 0 || s.height == 0 || s.channels == 0 || s.size() != x.size()) {
    throw DimensionError("DCT needs an image-shaped tensor");
  }
}

// forward: out = C_h * X * C_w^T per channel; inverse uses the transposes.
ImageTensor transform(const ImageTensor& in, bool inverse) {
  check_image(in);
  const Shape& s = in.shape();
  const auto cw = dct_matrix(s.width);
  const auto ch = dct_matrix(s.height);
  auto mw = [&](std::size_t a, std::size_t b) { return inverse ? cw[b * s.width + a] : cw[a * s.width + b]; };
  auto mh = [&](std::size_t a, std::size_t b) { return inverse ? ch[b * s.height + a] : ch[a * s.height + b]; };
  ImageTensor tmp(s);
  ImageTensor out(s);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t y = 0; y < s.height; ++y) {
      for (std::size_t u = 0; u < s.width; ++u) {
        double acc = 0.0;
        for (std::size_t x = 0; x < s.width; ++x) acc += mw(u, x) * in.at(x, y, c);
        tmp.at(u, y, c) = acc;
      }
    }
    for (std::size_t v = 0; v < s.height; ++v) {
      for (std::size_t u = 0; u < s.width; ++u) {
        double acc = 0.0;
        for (std::size_t y = 0; y < s.height; ++y) acc += mh(v, y) * tmp.at(u, y, c);
        out.at(u, v, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace

ImageTensor dct2(const ImageTensor& x) { return transform(x, false); }

ImageTensor idct2(const ImageTensor& coeffs) { return transform(coeffs, true); }

ImageTensor dct_basis_image(const Shape& shape, std::size_t row, std::size_t col, std::size_t channel) {
  if (row >= shape.height || col >= shape.width || channel >= shape.channels) {
    throw DimensionError("DCT coefficient outside the image");
  }
  ImageTensor unit(shape, 0.0);
  unit.at(col, row, channel) = 1.0;
  return idct2(unit);
}

std::vector<Coefficient> strided_order(std::size_t freq_dims, std::size_t stride) {
  if (freq_dims == 0 || stride == 0) throw ParameterError("freq_dims and stride must be positive");
  std::vector<Coefficient> order;
  order.reserve(freq_dims * freq_dims);
  const std::size_t classes = std::min(stride, freq_dims);
  for (std::size_t rr = 0; rr < classes; ++rr) {
    for (std::size_t rc = 0; rc < classes; ++rc) {
      for (std::size_t r = rr; r < freq_dims; r += stride) {
        for (std::size_t c = rc; c < freq_dims; c += stride) order.push_back({r, c});
      }
    }
  }
  return order;
}

}  // namespace snd
