#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "snd/tensor.hpp"

namespace snd {

// Orthonormal type-II 2-D DCT, applied per channel. Coefficient (row v,
// column u) is stored where pixel (x = u, y = v) would be, so the output has
// the input's shape.
ImageTensor dct2(const ImageTensor& x);
// Exact inverse (type-III with the same normalisation).
ImageTensor idct2(const ImageTensor& coeffs);

// Pixel-domain image of a single unit DCT coefficient; has unit l2 norm.
ImageTensor dct_basis_image(const Shape& shape, std::size_t row, std::size_t col, std::size_t channel);

struct Coefficient {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Coefficient&) const = default;
};

// Deterministic low-frequency visiting order over the top-left
// freq_dims x freq_dims block. Coefficients are grouped by residue class
// (row % stride, col % stride); classes are visited in row-major order of
// the residue pair, starting with (0, 0), and each class is enumerated
// row-major. For freq_dims = 8, stride = 2 this yields
// (0,0), (0,2), (0,4), (0,6), (2,0), ..., then (0,1), (0,3), ...
std::vector<Coefficient> strided_order(std::size_t freq_dims, std::size_t stride);

}  // namespace snd
