#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snd/tensor.hpp"

namespace snd {

// Generator parameters for the blob-pattern image task. Class k places a
// Gaussian bump at its own position on a circle around the image center
// (angle pi/4 + 2*pi*k/N, radius 0.3 * min(width, height)) on top of a flat
// background, then adds i.i.d. pixel noise and clips to [0, 1].
struct DatasetSpec {
  std::size_t width = 8;
  std::size_t height = 8;
  std::size_t channels = 1;
  std::size_t num_classes = 4;
  std::size_t samples_per_class = 250;
  double blob_sigma = 1.0;   // spatial spread of the bump, in pixels
  double amplitude = 0.6;    // bump height above background
  double background = 0.2;
  double pixel_noise = 0.1;  // std of additive pixel noise
  std::uint64_t seed = 1;

  Shape shape() const { return {width, height, channels}; }
  void validate() const;
};

struct SyntheticDataset {
  Shape shape;
  std::size_t num_classes = 0;
  std::vector<ImageTensor> images;
  std::vector<std::size_t> labels;

  std::size_t size() const { return images.size(); }
  std::vector<std::size_t> class_counts() const;
};

// Noise-free class template (bump on background).
ImageTensor class_template(const DatasetSpec& spec, std::size_t label);

// Sample i has label i % num_classes; reproducible from (spec, spec.seed).
SyntheticDataset generate_dataset(const DatasetSpec& spec);

// Text format: "SND-DATA v1", then "width height channels classes count",
// then one line per sample: label followed by the pixel values.
void write_dataset(std::ostream& out, const SyntheticDataset& data);
SyntheticDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const SyntheticDataset& data);
SyntheticDataset load_dataset(const std::string& path);

}  // namespace snd
