#include "snd/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "snd/errors.hpp"
#include "snd/format.hpp"
#include "snd/rng.hpp"

namespace snd {

void DatasetSpec::validate() const {
  if (width == 0 || height == 0 || channels == 0) throw ParameterError("dataset shape must be positive");
  if (num_classes < 2) throw ParameterError("dataset needs at least two classes");
  if (samples_per_class == 0) throw ParameterError("samples_per_class must be positive");
  if (!(blob_sigma > 0.0)) throw ParameterError("blob_sigma must be positive");
  if (pixel_noise < 0.0) throw ParameterError("pixel_noise must be >= 0");
  if (amplitude < 0.0 || background < 0.0 || background + amplitude > 1.0) {
    throw ParameterError("background and amplitude must stay within [0, 1]");
  }
}

std::vector<std::size_t> SyntheticDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t l : labels) ++counts.at(l);
  return counts;
}

ImageTensor class_template(const DatasetSpec& spec, std::size_t label) {
  const double cx0 = (static_cast<double>(spec.width) - 1.0) / 2.0;
  const double cy0 = (static_cast<double>(spec.height) - 1.0) / 2.0;
  const double r = 0.3 * static_cast<double>(std::min(spec.width, spec.height));
  const double angle = std::numbers::pi / 4.0 +
                       2.0 * std::numbers::pi * static_cast<double>(label) /
                           static_cast<double>(spec.num_classes);
  const double bx = cx0 + r * std::cos(angle);
  const double by = cy0 + r * std::sin(angle);
  ImageTensor img(spec.shape());
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      const double dx = static_cast<double>(x) - bx;
      const double dy = static_cast<double>(y) - by;
      const double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * spec.blob_sigma * spec.blob_sigma));
      for (std::size_t c = 0; c < spec.channels; ++c) {
        img.at(x, y, c) = spec.background + spec.amplitude * bump;
      }
    }
  }
  return img;
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  SyntheticDataset data;
  data.shape = spec.shape();
  data.num_classes = spec.num_classes;
  std::vector<ImageTensor> templates;
  for (std::size_t k = 0; k < spec.num_classes; ++k) templates.push_back(class_template(spec, k));

  SeededRng rng(spec.seed);
  const std::size_t n = spec.num_classes * spec.samples_per_class;
  data.images.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % spec.num_classes;
    ImageTensor img = templates[label];
    if (spec.pixel_noise > 0.0) {
      for (double& v : img.values()) v += spec.pixel_noise * rng.gaussian();
    }
    clip01_in_place(img.values());
    data.images.push_back(std::move(img));
    data.labels.push_back(label);
  }
  return data;
}

void write_dataset(std::ostream& out, const SyntheticDataset& data) {
  out << "SND-DATA v1\n";
  out << data.shape.width << ' ' << data.shape.height << ' ' << data.shape.channels << ' '
      << data.num_classes << ' ' << data.size() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (double v : data.images[i].values()) out << ' ' << format_double(v);
    out << '\n';
  }
}

SyntheticDataset read_dataset(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != "SND-DATA v1") throw FormatError("not an SND-DATA v1 file");
  SyntheticDataset data;
  std::size_t count = 0;
  if (!(in >> data.shape.width >> data.shape.height >> data.shape.channels >> data.num_classes >> count)) {
    throw FormatError("truncated dataset header");
  }
  if (data.shape.size() == 0 || data.num_classes < 2) throw FormatError("invalid dataset header");
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t label;
    if (!(in >> label)) throw FormatError("truncated dataset body");
    if (label >= data.num_classes) throw FormatError("label out of range");
    Vec values(data.shape.size());
    for (double& v : values) {
      if (!(in >> v)) throw FormatError("truncated dataset body");
    }
    data.images.emplace_back(data.shape, std::move(values));
    data.labels.push_back(label);
  }
  return data;
}

void save_dataset(const std::string& path, const SyntheticDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_dataset(out, data);
}

SyntheticDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_dataset(in);
}

}  // namespace snd
