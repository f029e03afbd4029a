#include "snd/model_io.hpp"

#include <fstream>
#include <sstream>

#include "snd/errors.hpp"
#include "snd/format.hpp"

namespace snd {

void write_model(std::ostream& out, const MlpModel& model) {
  out << "SND-MLP v1\n" << model.layers().size() << '\n';
  for (const auto& l : model.layers()) {
    out << l.rows << ' ' << l.cols << '\n';
    for (std::size_t r = 0; r < l.rows; ++r) {
      for (std::size_t c = 0; c < l.cols; ++c) {
        if (c) out << ' ';
        out << format_double(l.weights[r * l.cols + c]);
      }
      out << '\n';
    }
    for (std::size_t r = 0; r < l.rows; ++r) {
      if (r) out << ' ';
      out << format_double(l.bias[r]);
    }
    out << '\n';
  }
}

MlpModel read_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != "SND-MLP v1") throw FormatError("bad weight-file magic");
  std::size_t count = 0;
  if (!(in >> count) || count == 0) throw FormatError("missing or zero layer count");
  std::vector<DenseLayer> layers;
  for (std::size_t li = 0; li < count; ++li) {
    DenseLayer l;
    if (!(in >> l.rows >> l.cols)) throw FormatError("truncated layer header");
    if (l.rows == 0 || l.cols == 0) throw FormatError("zero layer dimension");
    if (li > 0 && l.cols != layers.back().rows) {
      throw FormatError("layer " + std::to_string(li) + " input width does not match previous layer");
    }
    l.weights.resize(l.rows * l.cols);
    l.bias.resize(l.rows);
    for (double& w : l.weights) {
      if (!(in >> w)) throw FormatError("truncated weights");
    }
    for (double& b : l.bias) {
      if (!(in >> b)) throw FormatError("truncated biases");
    }
    layers.push_back(std::move(l));
  }
  std::string rest;
  if (in >> rest) throw FormatError("trailing data after last layer");
  try {
    return MlpModel(std::move(layers));
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
}

void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_model(out, model);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_model(in);
}

}  // namespace snd
