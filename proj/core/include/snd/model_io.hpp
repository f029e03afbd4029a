#pragma once

#include <iosfwd>
#include <string>

#include "snd/models.hpp"

namespace snd {

// Weight file, text:
//   SND-MLP v1
//   <layer count>
//   per layer: "<rows> <cols>", then rows lines of cols weights (row-major),
//   then one line of rows biases.
// Values are written in shortest round-trip form, so a reload reproduces
// bit-identical forward outputs.
void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in);
void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);

}  // namespace snd
