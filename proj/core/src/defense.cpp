#include "snd/defense.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include "snd/errors.hpp"
#include "snd/format.hpp"

namespace snd {

DefenseSpec DefenseSpec::snd(double sigma) {
  DefenseSpec d;
  d.kind = Kind::kSnd;
  d.sigma = sigma;
  d.validate();
  return d;
}

DefenseSpec DefenseSpec::beta_snd(double sigma, double alpha_b, double beta_b) {
  DefenseSpec d;
  d.kind = Kind::kBetaSnd;
  d.sigma = sigma;
  d.alpha_b = alpha_b;
  d.beta_b = beta_b;
  d.validate();
  return d;
}

DefenseSpec DefenseSpec::rand_resize_pad(double s_min, double s_max) {
  DefenseSpec d;
  d.kind = Kind::kRandResizePad;
  d.s_min = s_min;
  d.s_max = s_max;
  d.validate();
  return d;
}

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw ParameterError("bad number");
    } catch (const std::exception&) {
      throw ParameterError("defense: cannot parse number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

DefenseSpec DefenseSpec::parse(const std::string& raw) {
  std::string text = raw;
  text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }),
             text.end());
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_numbers(text.substr(colon + 1));
  if (name == "none" && args.empty()) return none();
  if (name == "snd" && args.size() == 1) return snd(args[0]);
  if (name == "beta" && args.size() == 3) return beta_snd(args[0], args[1], args[2]);
  if (name == "rp" && args.empty()) return rand_resize_pad();
  if (name == "rp" && args.size() == 2) return rand_resize_pad(args[0], args[1]);
  throw ParameterError("unrecognised defense '" + raw + "'");
}

std::string DefenseSpec::label() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kSnd:
      return "snd:" + format_double(sigma);
    case Kind::kBetaSnd:
      return "beta:" + format_double(sigma) + "," + format_double(alpha_b) + "," + format_double(beta_b);
    case Kind::kRandResizePad:
      return "rp:" + format_double(s_min) + "," + format_double(s_max);
  }
  return "?";
}

void DefenseSpec::validate() const {
  switch (kind) {
    case Kind::kNone:
      return;
    case Kind::kSnd:
      if (!(sigma >= 0.0)) throw ParameterError("SND sigma must be >= 0");
      return;
    case Kind::kBetaSnd:
      if (!(sigma >= 0.0)) throw ParameterError("BetaSND sigma must be >= 0");
      if (!(alpha_b > 0.0) || !(beta_b > 0.0)) throw ParameterError("BetaSND alpha_b and beta_b must be > 0");
      return;
    case Kind::kRandResizePad:
      if (!(s_min >= 1.0) || !(s_max >= s_min)) throw ParameterError("RandResizePad requires 1 <= s_min <= s_max");
      return;
  }
}

bool DefenseSpec::randomized() const {
  switch (kind) {
    case Kind::kNone:
      return false;
    case Kind::kSnd:
    case Kind::kBetaSnd:
      return sigma > 0.0;
    case Kind::kRandResizePad:
      return true;
  }
  return false;
}

Shape DefenseSpec::model_shape(const Shape& in) const {
  return kind == Kind::kRandResizePad ? resize_pad_canvas(in, s_max) : in;
}

ImageTensor apply_scaled_snd(const ImageTensor& x, double sigma, double k, SeededRng& rng, bool clip) {
  const Vec eta = sample_gaussian(rng, x.size(), sigma);
  ImageTensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k * eta[i];
  if (clip) clip01_in_place(out.values());
  return out;
}

ImageTensor apply_snd(const ImageTensor& x, double sigma, SeededRng& rng, bool clip) {
  return apply_scaled_snd(x, sigma, 1.0, rng, clip);
}

ImageTensor apply_beta_snd(const ImageTensor& x, double sigma, double alpha_b, double beta_b,
                           SeededRng& rng, bool clip) {
  if (!(sigma >= 0.0)) throw ParameterError("BetaSND sigma must be >= 0");
  const double k = rng.beta(alpha_b, beta_b);
  return apply_scaled_snd(x, sigma, k, rng, clip);
}

Shape resize_pad_canvas(const Shape& in, double s_max) {
  if (!(s_max >= 1.0)) throw ParameterError("s_max must be >= 1");
  auto side = [&](std::size_t n) {
    return static_cast<std::size_t>(std::ceil(s_max * static_cast<double>(n) - 1e-9));
  };
  return {side(in.width), side(in.height), in.channels};
}

ImageTensor bilinear_resize(const ImageTensor& x, std::size_t width, std::size_t height) {
  const Shape& s = x.shape();
  if (s.width == 0 || s.height == 0 || width == 0 || height == 0) {
    throw DimensionError("bilinear_resize needs a non-empty image");
  }
  ImageTensor out(Shape{width, height, s.channels});
  const double fx = static_cast<double>(s.width) / static_cast<double>(width);
  const double fy = static_cast<double>(s.height) / static_cast<double>(height);
  auto coord = [](double src, std::size_t n, std::size_t& i0, std::size_t& i1, double& t) {
    src = std::clamp(src, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<std::size_t>(std::floor(src));
    i1 = std::min(i0 + 1, n - 1);
    t = src - static_cast<double>(i0);
  };
  for (std::size_t y = 0; y < height; ++y) {
    std::size_t y0, y1;
    double ty;
    coord((static_cast<double>(y) + 0.5) * fy - 0.5, s.height, y0, y1, ty);
    for (std::size_t xo = 0; xo < width; ++xo) {
      std::size_t x0, x1;
      double tx;
      coord((static_cast<double>(xo) + 0.5) * fx - 0.5, s.width, x0, x1, tx);
      for (std::size_t c = 0; c < s.channels; ++c) {
        const double top = (1.0 - tx) * x.at(x0, y0, c) + tx * x.at(x1, y0, c);
        const double bottom = (1.0 - tx) * x.at(x0, y1, c) + tx * x.at(x1, y1, c);
        out.at(xo, y, c) = (1.0 - ty) * top + ty * bottom;
      }
    }
  }
  return out;
}

ImageTensor resize_pad(const ImageTensor& x, std::size_t width, std::size_t height,
                       std::size_t offset_x, std::size_t offset_y, const Shape& canvas) {
  if (canvas.channels != x.shape().channels || offset_x + width > canvas.width ||
      offset_y + height > canvas.height) {
    throw DimensionError("resized image does not fit the canvas");
  }
  const ImageTensor resized =
      (width == x.shape().width && height == x.shape().height) ? x : bilinear_resize(x, width, height);
  ImageTensor out(canvas, 0.0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t xi = 0; xi < width; ++xi) {
      for (std::size_t c = 0; c < canvas.channels; ++c) {
        out.at(offset_x + xi, offset_y + y, c) = resized.at(xi, y, c);
      }
    }
  }
  return out;
}

ImageTensor apply_rand_resize_pad(const ImageTensor& x, double s_min, double s_max, SeededRng& rng) {
  if (!(s_min >= 1.0) || !(s_max >= s_min)) throw ParameterError("RandResizePad requires 1 <= s_min <= s_max");
  const Shape& in = x.shape();
  if (in.width < 1 || in.height < 1) throw DimensionError("RandResizePad needs an image-shaped tensor");
  const Shape canvas = resize_pad_canvas(in, s_max);
  const double s = rng.uniform(s_min, s_max);
  auto side = [&](std::size_t n, std::size_t cap) {
    const auto v = static_cast<std::size_t>(std::llround(s * static_cast<double>(n)));
    return std::clamp<std::size_t>(v, 1, cap);
  };
  const std::size_t w = side(in.width, canvas.width);
  const std::size_t h = side(in.height, canvas.height);
  const std::size_t ox = static_cast<std::size_t>(rng.uniform_index(canvas.width - w + 1));
  const std::size_t oy = static_cast<std::size_t>(rng.uniform_index(canvas.height - h + 1));
  return resize_pad(x, w, h, ox, oy, canvas);
}

ImageTensor apply_defense(const DefenseSpec& spec, const ImageTensor& x, SeededRng& rng,
                          bool clip_after_noise) {
  switch (spec.kind) {
    case DefenseSpec::Kind::kNone:
      return clip_after_noise ? clip01(x) : x;
    case DefenseSpec::Kind::kSnd:
      return apply_snd(x, spec.sigma, rng, clip_after_noise);
    case DefenseSpec::Kind::kBetaSnd:
      return apply_beta_snd(x, spec.sigma, spec.alpha_b, spec.beta_b, rng, clip_after_noise);
    case DefenseSpec::Kind::kRandResizePad:
      return apply_rand_resize_pad(clip01(x), spec.s_min, spec.s_max, rng);
  }
  return x;
}

}  // namespace snd
