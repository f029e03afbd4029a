#include "snd/grad_estim.hpp"

#include <cmath>

#include "snd/errors.hpp"

namespace snd {

void RgfConfig::validate() const {
  if (samples < 1) throw ParameterError("RGF needs B >= 1");
  if (!(smoothing > 0.0)) throw ParameterError("RGF smoothing must be > 0");
  if (!(probe_sigma > 0.0)) throw ParameterError("RGF probe_sigma must be > 0");
}

Vec rgf_estimate(QueryOracle& oracle, const ImageTensor& x, const LossForm& form,
                 const RgfConfig& cfg, SeededRng& rng) {
  cfg.validate();
  oracle.ledger().require((cfg.samples + 1) * oracle.cost_per_query());
  const double base = adversary_loss(oracle.score_query(x), form);
  Vec g(x.size(), 0.0);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const Vec u = sample_gaussian(rng, x.size(), cfg.probe_sigma);
    ImageTensor probe(x.shape(), add_scaled(x.values(), cfg.smoothing, u));
    const double diff = (adversary_loss(oracle.score_query(probe), form) - base) / cfg.smoothing;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += diff * u[k];
  }
  scale_in_place(g, 1.0 / static_cast<double>(cfg.samples));
  return g;
}

std::size_t bisection_steps(double tol) {
  if (!(tol > 0.0) || tol >= 1.0) {
    if (tol >= 1.0) return 0;
    throw ParameterError("binary search tolerance must be > 0");
  }
  return static_cast<std::size_t>(std::ceil(std::log2(1.0 / tol) - 1e-12));
}

BoundaryPoint binary_search_to_boundary(QueryOracle& oracle, const ImageTensor& inside,
                                        std::size_t inside_label, const ImageTensor& outside,
                                        std::size_t outside_label, double tol) {
  if (inside_label == outside_label) throw BracketError("bracket endpoints share the observed label");
  if (inside.size() != outside.size()) throw DimensionError("bracket endpoints differ in size");
  const std::size_t steps = bisection_steps(tol);
  double lo = 0.0;
  double hi = 1.0;
  BoundaryPoint bp;
  bp.inside_label = inside_label;
  bp.outside_label = outside_label;
  auto blend = [&](double a) {
    Vec v(inside.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - a) * inside[i] + a * outside[i];
    return ImageTensor(inside.shape(), std::move(v));
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t label = oracle.decision_query(blend(mid));
    ++bp.queries;
    if (label == inside_label) {
      lo = mid;
    } else {
      hi = mid;
      bp.outside_label = label;
    }
  }
  bp.point = hi == 1.0 ? outside : blend(hi);
  bp.inside = lo == 0.0 ? inside : blend(lo);
  bp.distance_from_x0 = l2_distance(bp.point.values(), inside.values());
  bp.bracket_fraction = hi - lo;
  return bp;
}

double boundary_distance_along(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                               std::span<const double> theta, const LineSearchOptions& opts,
                               std::size_t* queries) {
  if (!(opts.tolerance > 0.0) || !(opts.search_cap > 0.0) || !(opts.initial_step > 0.0)) {
    throw ParameterError("line search options must be positive");
  }
  const Vec dir = normalized(theta);
  std::size_t used = 0;
  auto adversarial = [&](double lambda) {
    ++used;
    if (queries) *queries = used;
    return oracle.decision_query(step_clipped(x0, lambda, dir)) != c0;
  };

  double lo = 0.0;
  double hi = 0.0;
  const double start = opts.guess && *opts.guess > 0.0 && std::isfinite(*opts.guess)
                           ? std::min(*opts.guess, opts.search_cap)
                           : std::min(opts.initial_step, opts.search_cap);
  if (adversarial(start)) {
    hi = start;
    lo = 0.5 * start;
    while (lo > opts.tolerance && adversarial(lo)) {
      hi = lo;
      lo *= 0.5;
    }
    if (lo <= opts.tolerance) lo = 0.0;
  } else {
    lo = start;
    hi = start;
    for (;;) {
      if (hi >= opts.search_cap) return kNoCrossing;
      hi = std::min(2.0 * hi, opts.search_cap);
      if (adversarial(hi)) break;
      lo = hi;
    }
  }
  while (hi - lo > opts.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (adversarial(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

NormalEstimate estimate_boundary_normal(QueryOracle& oracle, const ImageTensor& point, std::size_t c0,
                                        std::size_t probes, double radius, SeededRng& rng, bool center) {
  if (probes == 0) throw ParameterError("normal estimate needs at least one probe");
  if (!(radius > 0.0)) throw ParameterError("probe radius must be > 0");
  std::vector<Vec> dirs;
  std::vector<double> phi;
  dirs.reserve(probes);
  phi.reserve(probes);
  NormalEstimate est;
  for (std::size_t i = 0; i < probes; ++i) {
    Vec u = sample_unit_sphere(rng, point.size());
    const bool adv = oracle.decision_query(step_clipped(point, radius, u)) != c0;
    phi.push_back(adv ? 1.0 : -1.0);
    dirs.push_back(std::move(u));
    ++est.probes;
    if (adv) ++est.adversarial;
  }
  double baseline = 0.0;
  if (center && !est.degenerate()) {
    for (double p : phi) baseline += p;
    baseline /= static_cast<double>(phi.size());
  }
  est.direction.assign(point.size(), 0.0);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double w = phi[i] - baseline;
    for (std::size_t k = 0; k < point.size(); ++k) est.direction[k] += w * dirs[i][k];
  }
  scale_in_place(est.direction, 1.0 / static_cast<double>(probes));
  return est;
}

}  // namespace snd
