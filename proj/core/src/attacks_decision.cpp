#include "snd/attacks_decision.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "snd/capped_oracle.hpp"
#include "snd/errors.hpp"

namespace snd {

void BoundaryAttackParams::validate() const {
  if (!(orthogonal_step >= 0.0) || !(source_step >= 0.0) || source_step >= 1.0) {
    throw ParameterError("boundary attack steps must satisfy 0 <= gamma_o, 0 <= gamma_s < 1");
  }
  if (window == 0) throw ParameterError("boundary attack window must be > 0");
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw ParameterError("target_rate must be in (0, 1)");
}

void SignOptParams::validate() const {
  if (probes == 0) throw ParameterError("Sign-OPT needs at least one probe");
  if (!(probe_beta > 0.0) || !(step > 0.0)) throw ParameterError("Sign-OPT beta and step must be > 0");
  if (!(line_tol > 0.0) || !(search_cap > 0.0)) throw ParameterError("Sign-OPT line search must be positive");
}

void HsjaParams::validate() const {
  if (initial_probes == 0 || max_probes == 0) throw ParameterError("HSJA needs at least one probe");
  if (!(gamma > 0.0)) throw ParameterError("HSJA gamma must be > 0");
  if (probe_radius && !(*probe_radius > 0.0)) throw ParameterError("HSJA probe radius must be > 0");
}

void GeodaParams::validate() const {
  if (!(probe_radius > 0.0)) throw ParameterError("GeoDA probe radius must be > 0");
  if (sub_iterations == 0) throw ParameterError("GeoDA needs at least one sub-iteration");
  if (!(ratio > 0.0)) throw ParameterError("GeoDA schedule ratio must be > 0");
  if (round_probes < sub_iterations) throw ParameterError("GeoDA round_probes must cover every sub-iteration");
  if (!(search_tol > 0.0 && search_tol < 1.0)) throw ParameterError("GeoDA search_tol must be in (0, 1)");
  if (!(search_cap > 0.0)) throw ParameterError("GeoDA search_cap must be > 0");
}

InitResult init_adversarial(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0, SeededRng& rng,
                            std::size_t max_tries, double search_tol) {
  InitResult out{x0, oracle.decision_query(x0), false, 0};
  if (out.label != c0) {
    out.x0_adversarial = true;
    return out;
  }
  for (std::size_t i = 0; i < max_tries; ++i) {
    ++out.tries;
    Vec v(x0.size());
    for (double& e : v) e = rng.uniform01();
    ImageTensor cand(x0.shape(), std::move(v));
    const std::size_t label = oracle.decision_query(cand);
    if (label == c0) continue;
    BoundaryPoint bp = binary_search_to_boundary(oracle, x0, c0, cand, label, search_tol);
    out.x = std::move(bp.point);
    out.label = bp.outside_label;
    return out;
  }
  throw InitFailure("no misclassified random image within " + std::to_string(max_tries) + " tries");
}

std::vector<std::size_t> geometric_schedule(std::size_t total, std::size_t n, double ratio) {
  if (n == 0) throw ParameterError("schedule needs at least one entry");
  if (total < n) throw ParameterError("schedule total must be >= its length");
  if (!(ratio > 0.0)) throw ParameterError("schedule ratio must be > 0");
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) weight_sum += std::pow(ratio, static_cast<double>(j));
  std::vector<std::size_t> out(n);
  std::size_t used = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double share = static_cast<double>(total) * std::pow(ratio, static_cast<double>(j)) / weight_sum;
    out[j] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share)));
    used += out[j];
  }
  // put the rounding residue on the last (largest) entry
  if (used > total) {
    std::size_t excess = used - total;
    for (std::size_t j = n; j-- > 0 && excess > 0;) {
      const std::size_t take = std::min(excess, out[j] - 1);
      out[j] -= take;
      excess -= take;
    }
  } else {
    out.back() += total - used;
  }
  return out;
}

namespace {

bool iteration_cap_hit(const AttackBudget& budget, std::size_t t) {
  return budget.max_iterations != 0 && t >= budget.max_iterations;
}

// Runs `body` with the shared decision-attack bookkeeping: capped oracle,
// init, the trace and status on early exits.
template <typename Body>
AttackTrace run_decision_attack(const char* name, QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                                const AttackBudget& budget, std::size_t max_init_tries, SeededRng& rng,
                                Referee& referee, Body&& body) {
  budget.validate();
  CappedOracle o(oracle, budget.queries);
  TraceRecorder rec(name, oracle, referee, x0, c0, budget);
  try {
    InitResult init = init_adversarial(o, x0, c0, rng, max_init_tries);
    rec.accept(0, init.x, l2_distance(init.x.values(), x0.values()));
    if (init.x0_adversarial) {
      rec.declare_success();
      return rec.finish();
    }
    body(o, rec, std::move(init));
  } catch (const BudgetExceeded& e) {
    rec.set_status("budget", e.what());
  } catch (const InitFailure& e) {
    rec.set_status("init_failure", e.what());
  }
  return rec.finish();
}

std::size_t some_other_label(std::size_t c0) { return c0 == 0 ? 1 : 0; }

ImageTensor along(const ImageTensor& x0, std::span<const double> unit_dir, double lambda) {
  return step_clipped(x0, lambda, unit_dir);
}

}  // namespace

// ---------------------------------------------------------------------------

AttackTrace boundary_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                            const AttackBudget& budget, const BoundaryAttackParams& params,
                            SeededRng& rng, Referee& referee) {
  params.validate();
  auto body = [&](QueryOracle& o, TraceRecorder& rec, InitResult init) {
    ImageTensor x = std::move(init.x);
    double gamma_o = params.orthogonal_step;
    double gamma_s = params.source_step;
    // separate windows: on-sphere proposals drive gamma_o, contractions gamma_s
    std::size_t sphere_trials = 0, sphere_hits = 0;
    std::size_t step_trials = 0, step_hits = 0;
    auto adapt = [&](std::size_t& trials, std::size_t& hits, double& gamma, double cap) {
      if (trials < params.window) return;
      const double rate = static_cast<double>(hits) / static_cast<double>(trials);
      if (rate > params.target_rate) {
        gamma = std::min(cap, gamma * 1.5);
      } else if (rate < params.target_rate) {
        gamma *= 0.5;
      }
      trials = hits = 0;
    };
    for (std::size_t t = 1;; ++t) {
      if (iteration_cap_hit(budget, t - 1)) {
        rec.set_status("iterations");
        return;
      }
      const Vec delta = subtract(x.values(), x0.values());
      const double dist = l2_norm(delta);
      if (dist == 0.0) return;
      // orthogonal Gaussian step of length gamma_o * dist, back onto the sphere
      Vec eta = sample_gaussian(rng, x.size(), 1.0);
      const double along_delta = dot(eta, delta) / (dist * dist);
      for (std::size_t i = 0; i < eta.size(); ++i) eta[i] -= along_delta * delta[i];
      const double en = l2_norm(eta);
      Vec p = delta;
      if (en > 0.0) p = add_scaled(p, gamma_o * dist / en, eta);
      const double pn = l2_norm(p);
      if (pn > 0.0) scale_in_place(p, dist / pn);
      Vec sphere_v = add_scaled(x0.values(), 1.0, p);
      clip01_in_place(sphere_v);
      ImageTensor sphere(x0.shape(), std::move(sphere_v));
      ++sphere_trials;
      if (o.decision_query(sphere) != c0) {
        ++sphere_hits;
        // then towards x0
        Vec cand_v = add_scaled(x0.values(), 1.0 - gamma_s, subtract(sphere.values(), x0.values()));
        ImageTensor cand(x0.shape(), std::move(cand_v));
        ++step_trials;
        if (o.decision_query(cand) != c0) {
          ++step_hits;
          x = std::move(cand);
          rec.accept(t, x, l2_distance(x.values(), x0.values()));
        }
        adapt(step_trials, step_hits, gamma_s, 0.5);
      }
      adapt(sphere_trials, sphere_hits, gamma_o, 1.0);
    }
  };
  return run_decision_attack("boundary", oracle, x0, c0, budget, params.max_init_tries, rng, referee, body);
}

// ---------------------------------------------------------------------------

Vec sign_opt_gradient(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                      std::span<const double> theta, double g, std::size_t probes, double beta,
                      SeededRng& rng, std::size_t* adversarial_count) {
  if (probes == 0) throw ParameterError("Sign-OPT needs at least one probe");
  const Vec unit = normalized(theta);
  Vec grad(unit.size(), 0.0);
  std::size_t adv = 0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vec u = sample_unit_sphere(rng, unit.size());
    const Vec probe_dir = normalized(add_scaled(unit, beta, u));
    // adversarial at the current distance means g(theta + beta u) <= g(theta)
    const bool hit = oracle.decision_query(along(x0, probe_dir, g)) != c0;
    if (hit) ++adv;
    const double sign = hit ? -1.0 : 1.0;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += sign * u[k];
  }
  scale_in_place(grad, 1.0 / static_cast<double>(probes));
  if (adversarial_count) *adversarial_count = adv;
  return grad;
}

namespace {

// Local search for g along `dir` starting at `start`: grow by 1% while the
// point stays benign (giving up past `cap`), shrink by 1% while it is
// adversarial, then bisect the bracket down to `tol`.
double local_distance(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0, std::span<const double> dir,
                      double start, double tol, double cap, std::size_t& queries) {
  auto adversarial = [&](double lambda) {
    ++queries;
    return oracle.decision_query(along(x0, dir, lambda)) != c0;
  };
  double lo = 0.0;
  double hi = 0.0;
  if (!adversarial(start)) {
    lo = start;
    hi = start * 1.01;
    while (!adversarial(hi)) {
      lo = hi;
      hi *= 1.01;
      if (hi > cap) return kNoCrossing;
    }
  } else {
    hi = start;
    lo = start * 0.99;
    while (lo > tol && adversarial(lo)) {
      hi = lo;
      lo *= 0.99;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (adversarial(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

SignOptStep sign_opt_line_search(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                                 std::span<const double> theta, double g, std::span<const double> grad,
                                 double& step, const SignOptParams& params) {
  SignOptStep out{Vec(theta.begin(), theta.end()), g, false, 0};
  if (l2_norm(grad) == 0.0) return out;
  const Vec unit = normalized(theta);
  auto try_step = [&](double eta, Vec& dir_out) {
    Vec cand = add_scaled(unit, -eta, grad);
    if (l2_norm(cand) == 0.0) return kNoCrossing;
    dir_out = normalized(cand);
    return local_distance(oracle, x0, c0, dir_out, out.g, params.line_tol, params.search_cap, out.queries);
  };
  Vec dir;
  double eta = step;
  double best = try_step(eta, dir);
  if (best < out.g) {
    out.theta = dir;
    out.g = best;
    out.moved = true;
    // keep doubling while it keeps paying off
    for (;;) {
      Vec dir2;
      const double g2 = try_step(2.0 * eta, dir2);
      if (!(g2 < out.g)) break;
      eta *= 2.0;
      out.theta = std::move(dir2);
      out.g = g2;
    }
    step = eta;
    return out;
  }
  for (std::size_t h = 0; h < params.max_halvings; ++h) {
    eta *= 0.5;
    const double gh = try_step(eta, dir);
    if (gh < out.g) {
      out.theta = dir;
      out.g = gh;
      out.moved = true;
      step = eta;
      return out;
    }
  }
  step = std::max(eta, 1e-6);
  return out;
}

AttackTrace sign_opt_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                            const AttackBudget& budget, const SignOptParams& params, SeededRng& rng,
                            Referee& referee) {
  params.validate();
  auto body = [&](QueryOracle& o, TraceRecorder& rec, InitResult init) {
    Vec theta = subtract(init.x.values(), x0.values());
    double g = l2_norm(theta);
    if (g == 0.0) return;
    theta = normalized(theta);
    double step = params.step;
    for (std::size_t t = 1;; ++t) {
      if (iteration_cap_hit(budget, t - 1)) {
        rec.set_status("iterations");
        return;
      }
      const Vec grad = sign_opt_gradient(o, x0, c0, theta, g, params.probes, params.probe_beta, rng);
      const SignOptStep s = sign_opt_line_search(o, x0, c0, theta, g, grad, step, params);
      if (s.moved) {
        theta = s.theta;
        g = s.g;
        rec.accept(t, along(x0, theta, g), g);
      }
    }
  };
  return run_decision_attack("sign_opt", oracle, x0, c0, budget, params.max_init_tries, rng, referee, body);
}

// ---------------------------------------------------------------------------

AttackTrace hsja_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                        const AttackBudget& budget, const HsjaParams& params, SeededRng& rng,
                        Referee& referee) {
  params.validate();
  auto body = [&](QueryOracle& o, TraceRecorder& rec, InitResult init) {
    const double d = static_cast<double>(x0.size());
    const double theta_bs = params.gamma / std::pow(d, 1.5);
    ImageTensor x = std::move(init.x);
    std::size_t x_label = init.label;
    double best = l2_distance(x.values(), x0.values());
    for (std::size_t t = 1;; ++t) {
      if (iteration_cap_hit(budget, t - 1)) {
        rec.set_status("iterations");
        return;
      }
      // (1) back to the boundary
      BoundaryPoint bp = binary_search_to_boundary(o, x0, c0, x, x_label, theta_bs);
      x = std::move(bp.point);
      x_label = bp.outside_label;
      const double dist = l2_distance(x.values(), x0.values());
      if (dist < best) {
        best = dist;
        rec.accept(t, x, dist);
      }
      if (dist == 0.0) return;
      // (2) normal estimate
      const double st = std::sqrt(static_cast<double>(t));
      const std::size_t probes = std::min<std::size_t>(
          params.max_probes, static_cast<std::size_t>(std::llround(static_cast<double>(params.initial_probes) * st)));
      // first iteration probes at a tenth of the pixel range
      const double radius = params.probe_radius ? *params.probe_radius
                            : t == 1            ? 0.1
                                                : std::sqrt(d) * theta_bs * dist;
      const NormalEstimate est = estimate_boundary_normal(o, x, c0, probes, radius, rng);
      if (l2_norm(est.direction) == 0.0) continue;
      const Vec v = normalized(est.direction);
      // (3) geometric step, halved until it stays adversarial
      double xi = dist / st;
      for (std::size_t h = 0; h <= params.max_step_halvings; ++h, xi *= 0.5) {
        ImageTensor cand = step_clipped(x, xi, v);
        const std::size_t label = o.decision_query(cand);
        if (label != c0) {
          x = std::move(cand);
          x_label = label;
          break;
        }
      }
    }
  };
  return run_decision_attack("hsja", oracle, x0, c0, budget, params.max_init_tries, rng, referee, body);
}

// ---------------------------------------------------------------------------

AttackTrace geoda_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                         const AttackBudget& budget, const GeodaParams& params, SeededRng& rng,
                         Referee& referee) {
  params.validate();
  auto body = [&](QueryOracle& o, TraceRecorder& rec, InitResult init) {
    const auto schedule = geometric_schedule(params.round_probes, params.sub_iterations, params.ratio);
    ImageTensor xb = std::move(init.x);  // current boundary point (observed adversarial)
    std::size_t xb_label = init.label;
    double best = l2_distance(xb.values(), x0.values());
    Vec normal_sum(x0.size(), 0.0);
    std::size_t t = 0;
    for (;;) {
      for (std::size_t n : schedule) {
        if (iteration_cap_hit(budget, t)) {
          rec.set_status("iterations");
          return;
        }
        ++t;
        const NormalEstimate est = estimate_boundary_normal(o, xb, c0, n, params.probe_radius, rng);
        if (est.degenerate()) {
          // boundary point mislocated: re-run the binary search from x0
          BoundaryPoint bp = binary_search_to_boundary(o, x0, c0, xb, xb_label, params.search_tol);
          xb = std::move(bp.point);
          xb_label = bp.outside_label;
          continue;
        }
        const double en = l2_norm(est.direction);
        if (en == 0.0) continue;
        normal_sum = add_scaled(normal_sum, 1.0 / en, est.direction);
        if (l2_norm(normal_sum) == 0.0) continue;
        const Vec w = normalized(normal_sum);
        LineSearchOptions opts;
        opts.search_cap = params.search_cap;
        opts.tolerance = params.search_tol * best;
        opts.guess = best;
        const double lambda = boundary_distance_along(o, x0, c0, w, opts);
        if (!std::isfinite(lambda)) continue;
        ImageTensor cand = along(x0, w, lambda);
        const double cd = l2_distance(cand.values(), x0.values());
        if (cd < best) {
          best = cd;
          xb = std::move(cand);
          xb_label = some_other_label(c0);  // only "differs from c0" is known
          rec.accept(t, xb, cd);
        }
      }
    }
  };
  return run_decision_attack("geoda", oracle, x0, c0, budget, params.max_init_tries, rng, referee, body);
}

}  // namespace snd
