#include "snd/attacks_score.hpp"

#include <cmath>

#include "snd/capped_oracle.hpp"
#include "snd/dct.hpp"
#include "snd/errors.hpp"
#include "snd/models.hpp"

namespace snd {

void SimbaParams::validate() const {
  if (!(step_size > 0.0)) throw ParameterError("SimBA step_size must be > 0");
}

void SimbaDctParams::validate(const Shape& shape) const {
  if (!(step_size > 0.0)) throw ParameterError("SimBA-DCT step_size must be > 0");
  if (freq_dims == 0 || freq_dims > std::min(shape.width, shape.height)) {
    throw ParameterError("SimBA-DCT freq_dims must be in [1, image side]");
  }
  if (stride == 0) throw ParameterError("SimBA-DCT stride must be > 0");
}

void BanditParams::validate() const {
  if (!(exploration > 0.0) || !(fd_eta > 0.0) || !(prior_lr > 0.0) || !(image_lr > 0.0)) {
    throw ParameterError("Bandit-TD step parameters must be > 0");
  }
  if (tile == 0) throw ParameterError("Bandit-TD tile must be > 0");
}

namespace {

bool iteration_cap_hit(const AttackBudget& budget, std::size_t t) {
  return budget.max_iterations != 0 && t >= budget.max_iterations;
}

// Shared SimBA loop over a direction generator. next_direction(pass, i)
// returns the i-th direction of a pass, pass_length directions per pass.
template <typename DirectionFn>
AttackTrace simba_loop(const char* name, QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                       const AttackBudget& budget, double step, std::size_t pass_length,
                       DirectionFn&& next_direction, Referee& referee) {
  budget.validate();
  CappedOracle o(oracle, budget.queries);
  TraceRecorder rec(name, oracle, referee, x0, c0, budget);
  try {
    Vec probs = o.score_query(x0);
    double y = probs[c0];
    rec.accept(0, x0, y);
    if (argmax(probs) != c0) {
      rec.declare_success();
      return rec.finish();
    }
    ImageTensor x = x0;
    std::size_t t = 0;
    for (std::size_t pass = 0;; ++pass) {
      for (std::size_t i = 0; i < pass_length; ++i) {
        if (iteration_cap_hit(budget, t)) {
          rec.set_status("iterations");
          return rec.finish();
        }
        ++t;
        const ImageTensor& dir = next_direction(pass, i);
        for (double sign : {1.0, -1.0}) {
          ImageTensor cand = step_clipped(x, sign * step, dir.values());
          probs = o.score_query(cand);
          if (probs[c0] < y) {
            x = std::move(cand);
            y = probs[c0];
            rec.accept(t, x, y);
            if (argmax(probs) != c0) {
              rec.declare_success();
              return rec.finish();
            }
            break;
          }
        }
      }
    }
  } catch (const BudgetExceeded& e) {
    rec.set_status("budget", e.what());
  }
  return rec.finish();
}

}  // namespace

AttackTrace simba_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                         const AttackBudget& budget, const SimbaParams& params, SeededRng& rng,
                         Referee& referee) {
  params.validate();
  const std::size_t d = x0.size();
  std::vector<std::size_t> order;
  std::size_t order_pass = static_cast<std::size_t>(-1);
  ImageTensor dir(x0.shape(), 0.0);
  std::size_t last = 0;
  auto next = [&](std::size_t pass, std::size_t i) -> const ImageTensor& {
    if (pass != order_pass) {
      order = random_permutation(rng, d);
      order_pass = pass;
    }
    dir[last] = 0.0;
    last = order[i];
    dir[last] = 1.0;
    return dir;
  };
  return simba_loop("simba", oracle, x0, c0, budget, params.step_size, d, next, referee);
}

std::vector<ImageTensor> simba_dct_directions(const Shape& shape, const SimbaDctParams& params) {
  params.validate(shape);
  std::vector<ImageTensor> dirs;
  for (const auto& coef : strided_order(params.freq_dims, params.stride)) {
    for (std::size_t c = 0; c < shape.channels; ++c) {
      dirs.push_back(dct_basis_image(shape, coef.row, coef.col, c));
    }
  }
  return dirs;
}

AttackTrace simba_dct_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                             const AttackBudget& budget, const SimbaDctParams& params,
                             Referee& referee) {
  const auto dirs = simba_dct_directions(x0.shape(), params);
  auto next = [&](std::size_t, std::size_t i) -> const ImageTensor& { return dirs[i]; };
  return simba_loop("simba_dct", oracle, x0, c0, budget, params.step_size, dirs.size(), next, referee);
}

// ---------------------------------------------------------------------------

Shape bandit_grid(const Shape& image, std::size_t tile) {
  if (tile == 0) throw ParameterError("tile must be > 0");
  return {(image.width + tile - 1) / tile, (image.height + tile - 1) / tile, image.channels};
}

Vec upsample_prior(std::span<const double> prior, const Shape& grid, const Shape& image, std::size_t tile) {
  if (prior.size() != grid.size()) throw DimensionError("prior does not match its grid");
  Vec out(image.size());
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < image.channels; ++c) {
        out[image.index(x, y, c)] = prior[grid.index(x / tile, y / tile, c)];
      }
    }
  }
  return out;
}

namespace {

// v + lr * g/|g|, pulled back into the unit ball.
void prior_step(Vec& prior, std::span<const double> g, double lr) {
  const double n = l2_norm(g);
  if (n == 0.0) return;
  for (std::size_t i = 0; i < prior.size(); ++i) prior[i] += lr * g[i] / n;
  const double pn = l2_norm(prior);
  if (pn > 1.0) scale_in_place(prior, 1.0 / pn);
}

ImageTensor probe_point(const ImageTensor& x, std::span<const double> dir, double eta) {
  const double n = l2_norm(dir);
  if (n == 0.0) return x;
  return step_clipped(x, eta / n, dir);
}

}  // namespace

BanditProbes bandit_prior_update(QueryOracle& oracle, const ImageTensor& x, const LossForm& form,
                                 Vec& prior, const Shape& grid, const BanditParams& params,
                                 SeededRng& rng) {
  const double scale = params.exploration / std::sqrt(static_cast<double>(grid.size()));
  Vec noise = sample_gaussian(rng, grid.size(), 1.0);
  scale_in_place(noise, scale);
  const Vec q1 = upsample_prior(add_scaled(prior, 1.0, noise), grid, x.shape(), params.tile);
  const Vec q2 = upsample_prior(add_scaled(prior, -1.0, noise), grid, x.shape(), params.tile);
  const Vec p1 = oracle.score_query(probe_point(x, q1, params.fd_eta));
  const Vec p2 = oracle.score_query(probe_point(x, q2, params.fd_eta));
  BanditProbes out{argmax(p1), argmax(p2), adversary_loss(p1, form), adversary_loss(p2, form)};
  const double deriv = (out.loss_plus - out.loss_minus) / (params.fd_eta * params.exploration);
  scale_in_place(noise, deriv);
  prior_step(prior, noise, params.prior_lr);
  return out;
}

AttackTrace bandit_td_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                             const AttackBudget& budget, const BanditParams& params, SeededRng& rng,
                             Referee& referee) {
  params.validate();
  budget.validate();
  CappedOracle o(oracle, budget.queries);
  TraceRecorder rec("bandit_td", oracle, referee, x0, c0, budget);
  const LossForm form = LossForm::untargeted(c0);
  const Shape grid = bandit_grid(x0.shape(), params.tile);
  try {
    const Vec probs = o.score_query(x0);
    rec.accept(0, x0, adversary_loss(probs, form));
    if (argmax(probs) != c0) {
      rec.declare_success();
      return rec.finish();
    }
    Vec prior(grid.size(), 0.0);
    ImageTensor x = x0;
    for (std::size_t t = 1;; ++t) {
      if (iteration_cap_hit(budget, t - 1)) {
        rec.set_status("iterations");
        break;
      }
      const BanditProbes probes = bandit_prior_update(o, x, form, prior, grid, params, rng);
      if (probes.label_plus != c0 || probes.label_minus != c0) {
        rec.declare_success();
        break;
      }
      const Vec g = upsample_prior(prior, grid, x0.shape(), params.tile);
      const double gn = l2_norm(g);
      if (gn == 0.0) continue;
      Vec delta = add_scaled(subtract(x.values(), x0.values()), -params.image_lr / gn, g);
      const double dn = l2_norm(delta);
      if (dn > budget.epsilon) scale_in_place(delta, budget.epsilon / dn);
      Vec next = add_scaled(x0.values(), 1.0, delta);
      clip01_in_place(next);
      x = ImageTensor(x0.shape(), std::move(next));
      rec.accept(t, x, 0.5 * (probes.loss_plus + probes.loss_minus));
    }
  } catch (const BudgetExceeded& e) {
    rec.set_status("budget", e.what());
  }
  return rec.finish();
}

}  // namespace snd
