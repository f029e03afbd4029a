#include "snd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "snd/adaptive.hpp"
#include "snd/errors.hpp"
#include "snd/format.hpp"
#include "snd/model_io.hpp"

namespace snd {

bool is_decision_attack(const std::string& name) {
  return name == "boundary" || name == "sign_opt" || name == "hsja" || name == "geoda";
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "data.width", "data.height", "data.channels", "data.classes", "data.per_class", "data.blob_sigma",
      "data.amplitude", "data.background", "data.pixel_noise", "data.seed", "data.path",
      "model.source", "model.path", "model.hidden",
      "train.lr", "train.epochs", "train.batch", "train.seed",
      "eval.images", "eval.filter",
      "attacks", "defenses",
      "budget.queries", "budget.epsilon", "budget.max_iterations",
      "adaptive.T", "seeds", "seed",
      "analysis.pmis_trials", "analysis.sigma_hat_trials", "log.queries",
      "simba.step", "simba_dct.step", "simba_dct.freq_dims", "simba_dct.stride",
      "bandit.exploration", "bandit.fd_eta", "bandit.prior_lr", "bandit.image_lr", "bandit.tile",
      "boundary.orthogonal_step", "boundary.source_step", "boundary.window",
      "sign_opt.probes", "sign_opt.beta", "sign_opt.step",
      "hsja.initial_probes", "hsja.max_probes", "hsja.gamma", "hsja.probe_radius",
      "geoda.probe_radius", "geoda.sub_iterations", "geoda.round_probes", "geoda.ratio", "geoda.search_tol",
  };
  return keys;
}

template <typename T>
std::vector<std::size_t> to_sizes(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const Config& c) {
  for (const auto& [k, v] : c.values()) {
    if (!known_keys().count(k)) throw ConfigError("unknown key '" + k + "'");
  }
  ExperimentConfig e;
  e.data.width = c.get_uint("data.width", e.data.width);
  e.data.height = c.get_uint("data.height", e.data.height);
  e.data.channels = c.get_uint("data.channels", e.data.channels);
  e.data.num_classes = c.get_uint("data.classes", e.data.num_classes);
  e.data.samples_per_class = c.get_uint("data.per_class", e.data.samples_per_class);
  e.data.blob_sigma = c.get_double("data.blob_sigma", e.data.blob_sigma);
  e.data.amplitude = c.get_double("data.amplitude", e.data.amplitude);
  e.data.background = c.get_double("data.background", e.data.background);
  e.data.pixel_noise = c.get_double("data.pixel_noise", e.data.pixel_noise);
  e.data.seed = c.get_uint("data.seed", e.data.seed);
  e.data_path = c.get_string("data.path", "");

  e.model_source = c.get_string("model.source", e.model_source);
  e.model_path = c.get_string("model.path", "");
  e.hidden = to_sizes(c.get_uint_list("model.hidden", {32}));
  e.sgd.learning_rate = c.get_double("train.lr", e.sgd.learning_rate);
  e.sgd.epochs = c.get_uint("train.epochs", e.sgd.epochs);
  e.sgd.batch_size = c.get_uint("train.batch", e.sgd.batch_size);
  e.train_seed = c.get_uint("train.seed", e.train_seed);

  e.eval_images = c.get_uint("eval.images", e.eval_images);
  const std::string filter = c.get_string("eval.filter", "undefended");
  if (filter != "undefended" && filter != "defended") throw ConfigError("eval.filter must be undefended|defended");
  e.eval_defended_filter = filter == "defended";

  if (c.has("attacks")) e.attacks = c.get_list("attacks");
  for (const auto& a : e.attacks) {
    if (std::find(known_attacks().begin(), known_attacks().end(), a) == known_attacks().end()) {
      throw ConfigError("unknown attack '" + a + "'");
    }
  }
  e.defenses.clear();
  for (const auto& d : c.get_list("defenses", ';')) {
    try {
      e.defenses.push_back(DefenseSpec::parse(d));
    } catch (const Error& err) {
      throw ConfigError(std::string("defenses: ") + err.what());
    }
  }
  if (e.defenses.empty()) e.defenses = {DefenseSpec::none()};

  e.budgets = to_sizes(c.get_uint_list("budget.queries", {2000, 5000, 10000}));
  std::sort(e.budgets.begin(), e.budgets.end());
  e.budgets.erase(std::unique(e.budgets.begin(), e.budgets.end()), e.budgets.end());
  e.epsilon = c.get_double("budget.epsilon", e.epsilon);
  e.max_iterations = c.get_uint("budget.max_iterations", 0);
  e.repeats = to_sizes(c.get_uint_list("adaptive.T", {1}));
  e.seeds = c.get_uint_list("seeds", {1});
  e.master_seed = c.get_uint("seed", 0);
  e.pmis_trials = c.get_uint("analysis.pmis_trials", e.pmis_trials);
  e.sigma_hat_trials = c.get_uint("analysis.sigma_hat_trials", e.sigma_hat_trials);
  e.write_query_logs = c.get_bool("log.queries", false);

  auto& p = e.params;
  p.simba.step_size = c.get_double("simba.step", p.simba.step_size);
  p.simba_dct.step_size = c.get_double("simba_dct.step", p.simba_dct.step_size);
  p.simba_dct.freq_dims = c.get_uint("simba_dct.freq_dims", p.simba_dct.freq_dims);
  p.simba_dct.stride = c.get_uint("simba_dct.stride", p.simba_dct.stride);
  p.bandit.exploration = c.get_double("bandit.exploration", p.bandit.exploration);
  p.bandit.fd_eta = c.get_double("bandit.fd_eta", p.bandit.fd_eta);
  p.bandit.prior_lr = c.get_double("bandit.prior_lr", p.bandit.prior_lr);
  p.bandit.image_lr = c.get_double("bandit.image_lr", p.bandit.image_lr);
  p.bandit.tile = c.get_uint("bandit.tile", p.bandit.tile);
  p.boundary.orthogonal_step = c.get_double("boundary.orthogonal_step", p.boundary.orthogonal_step);
  p.boundary.source_step = c.get_double("boundary.source_step", p.boundary.source_step);
  p.boundary.window = c.get_uint("boundary.window", p.boundary.window);
  p.sign_opt.probes = c.get_uint("sign_opt.probes", p.sign_opt.probes);
  p.sign_opt.probe_beta = c.get_double("sign_opt.beta", p.sign_opt.probe_beta);
  p.sign_opt.step = c.get_double("sign_opt.step", p.sign_opt.step);
  p.hsja.initial_probes = c.get_uint("hsja.initial_probes", p.hsja.initial_probes);
  p.hsja.max_probes = c.get_uint("hsja.max_probes", p.hsja.max_probes);
  p.hsja.gamma = c.get_double("hsja.gamma", p.hsja.gamma);
  if (c.has("hsja.probe_radius")) p.hsja.probe_radius = c.get_double("hsja.probe_radius", 0.0);
  p.geoda.probe_radius = c.get_double("geoda.probe_radius", p.geoda.probe_radius);
  p.geoda.sub_iterations = c.get_uint("geoda.sub_iterations", p.geoda.sub_iterations);
  p.geoda.round_probes = c.get_uint("geoda.round_probes", p.geoda.round_probes);
  p.geoda.ratio = c.get_double("geoda.ratio", p.geoda.ratio);
  p.geoda.search_tol = c.get_double("geoda.search_tol", p.geoda.search_tol);

  e.hash = c.hash();
  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  try {
    data.validate();
    if (model_source != "train" && model_source != "load") throw ConfigError("model.source must be train|load");
    if (model_source == "load" && model_path.empty()) throw ConfigError("model.source = load needs model.path");
    if (eval_images == 0) throw ConfigError("eval.images must be >= 1");
    if (attacks.empty()) throw ConfigError("attacks must name at least one attack");
    if (budgets.empty() || budgets.front() == 0) throw ConfigError("budget.queries must be positive");
    if (repeats.empty() || std::find(repeats.begin(), repeats.end(), 0) != repeats.end()) {
      throw ConfigError("adaptive.T entries must be >= 1");
    }
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (sigma_hat_trials == 1) throw ConfigError("analysis.sigma_hat_trials must be 0 or >= 2");
    AttackBudget{max_budget(), epsilon, max_iterations}.validate();
    for (const auto& d : defenses) d.validate();
    params.simba.validate();
    params.simba_dct.validate(data.shape());
    params.bandit.validate();
    params.boundary.validate();
    params.sign_opt.validate();
    params.hsja.validate();
    params.geoda.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::size_t ExperimentConfig::max_budget() const { return budgets.back(); }

DatasetSpec ExperimentConfig::eval_spec() const {
  DatasetSpec s = data;
  s.seed = data.seed + 1;
  return s;
}

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (const auto& a : cfg.attacks) {
    for (const auto& d : cfg.defenses) {
      for (std::size_t T : cfg.repeats) {
        for (std::uint64_t s : cfg.seeds) cells.push_back({cells.size(), a, d, T, s});
      }
    }
  }
  return cells;
}

namespace {

// Streams: the attacker's depends only on (master, seed, image) so cells that
// differ in defense or T replay the same attacker randomness.
std::uint64_t attack_stream(const ExperimentConfig& cfg, const Cell& cell, std::size_t image) {
  return SeededRng::derive(SeededRng::derive(cfg.master_seed, cell.seed).next_u64(), image).next_u64();
}

std::uint64_t defense_stream(const ExperimentConfig& cfg, const Cell& cell, std::size_t image) {
  return SeededRng::derive(SeededRng::derive(cfg.master_seed ^ 0x5eedULL, cell.index).next_u64(), image).next_u64();
}

AttackTrace dispatch(const ExperimentConfig& cfg, const std::string& attack, QueryOracle& o, const ImageTensor& x0,
                     std::size_t c0, const AttackBudget& budget, SeededRng& rng, Referee& referee) {
  const auto& p = cfg.params;
  if (attack == "simba") return simba_attack(o, x0, c0, budget, p.simba, rng, referee);
  if (attack == "simba_dct") return simba_dct_attack(o, x0, c0, budget, p.simba_dct, referee);
  if (attack == "bandit_td") return bandit_td_attack(o, x0, c0, budget, p.bandit, rng, referee);
  if (attack == "boundary") return boundary_attack(o, x0, c0, budget, p.boundary, rng, referee);
  if (attack == "sign_opt") return sign_opt_attack(o, x0, c0, budget, p.sign_opt, rng, referee);
  if (attack == "hsja") return hsja_attack(o, x0, c0, budget, p.hsja, rng, referee);
  if (attack == "geoda") return geoda_attack(o, x0, c0, budget, p.geoda, rng, referee);
  throw ParameterError("unknown attack '" + attack + "'");
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

RunOutcome run_single(const ExperimentConfig& cfg, const Classifier& model, const Cell& cell, const ImageTensor& x0,
                      std::size_t c0, std::size_t image_index, std::string* query_log_csv) {
  RunOutcome out;
  try {
    // the attacker sees max(Q) logical queries; T repeats each one physically
    const AttackBudget budget{cfg.max_budget(), cfg.epsilon, cfg.max_iterations};
    Oracle oracle(model, cell.defense, defense_stream(cfg, cell, image_index), budget.queries * cell.T, x0.shape());
    oracle.set_reference(x0);
    oracle.set_log_mode(LogMode::kFull);
    SeededRng rng(attack_stream(cfg, cell, image_index));
    Referee referee(model);
    if (cell.T == 1) {
      out.trace = dispatch(cfg, cell.attack, oracle, x0, c0, budget, rng, referee);
    } else {
      AdaptiveOracle adaptive(oracle, cell.T);
      out.trace = dispatch(cfg, cell.attack, adaptive, x0, c0, budget, rng, referee);
    }
    out.trace.repeat = cell.T;
    const auto& log = oracle.log();
    for (std::size_t q : cfg.budgets) {
      out.query_l2_at.push_back(log.empty() ? 0.0 : mean_query_perturbation_norm(log, x0.values(), q));
    }
    for (const auto& e : log) {
      ++out.pmis_queries;
      if (model.predict_label(e.input) != e.label) ++out.pmis_mismatches;
    }
    if (query_log_csv) {
      std::string& s = *query_log_csv;
      for (const auto& e : log) {
        s += std::to_string(image_index) + ',' + std::to_string(e.index) + ',' + std::to_string(e.label);
        for (double v : e.input) s += ',' + format_double(v);
        s += '\n';
      }
    }
  } catch (const Error& e) {
    out.error = e.what();
    out.trace.status = "error";
    out.trace.reason = e.what();
    out.query_l2_at.assign(cfg.budgets.size(), 0.0);
  }
  return out;
}

CellResult run_cell(const ExperimentConfig& cfg, const Classifier& model, const Cell& cell,
                    const std::vector<ImageTensor>& images, const std::vector<std::size_t>& labels,
                    std::vector<std::string>* query_logs) {
  CellResult r;
  r.cell = cell;
  std::string log_text;
  for (std::size_t i = 0; i < images.size(); ++i) {
    r.runs.push_back(run_single(cfg, model, cell, images[i], labels[i], i, query_logs ? &log_text : nullptr));
  }
  if (query_logs) query_logs->push_back(std::move(log_text));

  MetricReport& m = r.report;
  m.attack = cell.attack;
  m.defense = cell.defense.label();
  m.sigma = cell.defense.noise_sigma();
  m.T = cell.T;
  m.seed = cell.seed;
  m.n_images = images.size();
  std::vector<double> finals;
  std::size_t mism = 0;
  std::size_t total = 0;
  for (const auto& run : r.runs) {
    if (!run.error.empty()) {
      r.status = "failed";
      if (r.reason.empty()) r.reason = run.error;
    } else if (run.trace.status == "init_failure") {
      // the attack never started; counts as a failed run
      r.status = "failed";
      if (r.reason.empty()) r.reason = run.trace.reason;
    }
    finals.push_back(run.trace.final_l2);
    mism += run.pmis_mismatches;
    total += run.pmis_queries;
  }
  for (std::size_t k = 0; k < cfg.budgets.size(); ++k) {
    std::size_t ok = 0;
    std::size_t ok_logical = 0;
    std::vector<double> ql2;
    for (const auto& run : r.runs) {
      if (run.trace.success_at(cfg.epsilon, cfg.budgets[k], true)) ++ok;
      if (run.trace.success_at(cfg.epsilon, cfg.budgets[k], false)) ++ok_logical;
      ql2.push_back(run.query_l2_at[k]);
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, r.runs.size()));
    r.success_at.push_back(100.0 * static_cast<double>(ok) / n);
    r.success_at_logical.push_back(100.0 * static_cast<double>(ok_logical) / n);
    r.query_l2_at.push_back(mean(ql2));
  }
  m.success_rate = r.success_at.empty() ? 0.0 : r.success_at.back();
  m.mean_final_l2 = mean(finals);
  m.mean_query_l2 = r.query_l2_at.empty() ? 0.0 : r.query_l2_at.back();
  m.pmis = total == 0 ? 0.0 : static_cast<double>(mism) / static_cast<double>(total);
  m.pmis_samples = total;
  if (cfg.sigma_hat_trials >= 2 && !images.empty()) {
    try {
      SeededRng rng = SeededRng::derive(cfg.master_seed ^ 0xa11ULL, cell.index);
      m.sigma_hat = estimate_sigma_hat(model, cell.defense, images, labels, cfg.sigma_hat_trials, rng);
      m.sigma_hat_samples = images.size() * cfg.sigma_hat_trials;
    } catch (const Error& e) {
      r.status = "failed";
      if (r.reason.empty()) r.reason = e.what();
    }
  }
  return r;
}

SyntheticDataset obtain_dataset(const ExperimentConfig& cfg) {
  if (!cfg.data_path.empty()) return load_dataset(cfg.data_path);
  return generate_dataset(cfg.data);
}

MlpModel obtain_model(const ExperimentConfig& cfg, const SyntheticDataset& train, TrainReport* report) {
  if (cfg.model_source == "load") {
    MlpModel m = load_model(cfg.model_path);
    if (report) report->train_accuracy = accuracy(m, train);
    return m;
  }
  return train_mlp(train, cfg.hidden, cfg.sgd, cfg.train_seed, report);
}

EvalSet select_eval_set(const ExperimentConfig& cfg, const Classifier& model) {
  const SyntheticDataset pool = generate_dataset(cfg.eval_spec());
  EvalSet out;
  SeededRng filter_rng = SeededRng::derive(cfg.master_seed ^ 0xf17eULL, 0);
  for (std::size_t i = 0; i < pool.size() && out.images.size() < cfg.eval_images; ++i) {
    const auto& x = pool.images[i];
    std::size_t label = model.predict_label(x.values());
    if (cfg.eval_defended_filter && !cfg.defenses.empty()) {
      // defended filter: every configured defense must agree on one draw
      for (const auto& d : cfg.defenses) {
        if (model.predict_label(apply_defense(d, x, filter_rng).values()) != pool.labels[i]) label = pool.num_classes;
      }
    }
    if (label == pool.labels[i]) {
      out.images.push_back(x);
      out.labels.push_back(label);
    }
  }
  if (out.images.empty()) throw Error("no correctly classified evaluation image");
  return out;
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg, const Classifier& model, const EvalSet& eval,
                                 std::size_t jobs, const std::string& out_dir) {
  const auto cells = enumerate_cells(cfg);
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      std::vector<std::string> logs;
      results[i] = run_cell(cfg, model, cells[i], eval.images, eval.labels, cfg.write_query_logs ? &logs : nullptr);
      if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(fs::path(out_dir) / "traces");
        std::ofstream(fs::path(out_dir) / "traces" / ("cell_" + std::to_string(i) + ".json")) << cell_traces_json(results[i]);
        if (cfg.write_query_logs) {
          fs::create_directories(fs::path(out_dir) / "queries");
          std::ofstream(fs::path(out_dir) / "queries" / ("cell_" + std::to_string(i) + ".csv"))
              << "# defense=" << cells[i].defense.label() << "\nimage,query_index,defended_label,input...\n"
              << logs.front();
        }
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::string results_csv(const ExperimentConfig& cfg, const std::vector<CellResult>& results) {
  std::string s = MetricReport::csv_header() + ",status";
  for (std::size_t q : cfg.budgets) s += ",sr_q" + std::to_string(q);
  for (std::size_t q : cfg.budgets) s += ",srl_q" + std::to_string(q);
  for (std::size_t q : cfg.budgets) s += ",ql2_q" + std::to_string(q);
  s += '\n';
  for (const auto& r : results) {
    s += r.report.csv_row() + ',' + r.status;
    for (double v : r.success_at) s += ',' + format_double(v);
    for (double v : r.success_at_logical) s += ',' + format_double(v);
    for (double v : r.query_l2_at) s += ',' + format_double(v);
    s += '\n';
  }
  return s;
}

std::string summary_table(const ExperimentConfig& cfg, const std::vector<CellResult>& results) {
  auto budget_label = [](std::size_t q) {
    return q % 1000 == 0 ? std::to_string(q / 1000) + "K" : std::to_string(q);
  };
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head = {"attack", "defense", "T", "seed"};
  for (std::size_t q : cfg.budgets) head.push_back(budget_label(q));
  rows.push_back(head);
  for (const auto& r : results) {
    std::vector<std::string> row = {r.cell.attack, r.report.defense, std::to_string(r.cell.T),
                                    std::to_string(r.cell.seed)};
    for (std::size_t k = 0; k < cfg.budgets.size(); ++k) {
      row.push_back(format_fixed(r.success_at[k], 1) + "% (" + format_fixed(r.query_l2_at[k], 2) + ")");
    }
    if (r.status != "ok") row.back() += " [" + r.status + "]";
    rows.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + (c + 1 < row.size() ? 2 : 0), ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string cell_traces_json(const CellResult& result) {
  std::string s = "{\"attack\":\"" + result.cell.attack + "\",\"defense\":\"" + result.cell.defense.label() +
                  "\",\"T\":" + std::to_string(result.cell.T) + ",\"seed\":" + std::to_string(result.cell.seed) +
                  ",\"status\":\"" + result.status + "\",\"traces\":[";
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    if (i) s += ',';
    s += result.runs[i].trace.to_json(true);
  }
  return s + "]}\n";
}

}  // namespace snd
