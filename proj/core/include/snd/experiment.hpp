#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snd/attack_trace.hpp"
#include "snd/attacks_decision.hpp"
#include "snd/attacks_score.hpp"
#include "snd/analysis.hpp"
#include "snd/config.hpp"
#include "snd/dataset.hpp"
#include "snd/defense.hpp"
#include "snd/models.hpp"
#include "snd/training.hpp"

namespace snd {

inline const std::vector<std::string>& known_attacks() {
  static const std::vector<std::string> names = {"simba", "simba_dct", "bandit_td", "boundary",
                                                 "sign_opt", "hsja", "geoda"};
  return names;
}

bool is_decision_attack(const std::string& name);

struct AttackParams {
  SimbaParams simba;
  SimbaDctParams simba_dct;
  BanditParams bandit;
  BoundaryAttackParams boundary;
  SignOptParams sign_opt;
  HsjaParams hsja;
  GeodaParams geoda;
};

struct ExperimentConfig {
  DatasetSpec data;
  std::string data_path;   // load instead of generating when set
  std::string model_source = "train";  // train | load
  std::string model_path;
  std::vector<std::size_t> hidden = {32};
  SgdParams sgd;
  std::uint64_t train_seed = 7;
  std::size_t eval_images = 50;
  bool eval_defended_filter = false;
  std::vector<std::string> attacks = {"hsja"};
  AttackParams params;
  std::vector<DefenseSpec> defenses = {DefenseSpec::none()};
  std::vector<std::size_t> budgets = {2000, 5000, 10000};
  double epsilon = 2.0;
  std::size_t max_iterations = 0;
  std::vector<std::size_t> repeats = {1};  // adaptive T
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t master_seed = 0;
  std::size_t pmis_trials = 0;       // extra clean-point P_mis trials per cell, 0 = off
  std::size_t sigma_hat_trials = 100;
  bool write_query_logs = false;
  std::string hash;

  // Throws ConfigError for unknown keys or parameters that fail validation.
  static ExperimentConfig from(const Config& cfg);
  void validate() const;
  std::size_t max_budget() const;
  // Evaluation set: held-out draw of the generator (seed + 1).
  DatasetSpec eval_spec() const;
};

struct Cell {
  std::size_t index = 0;
  std::string attack;
  DefenseSpec defense;
  std::size_t T = 1;
  std::uint64_t seed = 0;
};

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg);

// Per-image outcome of one attack run.
struct RunOutcome {
  AttackTrace trace;
  std::vector<double> query_l2_at;  // ||x0 - x^q|| at each configured budget
  std::size_t pmis_mismatches = 0;
  std::size_t pmis_queries = 0;
  std::string error;  // non-empty when the run failed
};

struct CellResult {
  Cell cell;
  MetricReport report;
  std::vector<double> success_at;          // per budget, physical queries
  std::vector<double> success_at_logical;  // per budget, logical queries
  std::vector<double> query_l2_at;         // per budget
  std::string status = "ok";
  std::string reason;
  std::vector<RunOutcome> runs;
};

// One attack on one image through a fresh oracle. Errors other than
// BudgetExceeded are captured in RunOutcome::error.
RunOutcome run_single(const ExperimentConfig& cfg, const Classifier& model, const Cell& cell,
                      const ImageTensor& x0, std::size_t c0, std::size_t image_index,
                      std::string* query_log_csv = nullptr);

CellResult run_cell(const ExperimentConfig& cfg, const Classifier& model, const Cell& cell,
                    const std::vector<ImageTensor>& images, const std::vector<std::size_t>& labels,
                    std::vector<std::string>* query_logs = nullptr);

struct EvalSet {
  std::vector<ImageTensor> images;
  std::vector<std::size_t> labels;
};

// The first `n` evaluation images the (undefended) model classifies correctly.
EvalSet select_eval_set(const ExperimentConfig& cfg, const Classifier& model);

// Runs every cell with up to `jobs` worker threads. Results come back in
// cell order; parallelism never changes them.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg, const Classifier& model, const EvalSet& eval,
                                 std::size_t jobs, const std::string& out_dir = {});

std::string results_csv(const ExperimentConfig& cfg, const std::vector<CellResult>& results);
// "rate% (norm)" table, one row per cell, one column per budget.
std::string summary_table(const ExperimentConfig& cfg, const std::vector<CellResult>& results);
std::string cell_traces_json(const CellResult& result);

// Trains or loads the model the config names.
MlpModel obtain_model(const ExperimentConfig& cfg, const SyntheticDataset& train, TrainReport* report = nullptr);
SyntheticDataset obtain_dataset(const ExperimentConfig& cfg);

}  // namespace snd
