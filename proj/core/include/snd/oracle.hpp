#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "snd/defense.hpp"
#include "snd/models.hpp"
#include "snd/rng.hpp"
#include "snd/tensor.hpp"

namespace snd {

// Query accounting. `physical` counts model evaluations and is the quantity
// bounded by `budget`; `logical` counts attacker-level queries (equal to
// physical unless an adaptive wrapper repeats queries).
class QueryLedger {
 public:
  explicit QueryLedger(std::size_t budget) : budget_(budget) {}

  std::size_t budget() const { return budget_; }
  std::size_t physical() const { return physical_; }
  std::size_t logical() const { return logical_; }
  std::size_t remaining() const { return budget_ - physical_; }

  // Throws BudgetExceeded unless n more physical queries fit.
  void require(std::size_t n) const;
  void charge_physical() { ++physical_; }
  void charge_logical() { ++logical_; }

 private:
  std::size_t budget_;
  std::size_t physical_ = 0;
  std::size_t logical_ = 0;
};

enum class QueryKind { kScore, kDecision };

struct QueryLogEntry {
  std::size_t index = 0;  // physical query number, 1-based
  QueryKind kind = QueryKind::kScore;
  double l2_from_x0 = std::numeric_limits<double>::quiet_NaN();
  std::size_t label = 0;   // defended top-1 label
  double top_prob = 0.0;   // defended top-1 probability
  Vec input;               // attacker-side input; kept only in LogMode::kFull
};

enum class LogMode { kOff, kSummary, kFull };

// Attacker-facing endpoint. Attacks only see this interface.
class QueryOracle {
 public:
  virtual ~QueryOracle() = default;

  virtual Vec score_query(const ImageTensor& x) = 0;
  virtual std::size_t decision_query(const ImageTensor& x) = 0;

  virtual const QueryLedger& ledger() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual const Shape& input_shape() const = 0;
  // Physical queries one logical query costs.
  virtual std::size_t cost_per_query() const { return 1; }

  // Undefended base model, used by the referee to judge success. Attacks
  // never consult it to make decisions.
  virtual const Classifier& criterion_model() const = 0;
  virtual const DefenseSpec& defense() const = 0;
};

// A model behind a defense transform with a query ledger. The model must
// outlive the oracle. Defense randomness comes from the oracle's own stream.
class Oracle final : public QueryOracle {
 public:
  Oracle(const Classifier& model, DefenseSpec defense, std::uint64_t defense_seed,
         std::size_t budget, Shape input_shape);
  // Flat (non-image) inputs of the model's dimension.
  Oracle(const Classifier& model, DefenseSpec defense, std::uint64_t defense_seed, std::size_t budget);

  Vec score_query(const ImageTensor& x) override;
  std::size_t decision_query(const ImageTensor& x) override;

  // One model evaluation charged to the physical counter only; the
  // building block of adaptive wrappers.
  Vec physical_query(const ImageTensor& x, QueryKind kind);

  const QueryLedger& ledger() const override { return ledger_; }
  QueryLedger& mutable_ledger() { return ledger_; }
  std::size_t num_classes() const override { return model_.num_classes(); }
  const Shape& input_shape() const override { return shape_; }
  const Classifier& criterion_model() const override { return model_; }
  const DefenseSpec& defense() const override { return defense_; }

  // Default on. When off, noisy inputs may leave [0, 1].
  void set_clip_after_noise(bool on) { clip_after_noise_ = on; }
  bool clip_after_noise() const { return clip_after_noise_; }

  void set_log_mode(LogMode mode) { log_mode_ = mode; }
  // Reference image for the l2_from_x0 log column.
  void set_reference(const ImageTensor& x0) { reference_ = x0.vec(); }
  const std::vector<QueryLogEntry>& log() const { return log_; }
  // CSV: query_index,kind,l2_from_x0,output_label_or_top_prob
  void write_log_csv(std::ostream& out) const;

  // Model input of the most recent query (after the defense transform).
  const ImageTensor& last_model_input() const { return last_input_; }

 private:
  const Classifier& model_;
  DefenseSpec defense_;
  SeededRng rng_;
  QueryLedger ledger_;
  Shape shape_;
  bool clip_after_noise_ = true;
  LogMode log_mode_ = LogMode::kOff;
  std::optional<Vec> reference_;
  std::vector<QueryLogEntry> log_;
  ImageTensor last_input_;
};

}  // namespace snd
