#include "snd/oracle.hpp"

#include <ostream>
#include <string>

#include "snd/errors.hpp"
#include "snd/format.hpp"

namespace snd {

void QueryLedger::require(std::size_t n) const {
  if (n > remaining()) {
    throw BudgetExceeded("query budget " + std::to_string(budget_) + " exhausted (" +
                         std::to_string(physical_) + " used, " + std::to_string(n) + " requested)");
  }
}

Oracle::Oracle(const Classifier& model, DefenseSpec defense, std::uint64_t defense_seed,
               std::size_t budget, Shape input_shape)
    : model_(model),
      defense_(defense),
      rng_(defense_seed),
      ledger_(budget),
      shape_(input_shape) {
  defense_.validate();
  if (defense_.model_shape(shape_).size() != model_.input_dim()) {
    throw DimensionError("defense output size " + std::to_string(defense_.model_shape(shape_).size()) +
                         " does not match model input " + std::to_string(model_.input_dim()));
  }
}

Oracle::Oracle(const Classifier& model, DefenseSpec defense, std::uint64_t defense_seed,
               std::size_t budget)
    : Oracle(model, defense, defense_seed, budget, Shape{model.input_dim(), 1, 1}) {}

Vec Oracle::physical_query(const ImageTensor& x, QueryKind kind) {
  if (x.size() != shape_.size()) {
    throw DimensionError("query has " + std::to_string(x.size()) + " values, oracle expects " +
                         std::to_string(shape_.size()));
  }
  ledger_.require(1);
  last_input_ = apply_defense(defense_, x, rng_, clip_after_noise_);
  Vec probs = model_.forward_probs(last_input_.values());
  ledger_.charge_physical();
  if (log_mode_ != LogMode::kOff) {
    QueryLogEntry e;
    e.index = ledger_.physical();
    e.kind = kind;
    if (reference_) e.l2_from_x0 = l2_distance(x.values(), *reference_);
    e.label = argmax(probs);
    e.top_prob = probs[e.label];
    if (log_mode_ == LogMode::kFull) e.input = x.vec();
    log_.push_back(std::move(e));
  }
  return probs;
}

Vec Oracle::score_query(const ImageTensor& x) {
  Vec p = physical_query(x, QueryKind::kScore);
  ledger_.charge_logical();
  return p;
}

std::size_t Oracle::decision_query(const ImageTensor& x) {
  const std::size_t label = argmax(physical_query(x, QueryKind::kDecision));
  ledger_.charge_logical();
  return label;
}

void Oracle::write_log_csv(std::ostream& out) const {
  out << "query_index,kind,l2_from_x0,output_label_or_top_prob\n";
  for (const auto& e : log_) {
    out << e.index << ',' << (e.kind == QueryKind::kScore ? "score" : "decision") << ','
        << format_double(e.l2_from_x0) << ',';
    if (e.kind == QueryKind::kScore) {
      out << format_double(e.top_prob);
    } else {
      out << e.label;
    }
    out << '\n';
  }
}

}  // namespace snd
