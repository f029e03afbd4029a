#include "snd/attack_trace.hpp"

#include <json.hpp>

#include "snd/errors.hpp"

namespace snd {

void AttackBudget::validate() const {
  if (queries < 1) throw ParameterError("query budget must be >= 1");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
}

bool AttackTrace::success_at(double eps, std::size_t query_budget, bool physical) const {
  for (const auto& s : steps) {
    const std::size_t q = physical ? s.q_physical : s.q;
    if (q <= query_budget && s.base_adversarial && s.l2 <= eps) return true;
  }
  return false;
}

std::string AttackTrace::to_json(bool include_final_x) const {
  nlohmann::ordered_json j;
  j["attack"] = attack;
  j["true_label"] = true_label;
  j["epsilon"] = epsilon;
  j["budget"] = budget;
  j["repeat"] = repeat;
  j["status"] = status;
  if (!reason.empty()) j["reason"] = reason;
  j["success"] = success;
  j["declared_success"] = declared_success;
  j["queries_used"] = queries_used;
  j["logical_queries"] = logical_queries;
  j["final_l2"] = final_l2;
  auto& arr = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    arr.push_back({{"t", s.t},
                   {"q", s.q},
                   {"q_physical", s.q_physical},
                   {"l2", s.l2},
                   {"value", s.value},
                   {"base_adversarial", s.base_adversarial}});
  }
  if (include_final_x) j["final_x"] = final_x.vec();
  return j.dump();
}

Referee::Referee(const Classifier& model) : model_(model), rng_(0) {}

Referee::Referee(const Classifier& model, DefenseSpec defense, std::uint64_t seed, std::size_t votes)
    : model_(model), mode_(Mode::kDefendedVote), defense_(defense), rng_(seed), votes_(votes) {
  if (votes_ == 0) throw ParameterError("referee needs at least one vote");
}

std::size_t Referee::label(const ImageTensor& x) {
  if (mode_ == Mode::kUndefended) return model_.predict_label(clip01(x));
  std::vector<std::size_t> counts(model_.num_classes(), 0);
  for (std::size_t v = 0; v < votes_; ++v) {
    ++counts[model_.predict_label(apply_defense(defense_, x, rng_))];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

TraceRecorder::TraceRecorder(std::string attack, const QueryOracle& oracle, Referee& referee,
                             const ImageTensor& x0, std::size_t true_label, const AttackBudget& budget)
    : oracle_(oracle), referee_(referee), x0_(x0), current_(x0) {
  trace_.attack = std::move(attack);
  trace_.true_label = true_label;
  trace_.epsilon = budget.epsilon;
  trace_.budget = budget.queries;
  trace_.repeat = oracle.cost_per_query();
}

void TraceRecorder::accept(std::size_t t, const ImageTensor& x, double value) {
  StepRecord s;
  s.t = t;
  s.q = oracle_.ledger().logical();
  s.q_physical = oracle_.ledger().physical();
  s.l2 = l2_distance(x.values(), x0_.values());
  s.value = value;
  s.base_adversarial = referee_.adversarial(x, trace_.true_label);
  trace_.steps.push_back(s);
  current_ = x;
}

void TraceRecorder::set_status(std::string status, std::string reason) {
  trace_.status = std::move(status);
  trace_.reason = std::move(reason);
}

AttackTrace TraceRecorder::finish() {
  trace_.final_x = current_;
  trace_.final_l2 = l2_distance(current_.values(), x0_.values());
  trace_.queries_used = oracle_.ledger().physical();
  trace_.logical_queries = oracle_.ledger().logical();
  trace_.success = trace_.success_at(trace_.epsilon, static_cast<std::size_t>(-1));
  return trace_;
}

}  // namespace snd
