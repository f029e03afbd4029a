#pragma once

#include "snd/errors.hpp"
#include "snd/oracle.hpp"

namespace snd {

// Forwards to another oracle but refuses logical queries past `cap`.
class CappedOracle final : public QueryOracle {
 public:
  CappedOracle(QueryOracle& inner, std::size_t cap) : inner_(inner), cap_(inner.ledger().logical() + cap) {}

  Vec score_query(const ImageTensor& x) override {
    check();
    return inner_.score_query(x);
  }
  std::size_t decision_query(const ImageTensor& x) override {
    check();
    return inner_.decision_query(x);
  }
  const QueryLedger& ledger() const override { return inner_.ledger(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  const Shape& input_shape() const override { return inner_.input_shape(); }
  std::size_t cost_per_query() const override { return inner_.cost_per_query(); }
  const Classifier& criterion_model() const override { return inner_.criterion_model(); }
  const DefenseSpec& defense() const override { return inner_.defense(); }

 private:
  void check() const {
    if (inner_.ledger().logical() >= cap_) throw BudgetExceeded("logical query budget exhausted");
  }

  QueryOracle& inner_;
  std::size_t cap_;
};

}  // namespace snd
