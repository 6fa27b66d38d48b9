#pragma once

#include <functional>
#include <memory>
#include <string>

#include "mflab/fields.hpp"

namespace fixture {

/// Field defined by plain functions; both ignore the population argument
/// unless they capture it themselves.
class FnField final : public mflab::FieldPair {
 public:
  using Velocity = std::function<void(mflab::AgentRef, std::span<double>)>;
  using Drift = std::function<void(mflab::AgentRef, std::span<double>)>;

  FnField(Velocity v, Drift t, std::optional<double> delta = std::nullopt)
      : v_(std::move(v)), t_(std::move(t)), delta_(delta) {}

  std::unique_ptr<mflab::BoundField> bind(const mflab::EmpiricalMeasure&) const override {
    return std::make_unique<Bound>(this);
  }
  std::string name() const override { return "fn"; }
  std::optional<double> analytic_delta(const mflab::LabelSpace&, double) const override { return delta_; }

  static std::shared_ptr<FnField> zero() {
    return std::make_shared<FnField>([](mflab::AgentRef, std::span<double> o) { std::ranges::fill(o, 0.0); },
                                     [](mflab::AgentRef, std::span<double> o) { std::ranges::fill(o, 0.0); },
                                     0.0);
  }

 private:
  struct Bound final : mflab::BoundField {
    using mflab::BoundField::label_drift;
    explicit Bound(const FnField* f) : f(f) {}
    const FnField* f;
    void velocity(mflab::AgentRef y, std::span<double> out) const override { f->v_(y, out); }
    void label_drift(mflab::AgentRef y, std::span<const double>, std::span<double> out) const override {
      f->t_(y, out);
    }
  };
  Velocity v_;
  Drift t_;
  std::optional<double> delta_;
};

}  // namespace fixture
