#include "selfdec/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "selfdec/error.hpp"
#include "selfdec/parallel.hpp"

namespace selfdec {
namespace {

std::optional<double> first_jump_where(const JumpPath& path, auto&& pred) {
  for (std::size_t k = 0; k < path.jump_count(); ++k) {
    if (pred(path.jump_sizes()[k])) return path.jump_times()[k];
  }
  return std::nullopt;
}

[[noreturn]] void insufficient(const std::string& rule, double horizon) {
  std::ostringstream os;
  os << "insufficient horizon: rule " << rule << " did not occur by t=" << horizon;
  throw Error(ErrorCode::kInsufficientHorizon, os.str());
}

/// Extra time past tau + T so the shifted path always covers (0, T].
double covering_horizon(double tau, double horizon) {
  return (tau + horizon) * (1.0 + 1e-12) + 1e-12;
}

/// Simulates on (0, initial], then doubles the horizon until `first_time`
/// finds an event, and finally extends to cover (0, tau + tail].
template <class FirstTime>
std::pair<JumpPath, double> simulate_until(const LevyModel& model, double initial,
                                           double tail, RngStream& stream,
                                           const DecomposeOptions& options,
                                           const std::string& rule_name,
                                           FirstTime&& first_time) {
  JumpPath path = simulate_path(model, initial, stream);
  std::optional<double> tau = first_time(path);
  while (!tau) {
    if (path.horizon() >= options.max_tau) insufficient(rule_name, path.horizon());
    extend_path(path, model, std::min(options.max_tau, 2.0 * path.horizon()), stream);
    tau = first_time(path);
  }
  if (*tau > options.max_tau) insufficient(rule_name, options.max_tau);
  if (tail > 0.0) {
    const double need = covering_horizon(*tau, tail);
    if (path.horizon() < need) extend_path(path, model, need, stream);
  }
  return {std::move(path), *tau};
}

/// First-occurrence functor for the path-event rules.
auto path_event(const StoppingRule& rule) {
  return [&rule](const JumpPath& p) -> std::optional<double> {
    RngStream unused(0, 0);
    try {
      return evaluate_stopping(rule, p, unused);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInsufficientHorizon) return std::nullopt;
      throw;
    }
  };
}

IdentityCheck factor_at_first(const JumpPath& path, double tau, double horizon) {
  IdentityCheck c;
  c.tau = tau;
  c.jump = path_value(path, tau);
  c.shifted = eval_jump_sum(shift_path(path, tau), horizon);
  c.lhs = eval_jump_sum(path, tau + horizon);
  const double discount = std::exp(-tau);
  c.rhs = discount * c.jump + discount * c.shifted;
  const double end = tau + horizon;
  for (std::size_t k = 0; k < path.jump_count() && path.jump_times()[k] <= end; ++k) {
    c.series += std::exp(-path.jump_times()[k]) * path.jump_sizes()[k];
  }
  return c;
}

}  // namespace

void StoppingRule::validate() const {
  struct Visitor {
    void operator()(const FixedTime& r) const {
      require(std::isfinite(r.t) && r.t >= 0.0, "FixedTime needs t >= 0");
    }
    void operator()(const FirstJump&) const {}
    void operator()(const FirstJumpIn& r) const { r.set.validate(); }
    void operator()(const KthJump& r) const { require(r.k >= 1, "KthJump needs k >= 1"); }
    void operator()(const IndependentRandomTime& r) const {
      selfdec::validate(r.law);
      require(support(r.law).first >= 0.0,
              "IndependentRandomTime law must be supported on [0, inf)");
    }
  };
  std::visit(Visitor{}, kind);
}

std::string StoppingRule::name() const {
  std::ostringstream os;
  os.precision(15);
  struct Visitor {
    std::ostringstream& os;
    void operator()(const FixedTime& r) const { os << "FixedTime(" << r.t << ")"; }
    void operator()(const FirstJump&) const { os << "FirstJump"; }
    void operator()(const FirstJumpIn& r) const {
      switch (r.set.kind) {
        case JumpSet::Kind::kAbsAtLeast:
          os << "FirstJumpIn(|x|>=" << r.set.lo << ")";
          break;
        case JumpSet::Kind::kAtLeast:
          os << "FirstJumpIn(x>=" << r.set.lo << ")";
          break;
        case JumpSet::Kind::kInterval:
          os << "FirstJumpIn([" << r.set.lo << "," << r.set.hi << "])";
          break;
      }
    }
    void operator()(const KthJump& r) const { os << "KthJump(" << r.k << ")"; }
    void operator()(const IndependentRandomTime& r) const {
      os << "IndependentRandomTime(" << describe(r.law) << ")";
    }
  };
  std::visit(Visitor{os}, kind);
  return os.str();
}

double evaluate_stopping(const StoppingRule& rule, const JumpPath& path, RngStream& stream) {
  rule.validate();
  const std::string name = rule.name();
  struct Visitor {
    const JumpPath& path;
    RngStream& stream;
    const std::string& name;
    double operator()(const FixedTime& r) const {
      if (r.t > path.horizon()) insufficient(name, path.horizon());
      return r.t;
    }
    double operator()(const FirstJump&) const {
      if (path.jump_count() == 0) insufficient(name, path.horizon());
      return path.jump_times()[0];
    }
    double operator()(const FirstJumpIn& r) const {
      require(!path.has_gaussian(), "FirstJumpIn needs a path without a Gaussian part");
      const auto t = first_jump_where(path, [&](double x) { return r.set.contains(x); });
      if (!t) insufficient(name, path.horizon());
      return *t;
    }
    double operator()(const KthJump& r) const {
      if (path.jump_count() < r.k) insufficient(name, path.horizon());
      return path.jump_times()[r.k - 1];
    }
    double operator()(const IndependentRandomTime& r) const {
      const double t = sample(r.law, stream);
      if (t > path.horizon()) insufficient(name, path.horizon());
      return t;
    }
  };
  return std::visit(Visitor{path, stream, name}, rule.kind);
}

DecompositionRecord decompose(const LevyModel& model, const StoppingRule& rule,
                              const TruncationPolicy& policy, RngStream& stream,
                              const DecomposeOptions& options) {
  model.validate();
  rule.validate();
  policy.validate();
  const std::string name = rule.name();

  JumpPath path;
  double tau = 0.0;
  if (const auto* fixed = std::get_if<FixedTime>(&rule.kind)) {
    tau = fixed->t;
    if (tau > options.max_tau) insufficient(name, options.max_tau);
    path = simulate_path(model, covering_horizon(tau, policy.horizon), stream);
  } else if (const auto* indep = std::get_if<IndependentRandomTime>(&rule.kind)) {
    RngStream time_stream = stream.fork();
    tau = sample(indep->law, time_stream);
    if (tau > options.max_tau) insufficient(name, options.max_tau);
    path = simulate_path(model, covering_horizon(tau, policy.horizon), stream);
  } else {
    std::tie(path, tau) = simulate_until(model, policy.horizon, policy.horizon, stream,
                                         options, name, path_event(rule));
  }

  DecompositionRecord r;
  r.tau = tau;
  r.x_tau = eval_jump_sum(path, tau);
  r.discount = std::exp(-tau);
  r.x_prime = eval_jump_sum(shift_path(path, tau), policy.horizon);
  r.x_total = eval_jump_sum(path, tau + policy.horizon);
  return r;
}

StoppedValue stopped_integral(const LevyModel& model, const StoppingRule& rule,
                              RngStream& stream, const DecomposeOptions& options) {
  model.validate();
  rule.validate();
  const std::string name = rule.name();
  double tau = 0.0;
  if (const auto* fixed = std::get_if<FixedTime>(&rule.kind)) {
    tau = fixed->t;
  } else if (const auto* indep = std::get_if<IndependentRandomTime>(&rule.kind)) {
    RngStream time_stream = stream.fork();
    tau = sample(indep->law, time_stream);
  } else {
    auto [path, t] = simulate_until(model, 1.0, 0.0, stream, options, name, path_event(rule));
    return {t, eval_jump_sum(path, t)};
  }
  if (tau > options.max_tau) insufficient(name, options.max_tau);
  if (tau == 0.0) return {0.0, 0.0};
  const JumpPath path = simulate_path(model, tau, stream);
  return {tau, eval_jump_sum(path, tau)};
}

double check_pathwise_identity(const DecompositionRecord& record) {
  return std::abs(record.x_total - (record.x_tau + record.discount * record.x_prime));
}

DecompositionBatch decompose_batch(const LevyModel& model, const StoppingRule& rule,
                                   const TruncationPolicy& policy, std::size_t n,
                                   const RngStream& base, const DecomposeOptions& options) {
  std::vector<std::optional<DecompositionRecord>> slots(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.substream(i);
    try {
      slots[i] = decompose(model, rule, policy, s, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientHorizon) throw;
    }
  });
  DecompositionBatch batch;
  batch.records.reserve(n);
  for (auto& s : slots) {
    if (s) {
      batch.records.push_back(*s);
    } else {
      ++batch.discarded;
    }
  }
  return batch;
}

double IdentityCheck::residual() const { return std::abs(lhs - rhs); }

IdentityCheck first_value_identity(const LevyModel& model, const TruncationPolicy& policy,
                                   RngStream& stream, const DecomposeOptions& options) {
  model.validate();
  policy.validate();
  require(model.purely_discontinuous(),
          "first-value identity needs a purely discontinuous model (no drift, no Gaussian part)");
  auto first = [](const JumpPath& p) {
    return first_jump_where(p, [](double x) { return x != 0.0; });
  };
  auto [path, tau] = simulate_until(model, policy.horizon, policy.horizon, stream, options, "FirstNonZero", first);
  return factor_at_first(path, tau, policy.horizon);
}

IdentityCheck restricted_jump_identity(const LevyModel& model, const JumpSet& set,
                                       const TruncationPolicy& policy, RngStream& stream,
                                       const DecomposeOptions& options) {
  model.validate();
  policy.validate();
  set.validate();
  require(model.purely_discontinuous(),
          "restricted-jump identity needs a purely discontinuous model");
  auto first = [&](const JumpPath& p) {
    return first_jump_where(p, [&](double x) { return set.contains(x); });
  };
  auto [path, tau] = simulate_until(model, policy.horizon, policy.horizon, stream, options, "FirstJumpIn", first);
  const JumpPath in_set = thin_path(path, set).first;
  return factor_at_first(in_set, tau, policy.horizon);
}

}  // namespace selfdec
