#include "selfdec/perpetuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selfdec/error.hpp"
#include "selfdec/parallel.hpp"

namespace selfdec {

void AffinePairLaw::validate() const {
  struct Visitor {
    void operator()(const ConstantPair& p) const {
      require(std::isfinite(p.a) && std::isfinite(p.b), "constant pair must be finite");
    }
    void operator()(const IndependentPair& p) const {
      selfdec::validate(p.a);
      selfdec::validate(p.b);
    }
    void operator()(const BetaGammaPair& p) const { GammaParams(p.shape, p.rate); }
    void operator()(const StoppedIntegralPair& p) const {
      p.model.validate();
      p.rule.validate();
    }
  };
  std::visit(Visitor{}, kind);
}

std::pair<double, double> AffinePairLaw::sample(RngStream& stream) const {
  struct Visitor {
    RngStream& s;
    std::pair<double, double> operator()(const ConstantPair& p) const { return {p.a, p.b}; }
    std::pair<double, double> operator()(const IndependentPair& p) const {
      const double a = selfdec::sample(p.a, s);
      const double b = selfdec::sample(p.b, s);
      return {a, p.c_form ? a * b : b};
    }
    std::pair<double, double> operator()(const BetaGammaPair& p) const {
      const double d = p.reading == DiscountReading::kFirstJumpTime
                           ? std::exp(-sample_exponential(p.shape, s))
                           : std::exp(-sample_gamma(GammaParams(p.shape, 1.0), s));
      return {d, d * sample_gamma(GammaParams(1.0, p.rate), s)};
    }
    std::pair<double, double> operator()(const StoppedIntegralPair& p) const {
      const StoppedValue v = stopped_integral(p.model, p.rule, s);
      return {std::exp(-v.tau), v.x_tau};
    }
  };
  return std::visit(Visitor{stream}, kind);
}

double iterate_to_stationarity(const AffinePairLaw& law, double z0, std::size_t n_steps,
                               RngStream& stream) {
  law.validate();
  require(n_steps >= 1, "iteration needs n_steps >= 1");
  double z = z0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const auto [a, b] = law.sample(stream);
    z = a * z + b;
  }
  return z;
}

double log_contraction_estimate(const AffinePairLaw& law, std::size_t n, RngStream& stream) {
  law.validate();
  require(n >= 1, "contraction estimate needs n >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::log(std::abs(law.sample(stream).first));
  return acc / static_cast<double>(n);
}

double sample_backward_series(const AffinePairLaw& law, double tail_tol, RngStream& stream,
                              std::size_t max_terms) {
  require(std::isfinite(tail_tol) && tail_tol > 0.0 && tail_tol < 1.0,
          "tail_tol must lie in (0, 1)");
  double sum = 0.0;
  double product = 1.0;
  for (std::size_t k = 0; k < max_terms; ++k) {
    const auto [a, b] = law.sample(stream);
    sum += product * b;
    product *= a;
    if (std::abs(product) < tail_tol) return sum;
  }
  throw Error(ErrorCode::kNotContractive,
              "backward series did not contract below tail_tol within the term budget");
}

std::vector<double> sample_backward_series_batch(const AffinePairLaw& law, double tail_tol,
                                                 std::size_t n, const RngStream& base) {
  law.validate();
  RngStream pilot = base.substream(1);
  const double m = log_contraction_estimate(law, 10'000, pilot);
  if (!(m < 0.0)) {
    throw Error(ErrorCode::kNotContractive,
                "affine law is not contractive: estimated E log|A| >= 0");
  }
  const RngStream draws = base.substream(0);
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = draws.substream(i);
    out[i] = sample_backward_series(law, tail_tol, s);
  });
  return out;
}

std::vector<double> iterate_batch(const AffinePairLaw& law, double z0, std::size_t n_steps,
                                  std::size_t n, const RngStream& base) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.substream(i);
    out[i] = iterate_to_stationarity(law, z0, n_steps, s);
  });
  return out;
}

PairedSamples beta_gamma_identity_samples(double shape, double rate, std::size_t n,
                                          const RngStream& base) {
  const GammaParams direct(shape, rate);
  const GammaParams bigger(shape + 1.0, rate);
  require(n >= 1, "need n >= 1");
  PairedSamples out{std::vector<double>(n), std::vector<double>(n)};
  const RngStream lhs_base = base.substream(0), rhs_base = base.substream(1);
  parallel_for(n, [&](std::size_t i) {
    RngStream l = lhs_base.substream(i);
    RngStream r = rhs_base.substream(i);
    out.lhs[i] = sample_gamma(direct, l);
    const double u = sample_uniform(r);
    out.rhs[i] = std::exp(std::log(u) / shape) * sample_gamma(bigger, r);
  });
  return out;
}

PairedSamples first_jump_factor_samples(double shape, double rate, std::size_t n,
                                        const RngStream& base, DiscountReading reading) {
  const GammaParams direct(shape, rate);
  require(n >= 1, "need n >= 1");
  const AffinePairLaw pair{BetaGammaPair{shape, rate, reading}};
  PairedSamples out{std::vector<double>(n), std::vector<double>(n)};
  const RngStream lhs_base = base.substream(0), rhs_base = base.substream(1);
  parallel_for(n, [&](std::size_t i) {
    RngStream l = lhs_base.substream(i);
    RngStream r = rhs_base.substream(i);
    out.lhs[i] = sample_gamma(direct, l);
    // D (C + Z') = A Z' + B with Z' an independent gamma(shape, rate).
    const auto [a, b] = pair.sample(r);
    out.rhs[i] = a * sample_gamma(direct, r) + b;
  });
  return out;
}

StoppingRule perpetuity_rule(const LevyModel& model) {
  if (model.jump_rate > 0.0) return StoppingRule{FirstJump{}};
  return StoppingRule{IndependentRandomTime{ExponentialLaw{1.0}}};
}

PerpetuityComparison perpetuity_comparison(const LevyModel& model, std::size_t n,
                                           const RngStream& base,
                                           const PerpetuityOptions& options) {
  model.validate();
  options.policy.validate();
  require(n >= 100, "perpetuity check needs n >= 100");
  const AffinePairLaw law{StoppedIntegralPair{model, perpetuity_rule(model)}};

  // A = e^{-tau} on a pilot batch: range, spread and E log A.
  RngStream pilot = base.substream(2);
  const std::size_t n_pilot = 10'000;
  std::vector<double> a_pilot(n_pilot);
  for (auto& a : a_pilot) a = law.sample(pilot).first;
  const auto [a_min, a_max] = std::minmax_element(a_pilot.begin(), a_pilot.end());
  double log_mean = 0.0;
  for (double a : a_pilot) log_mean += std::log(a);
  log_mean /= static_cast<double>(n_pilot);

  PerpetuityComparison out;
  out.n_steps = options.n_steps;
  if (out.n_steps == 0) {
    if (!(log_mean < 0.0)) {
      throw Error(ErrorCode::kNotContractive, "pair law is not contractive: E log A >= 0");
    }
    out.n_steps = static_cast<std::size_t>(std::ceil(60.0 / -log_mean));
  }

  out.chain = iterate_batch(law, 0.0, out.n_steps, n, base.substream(0));
  out.direct = sample_discounted_integrals(model, options.policy, n, base.substream(1));

  StatReport& report = out.report;
  report.name = "perpetuity:" + describe(model);
  report.n = out.chain.size();
  report.m = out.direct.size();
  report.seed = base.seed();
  const bool deterministic = model.jump_rate == 0.0 && !model.has_gaussian();
  if (deterministic) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(out.chain[i] - out.direct[i]));
    }
    report.bounds.push_back(
        at_most("max |chain - drift|", worst, 1e-9 * (1.0 + std::abs(model.drift))));
  } else {
    report.ks = ks_two_sample(out.chain, out.direct, options.significance);
    report.moments.push_back(
        mean_diff_check("mean(chain) - mean(direct)", out.chain, out.direct));
  }
  report.bounds.push_back(at_least("min A", *a_min, 0.0));
  report.bounds.push_back(at_most("max A", *a_max, 1.0));
  report.bounds.push_back(at_least("var A (non-degenerate)", summarize(a_pilot).var, 1e-6));
  report.bounds.push_back(at_most("E log A", log_mean, 0.0));
  return out;
}

StatReport selfdecomposable_as_perpetuity(const LevyModel& model, std::size_t n,
                                          const RngStream& base,
                                          const PerpetuityOptions& options) {
  return perpetuity_comparison(model, n, base, options).report;
}

}  // namespace selfdec
