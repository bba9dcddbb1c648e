#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "selfdec/decomposition.hpp"
#include "selfdec/stats.hpp"

namespace selfdec {

/// Which discount factor to use in the gamma first-jump factorization
/// gamma(a, l) = D (gamma(1, l) + gamma'(a, l)).
///
/// kFirstJumpTime uses D = e^{-tau_1} with tau_1 ~ Exp(a), the first jump
/// time of the gamma driving process (equivalently D ~ U^{1/a}).
/// kGammaShapeA uses D = e^{-G} with G ~ Gamma(a, 1); it only agrees with
/// the first reading at a = 1 and exists so the difference can be shown.
enum class DiscountReading { kFirstJumpTime, kGammaShapeA };

struct ConstantPair {
  double a;
  double b;
};
/// A and B drawn independently from their laws; with c_form set the pair
/// is (A, A * C) with C drawn from `b`.
struct IndependentPair {
  ScalarLaw a;
  ScalarLaw b;
  bool c_form = false;
};
/// (A, B) = (D, D * gamma(1, rate)) with D per `reading`.
struct BetaGammaPair {
  double shape;
  double rate;
  DiscountReading reading = DiscountReading::kFirstJumpTime;
};
/// (A, B) = (e^{-tau}, int_(0,tau] e^{-s} dY(s)) for a stopping rule.
struct StoppedIntegralPair {
  LevyModel model;
  StoppingRule rule;
};

/// Law of the random affine map x -> A x + B. Pairs are always drawn
/// independently of the state they act on.
struct AffinePairLaw {
  std::variant<ConstantPair, IndependentPair, BetaGammaPair, StoppedIntegralPair> kind;

  void validate() const;
  std::pair<double, double> sample(RngStream& stream) const;
};

/// Z_{k+1} = A_k Z_k + B_k from Z_0 = z0; returns Z_{n_steps}.
double iterate_to_stationarity(const AffinePairLaw& law, double z0, std::size_t n_steps,
                               RngStream& stream);

/// Monte Carlo estimate of E log|A|.
double log_contraction_estimate(const AffinePairLaw& law, std::size_t n, RngStream& stream);

/// sum_k B_k prod_{l<k} A_l, stopped once |prod_{l<=k} A_l| < tail_tol.
/// Throws kNotContractive when max_terms terms do not get there.
double sample_backward_series(const AffinePairLaw& law, double tail_tol, RngStream& stream,
                              std::size_t max_terms = 1'000'000);

/// n backward-series draws, after checking E log|A| < 0 on 10^4 pairs.
std::vector<double> sample_backward_series_batch(const AffinePairLaw& law, double tail_tol,
                                                 std::size_t n, const RngStream& base);

/// n chains of iterate_to_stationarity started at z0.
std::vector<double> iterate_batch(const AffinePairLaw& law, double z0, std::size_t n_steps,
                                  std::size_t n, const RngStream& base);

struct PairedSamples {
  std::vector<double> lhs;
  std::vector<double> rhs;
};

/// lhs: gamma(a, l) draws; rhs: U^{1/a} gamma(a + 1, l), independent factors.
PairedSamples beta_gamma_identity_samples(double shape, double rate, std::size_t n,
                                          const RngStream& base);

/// lhs: gamma(a, l) draws; rhs: D (gamma(1, l) + gamma'(a, l)) with D per reading.
PairedSamples first_jump_factor_samples(double shape, double rate, std::size_t n,
                                        const RngStream& base,
                                        DiscountReading reading = DiscountReading::kFirstJumpTime);

struct PerpetuityOptions {
  /// Chain length; 0 picks ceil(60 / |E log A|) from a pilot estimate.
  std::size_t n_steps = 0;
  double significance = 0.001;
  TruncationPolicy policy{};
};

struct PerpetuityComparison {
  StatReport report;
  std::vector<double> chain;   // chain outputs after n_steps
  std::vector<double> direct;  // direct discounted-integral draws
  std::size_t n_steps = 0;
};

/// Runs the perpetuity chain with (A, B) = (e^{-tau}, X_tau) and compares its
/// output against direct draws of the discounted integral. tau is the first
/// jump when the model jumps, otherwise an independent Exp(1) time. A
/// drift-only model has a point-mass law; it is checked by the largest
/// deviation (<= 1e-9 (1 + |drift|)) instead of KS.
PerpetuityComparison perpetuity_comparison(const LevyModel& model, std::size_t n,
                                           const RngStream& base,
                                           const PerpetuityOptions& options = {});

/// The report of perpetuity_comparison.
StatReport selfdecomposable_as_perpetuity(const LevyModel& model, std::size_t n,
                                          const RngStream& base,
                                          const PerpetuityOptions& options = {});

/// The stopping rule used by selfdecomposable_as_perpetuity for `model`.
StoppingRule perpetuity_rule(const LevyModel& model);

}  // namespace selfdec
