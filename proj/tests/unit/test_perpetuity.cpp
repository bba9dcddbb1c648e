#include <doctest.h>

#include <cmath>

#include "selfdec/error.hpp"
#include "selfdec/perpetuity.hpp"

using namespace selfdec;

TEST_CASE("constant affine map converges to its fixed point") {
  // z -> a z + b has the fixed point b / (1 - a).
  const AffinePairLaw law{ConstantPair{0.5, 3.0}};
  RngStream s(1, 0);
  CHECK(iterate_to_stationarity(law, 100.0, 200, s) == doctest::Approx(6.0).epsilon(1e-14));
  RngStream t(1, 0);
  CHECK(sample_backward_series(law, 1e-16, t) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("non-contractive laws are refused") {
  const AffinePairLaw unit{ConstantPair{1.0, 1.0}};
  try {
    sample_backward_series_batch(unit, 1e-12, 10, RngStream(1, 0));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotContractive);
  }
  const AffinePairLaw grow{IndependentPair{UniformLaw{1.5, 2.0}, ExponentialLaw{1.0}}};
  CHECK_THROWS_AS(sample_backward_series_batch(grow, 1e-12, 10, RngStream(1, 0)), Error);
  RngStream s(1, 0);
  CHECK_THROWS_AS(sample_backward_series(unit, 1e-12, s, 1000), Error);
}

TEST_CASE("contraction estimate") {
  // A ~ U^{1/2}: E log A = -1/2.
  const AffinePairLaw law{IndependentPair{PowerUniformLaw{0.5}, PointMassLaw{0.0}}};
  RngStream s(3, 0);
  CHECK(log_contraction_estimate(law, 200'000, s) == doctest::Approx(-0.5).epsilon(0.01));
}

TEST_CASE("chain and backward series agree for an independent pair") {
  // A ~ U(0,1), B = 1: Z = sum prod U, mean 1 / (1 - 1/2) = 2.
  const AffinePairLaw law{IndependentPair{UniformLaw{0.0, 1.0}, PointMassLaw{1.0}}};
  const std::size_t n = 30'000;
  const auto chain = iterate_batch(law, 0.0, 80, n, RngStream(4, 0));
  const auto series = sample_backward_series_batch(law, 1e-15, n, RngStream(4, 1));
  CHECK(ks_two_sample(chain, series, 0.001).pass);
  CHECK(mean_check("chain mean", chain, 2.0).pass);
}

TEST_CASE("both readings of the discount factor") {
  const std::size_t n = 40'000;
  // First-jump time reading reproduces gamma(a, l).
  for (double a : {0.5, 2.0}) {
    const auto p = first_jump_factor_samples(a, 1.0, n, RngStream(5, 0));
    CHECK(ks_two_sample(p.lhs, p.rhs, 0.001).pass);
  }
  // The gamma-shape reading is only right at a = 1.
  const auto same = first_jump_factor_samples(1.0, 1.0, n, RngStream(6, 0),
                                              DiscountReading::kGammaShapeA);
  CHECK(ks_two_sample(same.lhs, same.rhs, 0.001).pass);
  const auto wrong = first_jump_factor_samples(3.0, 1.0, n, RngStream(6, 0),
                                               DiscountReading::kGammaShapeA);
  CHECK_FALSE(ks_two_sample(wrong.lhs, wrong.rhs, 0.001).pass);
}

TEST_CASE("beta-gamma identity") {
  const auto p = beta_gamma_identity_samples(0.7, 2.0, 40'000, RngStream(7, 0));
  CHECK(ks_two_sample(p.lhs, p.rhs, 0.001).pass);
  CHECK(mean_check("lhs", p.lhs, 0.35).pass);
}

TEST_CASE("selfdecomposable laws as perpetuities") {
  LevyModel cp;
  cp.jump_rate = 2.0;
  cp.jump_law = ExponentialLaw{1.0};
  CHECK(perpetuity_rule(cp).name() == "FirstJump");
  const auto r = selfdecomposable_as_perpetuity(cp, 20'000, RngStream(8, 0));
  CHECK(r.verdict());
  CHECK(r.ks.has_value());

  LevyModel bm;
  bm.gauss_var = 1.0;
  CHECK(perpetuity_rule(bm).name() == "IndependentRandomTime(Exp(1))");
  CHECK(selfdecomposable_as_perpetuity(bm, 20'000, RngStream(9, 0)).verdict());

  LevyModel drift;
  drift.drift = 2.5;
  const auto d = perpetuity_comparison(drift, 500, RngStream(10, 0));
  CHECK(d.report.verdict());
  CHECK_FALSE(d.report.ks.has_value());
  for (double z : d.chain) CHECK(z == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("pair law validation") {
  CHECK_THROWS_AS((AffinePairLaw{ConstantPair{NAN, 1.0}}.validate()), Error);
  CHECK_THROWS_AS((AffinePairLaw{BetaGammaPair{0.0, 1.0}}.validate()), Error);
  const AffinePairLaw c{IndependentPair{PointMassLaw{0.5}, PointMassLaw{2.0}, true}};
  RngStream s(1, 0);
  const auto [a, b] = c.sample(s);
  CHECK(a == 0.5);
  CHECK(b == 1.0);
}
