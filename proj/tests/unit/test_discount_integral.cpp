#include <doctest.h>

#include <cmath>

#include "selfdec/discount_integral.hpp"
#include "selfdec/error.hpp"
#include "selfdec/stats.hpp"

using namespace selfdec;

TEST_CASE("jump sum on a hand path") {
  const JumpPath p(5.0, {0.5, 2.0}, {2.0, -1.0}, 0.0);
  CHECK(eval_jump_sum(p, 0.4) == 0.0);
  CHECK(eval_jump_sum(p, 1.0) == doctest::Approx(2.0 * std::exp(-0.5)));
  CHECK(eval_jump_sum(p, 5.0) == doctest::Approx(2.0 * std::exp(-0.5) - std::exp(-2.0)));
}

TEST_CASE("pure drift integrates in closed form") {
  const JumpPath p(3.0, {}, {}, 1.5);
  for (double t : {0.0, 1e-9, 0.3, 3.0}) {
    const double exact = 1.5 * (1.0 - std::exp(-t));
    CHECK(eval_jump_sum(p, t) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(eval_by_parts(p, t) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("integration by parts agrees with the jump sum") {
  LevyModel m;
  m.jump_rate = 4.0;
  m.jump_law = NormalLaw{0.2, 1.5};
  m.drift = -0.7;
  const RngStream base(5, 0);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    RngStream s = base.substream(i);
    const JumpPath p = simulate_path(m, 12.0, s);
    for (double t : {0.25, 3.0, 12.0}) {
      const double a = eval_jump_sum(p, t);
      worst = std::max(worst, std::abs(a - eval_by_parts(p, t)) / (1.0 + std::abs(a)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("by-parts evaluation rejects Brownian paths") {
  LevyModel m;
  m.gauss_var = 1.0;
  RngStream s(3, 0);
  const JumpPath p = simulate_path(m, 2.0, s);
  CHECK_THROWS_AS(eval_by_parts(p, 1.0), Error);
  CHECK_NOTHROW(eval_jump_sum(p, 1.0));
}

TEST_CASE("evaluation time must lie within the horizon") {
  const JumpPath p(1.0, {}, {}, 0.0);
  CHECK_THROWS_AS(eval_jump_sum(p, 1.5), Error);
  CHECK_THROWS_AS(eval_jump_sum(p, -0.1), Error);
}

TEST_CASE("gamma driver gives a gamma integral") {
  // cp(alpha; Exp(lambda)) integrates to Gamma(alpha, lambda).
  LevyModel m;
  m.jump_rate = 2.0;
  m.jump_law = ExponentialLaw{3.0};
  const std::size_t n = 50'000;
  const auto xs = sample_discounted_integrals(m, TruncationPolicy{}, n, RngStream(11, 0));
  CHECK(mean_check("mean", xs, 2.0 / 3.0).pass);
  CHECK(variance_check("var", xs, 2.0 / 9.0).pass);
  CHECK(ecf_distance(xs, GammaCf{2.0, 3.0}, default_cf_grid()) <= ecf_bound(n));
}

TEST_CASE("Brownian driver gives a normal integral with variance v/2") {
  LevyModel m;
  m.gauss_var = 2.0;
  m.drift = 1.0;
  const std::size_t n = 50'000;
  const auto xs = sample_discounted_integrals(m, TruncationPolicy{}, n, RngStream(13, 0));
  CHECK(mean_check("mean", xs, 1.0).pass);
  CHECK(variance_check("var", xs, 1.0).pass);
  CHECK(ecf_distance(xs, NormalCf{1.0, 1.0}, default_cf_grid()) <= ecf_bound(n));
}

TEST_CASE("batch sampling is reproducible draw by draw") {
  LevyModel m;
  m.jump_rate = 1.0;
  m.jump_law = ExponentialLaw{1.0};
  const RngStream base(99, 4);
  const auto xs = sample_discounted_integrals(m, TruncationPolicy{}, 200, base);
  for (std::uint64_t i : {0u, 17u, 199u}) {
    RngStream s = base.substream(i);
    CHECK(sample_discounted_integral(m, TruncationPolicy{}, s) == xs[i]);
  }
}

TEST_CASE("truncation policy") {
  CHECK_THROWS_AS((TruncationPolicy{0.0, 1e-12}.validate()), Error);
  CHECK_THROWS_AS((TruncationPolicy{10.0, 1.0}.validate()), Error);
  LevyModel m;
  m.jump_rate = 1.0;
  m.jump_law = ExponentialLaw{0.01};  // E|Y(1)| = 100
  const auto p = TruncationPolicy::for_model(m, 1e-10);
  CHECK(p.horizon == doctest::Approx(std::log(100.0 / 1e-10)));
  LevyModel z;
  CHECK(TruncationPolicy::for_model(z, 1e-10).horizon == doctest::Approx(std::log(1e10)));
}
