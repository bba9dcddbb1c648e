#include <doctest.h>

#include <cmath>

#include "selfdec/decomposition.hpp"
#include "selfdec/error.hpp"
#include "selfdec/stats.hpp"

using namespace selfdec;

namespace {

LevyModel gamma_driver() {
  LevyModel m;
  m.jump_rate = 2.0;
  m.jump_law = ExponentialLaw{1.0};
  return m;
}

}  // namespace

TEST_CASE("stopping rules on a hand path") {
  const JumpPath p(10.0, {0.5, 1.5, 4.0}, {0.3, -2.0, 1.2}, 0.0);
  RngStream s(1, 0);
  CHECK(evaluate_stopping({FixedTime{2.5}}, p, s) == 2.5);
  CHECK(evaluate_stopping({FirstJump{}}, p, s) == 0.5);
  CHECK(evaluate_stopping({FirstJumpIn{JumpSet::abs_at_least(1.0)}}, p, s) == 1.5);
  CHECK(evaluate_stopping({FirstJumpIn{JumpSet::at_least(1.0)}}, p, s) == 4.0);
  CHECK(evaluate_stopping({FirstJumpIn{JumpSet::interval(0.2, 0.4)}}, p, s) == 0.5);
  CHECK(evaluate_stopping({KthJump{3}}, p, s) == 4.0);
  CHECK(evaluate_stopping({IndependentRandomTime{PointMassLaw{3.0}}}, p, s) == 3.0);
}

TEST_CASE("events past the horizon raise insufficient horizon") {
  const JumpPath p(2.0, {0.5}, {0.3}, 0.0);
  RngStream s(1, 0);
  auto code = [&](const StoppingRule& r) {
    try {
      evaluate_stopping(r, p, s);
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  const int ih = static_cast<int>(ErrorCode::kInsufficientHorizon);
  CHECK(code({FixedTime{2.5}}) == ih);
  CHECK(code({KthJump{2}}) == ih);
  CHECK(code({FirstJumpIn{JumpSet::at_least(1.0)}}) == ih);
  CHECK(code({IndependentRandomTime{PointMassLaw{5.0}}}) == ih);
}

TEST_CASE("rule validation and names") {
  CHECK_THROWS_AS((StoppingRule{FixedTime{-1.0}}.validate()), Error);
  CHECK_THROWS_AS((StoppingRule{KthJump{0}}.validate()), Error);
  CHECK_THROWS_AS((StoppingRule{IndependentRandomTime{NormalLaw{0.0, 1.0}}}.validate()), Error);
  CHECK(StoppingRule{FixedTime{0.7}}.name() == "FixedTime(0.7)");
  CHECK(StoppingRule{FirstJump{}}.name() == "FirstJump");
  CHECK(StoppingRule{FirstJumpIn{JumpSet::at_least(1.0)}}.name() == "FirstJumpIn(x>=1)");
  CHECK(StoppingRule{KthJump{3}}.name() == "KthJump(3)");
  CHECK(StoppingRule{IndependentRandomTime{ExponentialLaw{1.0}}}.name() ==
        "IndependentRandomTime(Exp(1))");
}

TEST_CASE("pathwise identity holds for every rule") {
  const LevyModel m = gamma_driver();
  const std::vector<StoppingRule> rules = {
      {FixedTime{0.7}}, {FirstJump{}}, {FirstJumpIn{JumpSet::at_least(1.0)}},
      {KthJump{3}}, {IndependentRandomTime{ExponentialLaw{1.0}}}};
  for (const auto& rule : rules) {
    const auto batch = decompose_batch(m, rule, TruncationPolicy{}, 2000, RngStream(7, 1));
    CHECK(batch.discarded == 0);
    double worst = 0.0;
    for (const auto& r : batch.records) {
      worst = std::max(worst, check_pathwise_identity(r) / (1.0 + std::abs(r.x_total)));
      CHECK(r.discount == std::exp(-r.tau));
    }
    CHECK(worst <= kPathwiseTolerance);
  }
}

TEST_CASE("identity holds with a Brownian part") {
  LevyModel m = gamma_driver();
  m.gauss_var = 1.0;
  m.drift = -0.5;
  const auto batch =
      decompose_batch(m, {FirstJump{}}, TruncationPolicy{}, 2000, RngStream(8, 1));
  double worst = 0.0;
  for (const auto& r : batch.records) {
    worst = std::max(worst, check_pathwise_identity(r) / (1.0 + std::abs(r.x_total)));
  }
  CHECK(worst <= kPathwiseTolerance);
}

TEST_CASE("decomposition components have the expected laws") {
  // For the gamma driver with FirstJump: tau ~ Exp(2), x_prime ~ Gamma(2, 1),
  // and x_prime is independent of (tau, x_tau).
  const std::size_t n = 40'000;
  const auto batch =
      decompose_batch(gamma_driver(), {FirstJump{}}, TruncationPolicy{}, n, RngStream(9, 0));
  REQUIRE(batch.records.size() == n);
  std::vector<double> tau, xp, xt, disc;
  for (const auto& r : batch.records) {
    tau.push_back(r.tau);
    xp.push_back(r.x_prime);
    xt.push_back(r.x_tau);
    disc.push_back(r.discount);
  }
  CHECK(mean_check("tau", tau, 0.5).pass);
  CHECK(mean_check("x_prime", xp, 2.0).pass);
  CHECK(ecf_distance(xp, GammaCf{2.0, 1.0}, default_cf_grid()) <= ecf_bound(n));
  CHECK(independence_diagnostic(xt, xp).pass);
  CHECK(independence_diagnostic(disc, xp).pass);
}

TEST_CASE("a rule that never fires is reported, not capped") {
  LevyModel m;  // no jumps at all
  m.drift = 1.0;
  RngStream s(2, 0);
  DecomposeOptions opt;
  opt.max_tau = 100.0;
  try {
    decompose(m, {FirstJump{}}, TruncationPolicy{}, s, opt);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientHorizon);
  }
  const auto batch = decompose_batch(m, {FirstJump{}}, TruncationPolicy{}, 5, RngStream(2, 0), opt);
  CHECK(batch.records.empty());
  CHECK(batch.discarded == 5);
  RngStream s2(2, 0);
  CHECK_THROWS_AS(decompose(m, {FixedTime{200.0}}, TruncationPolicy{}, s2, opt), Error);
}

TEST_CASE("stopped integral matches the decomposition's stopped part in law") {
  const std::size_t n = 30'000;
  const LevyModel m = gamma_driver();
  std::vector<double> a(n), b(n);
  const RngStream base(12, 0);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream s = base.substream(i);
    a[i] = stopped_integral(m, {KthJump{2}}, s).x_tau;
    RngStream t = base.substream(n + i);
    b[i] = decompose(m, {KthJump{2}}, TruncationPolicy{}, t).x_tau;
  }
  CHECK(ks_two_sample(a, b, 0.001).pass);
}

TEST_CASE("first-value and restricted-jump identities on hand-checkable terms") {
  LevyModel m;
  m.jump_rate = 2.0;
  m.jump_law = NormalLaw{0.5, 1.0};
  const RngStream base(14, 0);
  for (std::uint64_t i = 0; i < 300; ++i) {
    RngStream s = base.substream(i);
    const auto c = first_value_identity(m, TruncationPolicy{}, s);
    CHECK(c.residual() <= kPathwiseTolerance * (1.0 + std::abs(c.lhs)));
    CHECK(c.series == doctest::Approx(c.lhs).epsilon(1e-12));
    RngStream r = base.substream(1000 + i);
    const auto d = restricted_jump_identity(m, JumpSet::abs_at_least(1.0), TruncationPolicy{}, r);
    CHECK(std::abs(d.jump) >= 1.0);
    CHECK(d.residual() <= kPathwiseTolerance * (1.0 + std::abs(d.lhs)));
  }
  LevyModel drifting = m;
  drifting.drift = 1.0;
  RngStream s(1, 1);
  CHECK_THROWS_AS(first_value_identity(drifting, TruncationPolicy{}, s), Error);
}
