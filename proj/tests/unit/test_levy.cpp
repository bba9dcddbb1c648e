#include <doctest.h>

#include <cmath>

#include "selfdec/error.hpp"
#include "selfdec/levy.hpp"
#include "selfdec/stats.hpp"

using namespace selfdec;

namespace {

JumpPath hand_path() {
  // Jumps +1 at 0.5, -2 at 1.0, +3 at 2.5; drift 0.25 on (0, 4].
  return JumpPath(4.0, {0.5, 1.0, 2.5}, {1.0, -2.0, 3.0}, 0.25);
}

double cov(const std::vector<double>& x, const std::vector<double>& y) {
  const Summary sx = summarize(x), sy = summarize(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - sx.mean) * (y[i] - sy.mean);
  return acc / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("path construction is validated") {
  CHECK_THROWS_AS(JumpPath(1.0, {0.5, 0.5}, {1.0, 1.0}, 0.0), Error);  // not strictly increasing
  CHECK_THROWS_AS(JumpPath(1.0, {0.0}, {1.0}, 0.0), Error);            // jump at time 0
  CHECK_THROWS_AS(JumpPath(1.0, {1.5}, {1.0}, 0.0), Error);            // beyond horizon
  CHECK_THROWS_AS(JumpPath(1.0, {0.5}, {1.0, 2.0}, 0.0), Error);       // length mismatch
  CHECK_THROWS_AS(JumpPath(1.0, {0.5}, {NAN}, 0.0), Error);
  CHECK_NOTHROW(JumpPath(1.0, {1.0}, {1.0}, 0.0));                      // jump at the horizon
}

TEST_CASE("path values are cadlag") {
  const JumpPath p = hand_path();
  CHECK(path_value(p, 0.0) == 0.0);
  CHECK(path_value(p, 0.5) == doctest::Approx(1.0 + 0.125));
  CHECK(path_value_left(p, 0.5) == doctest::Approx(0.125));
  CHECK(path_value(p, 1.0) == doctest::Approx(-1.0 + 0.25));
  CHECK(path_value_left(p, 1.0) == doctest::Approx(1.0 + 0.25));
  CHECK(path_value(p, 4.0) == doctest::Approx(2.0 + 1.0));
  CHECK_THROWS_AS(path_value(p, 4.5), Error);
}

TEST_CASE("shift keeps a jump at exactly tau in the pre-tau part") {
  const JumpPath p = hand_path();
  const JumpPath s = shift_path(p, 1.0);
  CHECK(s.horizon() == doctest::Approx(3.0));
  REQUIRE(s.jump_count() == 1);
  CHECK(s.jump_times()[0] == doctest::Approx(1.5));
  CHECK(s.jump_sizes()[0] == 3.0);
  CHECK(s.drift() == 0.25);
  // Y_tau(t) = Y(t + tau) - Y(tau).
  for (double t : {0.0, 0.7, 1.5, 2.0, 3.0}) {
    CHECK(path_value(s, t) == doctest::Approx(path_value(p, t + 1.0) - path_value(p, 1.0)));
  }
}

TEST_CASE("thinning splits jumps by set membership") {
  const JumpPath p = hand_path();
  const auto [in, rest] = thin_path(p, JumpSet::abs_at_least(1.5));
  REQUIRE(in.jump_count() == 2);
  CHECK(in.jump_sizes()[0] == -2.0);
  CHECK(in.jump_sizes()[1] == 3.0);
  CHECK(in.drift() == 0.0);
  REQUIRE(rest.jump_count() == 1);
  CHECK(rest.jump_sizes()[0] == 1.0);
  CHECK(rest.drift() == 0.25);
  for (double t : {0.3, 1.0, 2.6, 4.0}) {
    CHECK(path_value(in, t) + path_value(rest, t) == doctest::Approx(path_value(p, t)));
  }
}

TEST_CASE("jump sets") {
  CHECK_THROWS_AS(JumpSet::at_least(0.0), Error);
  CHECK_THROWS_AS(JumpSet::interval(2.0, 1.0), Error);
  const auto a = JumpSet::abs_at_least(1.0);
  CHECK(a.contains(-1.0));
  CHECK(a.contains(1.0));
  CHECK_FALSE(a.contains(0.99));
  const auto b = JumpSet::at_least(1.0);
  CHECK_FALSE(b.contains(-2.0));
  const auto c = JumpSet::interval(1.0, 2.0);
  CHECK(c.contains(2.0));
  CHECK_FALSE(c.contains(2.01));
}

TEST_CASE("simulated compound Poisson paths have the right counts and sizes") {
  LevyModel m;
  m.jump_rate = 2.0;
  m.jump_law = ExponentialLaw{0.5};
  m.drift = -1.0;
  const RngStream base(17, 0);
  std::vector<double> counts, ends;
  for (std::uint64_t i = 0; i < 20'000; ++i) {
    RngStream s = base.substream(i);
    const JumpPath p = simulate_path(m, 3.0, s);
    counts.push_back(static_cast<double>(p.jump_count()));
    ends.push_back(path_value(p, 3.0));
  }
  CHECK(mean_check("jump count", counts, 6.0).pass);
  // E Y(3) = 3 (drift + rate / lambda) = 3 (-1 + 4) = 9.
  CHECK(mean_check("Y(3)", ends, 9.0).pass);
  CHECK(m.mean_increment() == doctest::Approx(3.0));
}

TEST_CASE("extending a path keeps its prefix") {
  LevyModel m;
  m.jump_rate = 3.0;
  m.jump_law = NormalLaw{0.0, 1.0};
  RngStream s(23, 0);
  JumpPath p = simulate_path(m, 2.0, s);
  const std::vector<double> before(p.jump_times().begin(), p.jump_times().end());
  extend_path(p, m, 10.0, s);
  CHECK(p.horizon() == 10.0);
  REQUIRE(p.jump_count() >= before.size());
  for (std::size_t k = 0; k < before.size(); ++k) CHECK(p.jump_times()[k] == before[k]);
  for (std::size_t k = before.size(); k < p.jump_count(); ++k) CHECK(p.jump_times()[k] > 2.0);
}

TEST_CASE("Brownian cache answers are consistent across refinements") {
  GaussianCache g(RngStream(31, 0));
  const double d02 = g.discounted(0.0, 2.0);
  const double w02 = g.increment(0.0, 2.0);
  // Refine inside (0, 2]: earlier answers must still hold.
  const double w01 = g.increment(0.0, 0.7);
  const double w12 = g.increment(0.7, 2.0);
  CHECK(w01 + w12 == doctest::Approx(w02).epsilon(1e-12));
  const double d01 = g.discounted(0.0, 0.7);
  const double d12 = g.discounted(0.7, 2.0);
  CHECK(d01 + std::exp(-0.7) * d12 == doctest::Approx(d02).epsilon(1e-12));
  CHECK(g.discounted(0.0, 2.0) == d02);
  CHECK(g.increment(1.0, 1.0) == 0.0);
}

TEST_CASE("Brownian cache has the Gaussian joint law after conditional splits") {
  // Ask for the coarse pair first, then split; the split marginals and
  // cross-covariances must match the unconditional law.
  const std::size_t n = 40'000;
  std::vector<double> w_half(n), d_one(n), w_one(n);
  const RngStream base(37, 0);
  for (std::size_t i = 0; i < n; ++i) {
    GaussianCache g(base.substream(i));
    d_one[i] = g.discounted(0.0, 1.0);
    w_one[i] = g.increment(0.0, 1.0);
    w_half[i] = g.increment(0.0, 0.5);
  }
  const double se = std::sqrt(2.0 / static_cast<double>(n));
  CHECK(variance_check("W(0.5)", w_half, 0.5).pass);
  CHECK(variance_check("int_0^1 e^-s dW", d_one, 0.5 * (1.0 - std::exp(-2.0))).pass);
  // cov(W(0.5), int_0^1 e^-s dW) = int_0^0.5 e^-s ds.
  CHECK(std::abs(cov(w_half, d_one) - (1.0 - std::exp(-0.5))) < 5.0 * se);
  CHECK(std::abs(cov(w_half, w_one) - 0.5) < 5.0 * se);
}

TEST_CASE("shifted Gaussian paths read the parent cache with an offset") {
  LevyModel m;
  m.gauss_var = 4.0;
  RngStream s(41, 0);
  const JumpPath p = simulate_path(m, 5.0, s);
  REQUIRE(p.has_gaussian());
  const JumpPath q = shift_path(p, 1.5);
  CHECK(q.gauss_cache() == p.gauss_cache());
  CHECK(q.gauss_increment(0.0, 2.0) == p.gauss_increment(1.5, 3.5));
  CHECK(path_value(q, 2.0) == doctest::Approx(path_value(p, 3.5) - path_value(p, 1.5)));
  CHECK_THROWS_AS(thin_path(p, JumpSet::at_least(1.0)), Error);
}

TEST_CASE("model labels") {
  LevyModel m;
  CHECK(describe(m) == "zero");
  m.jump_rate = 2.0;
  m.jump_law = ExponentialLaw{1.0};
  m.drift = 0.5;
  CHECK(describe(m) == "cp(2;Exp(1))+drift(0.5)");
  LevyModel bad;
  bad.gauss_var = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
