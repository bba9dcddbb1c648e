#include <doctest.h>

#include <cmath>
#include <set>

#include "selfdec/error.hpp"
#include "selfdec/rng.hpp"
#include "selfdec/stats.hpp"

using namespace selfdec;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using B = RngStream::Block;
  CHECK(RngStream::philox(B{0, 0, 0, 0}, {0, 0}) ==
        B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(RngStream::philox(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(RngStream::philox(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream draws are a pure function of seed, stream id and counter") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // Restarting at a counter reproduces the tail of the sequence.
  RngStream full(42, 7);
  std::vector<std::uint64_t> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(full.next_u64());
  RngStream mid(42, 7, 5);
  for (int i = 5; i < 10; ++i) CHECK(mid.next_u64() == xs[static_cast<std::size_t>(i)]);

  // Different seeds, ids and substreams give different numbers.
  CHECK(RngStream(42, 7).next_u64() != RngStream(43, 7).next_u64());
  CHECK(RngStream(42, 7).next_u64() != RngStream(42, 8).next_u64());
  const RngStream base(1, 0);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(base.substream(i).next_u64());
  CHECK(firsts.size() == 1000);
  CHECK(base.substream(3).stream_id() == base.substream(3).stream_id());
}

TEST_CASE("uniforms are in the open unit interval with the right moments") {
  RngStream s(9, 0);
  Summary acc;
  std::vector<double> xs(200'000);
  for (auto& x : xs) {
    x = sample_uniform(s);
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
  const Summary sm = summarize(xs);
  CHECK(std::abs(sm.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 200'000.0));
  CHECK(std::abs(sm.var - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal, exponential and gamma samplers match their moments") {
  const std::size_t n = 200'000;
  RngStream s(11, 0);
  std::vector<double> z(n), e(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = sample_normal(s);
    e[i] = sample_exponential(2.0, s);
  }
  CHECK(mean_check("normal mean", z, 0.0).pass);
  CHECK(variance_check("normal var", z, 1.0).pass);
  CHECK(mean_check("exp mean", e, 0.5).pass);
  CHECK(variance_check("exp var", e, 0.25).pass);

  for (double shape : {0.3, 0.5, 1.0, 2.0, 7.5}) {
    CAPTURE(shape);
    std::vector<double> g(n);
    for (auto& x : g) x = sample_gamma(GammaParams(shape, 3.0), s);
    CHECK(mean_check("gamma mean", g, shape / 3.0).pass);
    CHECK(variance_check("gamma var", g, shape / 9.0).pass);
    CHECK(ecf_distance(g, GammaCf{shape, 3.0}, default_cf_grid()) < ecf_bound(n));
  }
}

TEST_CASE("gamma parameters are validated") {
  CHECK_THROWS_AS(GammaParams(0.0, 1.0), Error);
  CHECK_THROWS_AS(GammaParams(1.0, -1.0), Error);
  CHECK_THROWS_AS(GammaParams(std::nan(""), 1.0), Error);
}

TEST_CASE("poisson arrivals are increasing with Poisson counts") {
  RngStream s(5, 0);
  std::vector<double> counts;
  for (int i = 0; i < 400'000; ++i) {
    const auto t = sample_poisson_arrivals(3.0, 2.0, s);
    for (std::size_t k = 1; k < t.size(); ++k) REQUIRE(t[k] > t[k - 1]);
    if (!t.empty()) {
      REQUIRE(t.front() > 0.0);
      REQUIRE(t.back() <= 2.0);
    }
    counts.push_back(static_cast<double>(t.size()));
  }
  CHECK(mean_check("count mean", counts, 6.0).pass);
  CHECK(variance_check("count var", counts, 6.0).pass);
  CHECK_THROWS_AS(sample_poisson_arrivals(0.0, 5.0, s), Error);
}

TEST_CASE("scalar laws: validation, moments and support") {
  CHECK_THROWS_AS(validate(ExponentialLaw{0.0}), Error);
  CHECK_THROWS_AS(validate(UniformLaw{2.0, 1.0}), Error);
  CHECK_THROWS_AS(validate(NormalLaw{0.0, -1.0}), Error);
  CHECK_THROWS_AS(validate(TableLaw{{1.0}, {}}), Error);
  CHECK_THROWS_AS(validate(TableLaw{{1.0, 2.0}, {0.0, 0.0}}), Error);
  CHECK_THROWS_AS(validate(PowerUniformLaw{-1.0}), Error);

  CHECK(mean(GammaLaw{2.0, 4.0}) == doctest::Approx(0.5));
  CHECK(mean(UniformLaw{-1.0, 3.0}) == doctest::Approx(1.0));
  CHECK(mean(PowerUniformLaw{0.5}) == doctest::Approx(1.0 / 1.5));
  CHECK(mean(TableLaw{{1.0, 4.0}, {3.0, 1.0}}) == doctest::Approx(1.75));
  CHECK(mean_abs(NormalLaw{0.0, 1.0}) == doctest::Approx(std::sqrt(2.0 / 3.141592653589793)));
  CHECK(support(PowerUniformLaw{2.0}) == std::pair<double, double>{0.0, 1.0});
  CHECK(support(TableLaw{{-2.0, 5.0, 9.0}, {1.0, 1.0, 0.0}}) == std::pair<double, double>{-2.0, 5.0});

  RngStream s(3, 0);
  const ScalarLaw table = TableLaw{{1.0, 4.0}, {3.0, 1.0}};
  std::vector<double> xs(100'000);
  for (auto& x : xs) {
    x = sample(table, s);
    REQUIRE((x == 1.0 || x == 4.0));
  }
  CHECK(mean_check("table mean", xs, 1.75).pass);
  CHECK(sample(PointMassLaw{2.5}, s) == 2.5);
  CHECK(describe(GammaLaw{2.0, 1.0}) == "Gamma(2,1)");
}
