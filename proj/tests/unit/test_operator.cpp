#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "selfdec/error.hpp"
#include "selfdec/operator_sd.hpp"
#include "selfdec/stats.hpp"

using namespace selfdec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double rel_err(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

MatrixXd sample_q() {
  MatrixXd q(2, 2);
  q << 1.0, 0.5, -0.3, 2.0;
  return q;
}

LevyModel cp(double rate, double exp_rate) {
  LevyModel m;
  m.jump_rate = rate;
  m.jump_law = ExponentialLaw{exp_rate};
  return m;
}

}  // namespace

TEST_CASE("matrix exponential matches the reference implementation") {
  RngStream s(1, 0);
  for (int d : {1, 2, 3, 5, 8}) {
    for (double scale : {1e-3, 0.3, 2.0, 15.0, 60.0}) {
      MatrixXd m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scale * (2.0 * sample_uniform(s) - 1.0);
      const MatrixXd ref = m.exp();
      CHECK(rel_err(matrix_exp(m), ref) <= 1e-11 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("matrix exponential special cases") {
  for (double x : {-30.0, -1.0, 0.0, 1e-8, 2.5}) {
    const MatrixXd m = MatrixXd::Constant(1, 1, x);
    CHECK(matrix_exp(m)(0, 0) == doctest::Approx(std::exp(x)).epsilon(1e-14));
  }
  MatrixXd nil = MatrixXd::Zero(3, 3);
  nil(0, 1) = 2.0;
  nil(1, 2) = 3.0;
  MatrixXd expect = MatrixXd::Identity(3, 3) + nil;
  expect(0, 2) = 3.0;  // N^2 / 2
  CHECK(rel_err(matrix_exp(nil), expect) <= 1e-15);
  CHECK_THROWS_AS(matrix_exp(MatrixXd::Constant(2, 2, NAN)), Error);
  CHECK_THROWS_AS(matrix_exp(MatrixXd::Zero(2, 3)), Error);
}

TEST_CASE("integrated kernel equals Q^-1 (I - e^{-tQ})") {
  const MatrixXd q = sample_q();
  for (double t : {0.0, 0.1, 1.0, 7.5}) {
    const MatrixXd expect =
        q.inverse() * (MatrixXd::Identity(2, 2) - (-t * q).exp());
    CHECK(rel_err(integrated_kernel(q, t), expect) <= 1e-12);
  }
  CHECK(integrated_kernel(MatrixXd::Constant(1, 1, 2.0), 0.5)(0, 0) ==
        doctest::Approx(-std::expm1(-1.0) / 2.0).epsilon(1e-15));
  CHECK(integrated_kernel(MatrixXd::Zero(1, 1), 0.5)(0, 0) == 0.5);
  // Singular Q still has a finite kernel: for Q = 0 it is t I.
  CHECK(rel_err(integrated_kernel(MatrixXd::Zero(2, 2), 3.0), 3.0 * MatrixXd::Identity(2, 2)) <=
        1e-14);
}

TEST_CASE("spectral condition gate") {
  const IndependentCoordinates drv{{cp(1.0, 1.0), cp(1.0, 1.0)}};
  CHECK_NOTHROW(OperatorModel(sample_q(), drv));
  auto code = [&](const MatrixXd& q) {
    try {
      OperatorModel m(q, drv);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  MatrixXd neg(2, 2);
  neg << -1.0, 0.0, 0.0, 2.0;
  CHECK(code(neg) == ErrorCode::kSpectralCondition);
  MatrixXd rot(2, 2);  // eigenvalues +-i: no decay
  rot << 0.0, 1.0, -1.0, 0.0;
  CHECK(code(rot) == ErrorCode::kSpectralCondition);
  MatrixXd sing(2, 2);
  sing << 1.0, 1.0, 1.0, 1.0;
  CHECK(code(sing) == ErrorCode::kSpectralCondition);
  CHECK(min_real_eigenvalue(sample_q()) > 0.0);
  CHECK_THROWS_AS(OperatorModel(MatrixXd::Identity(3, 3), drv), Error);  // wrong driver size
}

TEST_CASE("one-dimensional operator integral agrees with the scalar one") {
  const JumpPath p(6.0, {0.4, 2.2, 5.0}, {1.0, -0.5, 2.0}, 0.3);
  VectorPath v;
  v.horizon = 6.0;
  v.times = {0.4, 2.2, 5.0};
  for (double x : {1.0, -0.5, 2.0}) v.jumps.push_back(VectorXd::Constant(1, x));
  v.drift = VectorXd::Constant(1, 0.3);
  const MatrixXd one = MatrixXd::Identity(1, 1);
  for (double t : {0.1, 2.2, 6.0}) {
    CHECK(eval_operator_integral(v, one, t)(0) ==
          doctest::Approx(eval_jump_sum(p, t)).epsilon(1e-13));
  }
}

TEST_CASE("operator decomposition identity holds pathwise") {
  const OperatorModel model(sample_q(), IndependentCoordinates{{cp(2.0, 1.0), cp(1.0, 2.0)}});
  const std::vector<StoppingRule> rules = {
      {FirstJump{}}, {FixedTime{0.7}}, {IndependentRandomTime{ExponentialLaw{1.0}}},
      {FirstJumpIn{JumpSet::abs_at_least(1.0)}}};
  const RngStream base(3, 0);
  for (const auto& rule : rules) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 300; ++i) {
      RngStream s = base.substream(i);
      const auto r = operator_decompose(model, rule, TruncationPolicy{}, s);
      worst = std::max(worst, operator_residual(r) / (1.0 + r.x_total.norm()));
      CHECK(rel_err(r.discount, (-r.tau * model.q()).exp()) <= 1e-12);
    }
    CHECK(worst <= kOperatorPathwiseTolerance);
  }
}

TEST_CASE("operator integral mean is Q^-1 E Y(1)") {
  VectorXd dir(2);
  dir << 1.0, -0.5;
  const OperatorModel model(sample_q(), SharedDirection{cp(3.0, 1.0), dir, VectorXd::Constant(2, 0.2)});
  const VectorXd mu = model.mean_integral();
  CHECK(rel_err(mu, sample_q().inverse() * (3.0 * dir + VectorXd::Constant(2, 0.2))) <= 1e-14);
  const std::size_t n = 20'000;
  std::vector<double> c0(n), c1(n);
  const RngStream base(4, 0);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream s = base.substream(i);
    const VectorXd x = sample_operator_integral(model, TruncationPolicy{}, s);
    c0[i] = x(0);
    c1[i] = x(1);
  }
  CHECK(mean_check("x0", c0, mu(0)).pass);
  CHECK(mean_check("x1", c1, mu(1)).pass);
}

TEST_CASE("diagonal Q decouples into scalar gamma laws") {
  // Q = diag(1, 1) with independent cp(a; Exp(l)) coordinates gives
  // independent Gamma(a, l) coordinates.
  const OperatorModel model(MatrixXd::Identity(2, 2),
                            IndependentCoordinates{{cp(2.0, 1.0), cp(0.5, 3.0)}});
  const std::size_t n = 30'000;
  std::vector<double> c0(n), c1(n);
  const RngStream base(5, 0);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream s = base.substream(i);
    const VectorXd x = sample_operator_integral(model, TruncationPolicy{}, s);
    c0[i] = x(0);
    c1[i] = x(1);
  }
  CHECK(ecf_distance(c0, GammaCf{2.0, 1.0}, default_cf_grid()) <= ecf_bound(n));
  CHECK(ecf_distance(c1, GammaCf{0.5, 3.0}, default_cf_grid()) <= ecf_bound(n));
  CHECK(independence_diagnostic(c0, c1).pass);
}

TEST_CASE("Gaussian drivers are rejected") {
  LevyModel g;
  g.gauss_var = 1.0;
  CHECK_THROWS_AS(OperatorModel(MatrixXd::Identity(1, 1), IndependentCoordinates{{g}}), Error);
}
