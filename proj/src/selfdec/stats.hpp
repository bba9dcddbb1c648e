#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace selfdec {

/// Limiting Kolmogorov distribution K(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}.
double kolmogorov_cdf(double x);

/// c with 1 - K(c) = significance.
double ks_critical_value(double significance);

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  double significance = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  bool pass = false;
};

/// sup_x |F_a(x) - F_b(x)| over the pooled sample.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Two-sample KS with the asymptotic threshold c(sig) sqrt((n + m) / (n m)).
/// Requires n, m >= 100 and significance in {0.01, 0.001}.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double significance);

struct GammaCf {
  double shape;
  double rate;
};
struct NormalCf {
  double mean;
  double var;
};
struct PointMassCf {
  double value;
};
using CharacteristicFn = std::variant<GammaCf, NormalCf, PointMassCf>;

std::complex<double> evaluate_cf(const CharacteristicFn& cf, double u);
std::complex<double> empirical_cf(std::span<const double> samples, double u);

/// max over grid of |empirical CF - cf|.
double ecf_distance(std::span<const double> samples, const CharacteristicFn& cf,
                    std::span<const double> grid);

/// Passing band for ecf_distance: 5 / sqrt(n).
inline double ecf_bound(std::size_t n) { return 5.0 / std::sqrt(static_cast<double>(n)); }

/// u in {-5, -4.5, ..., 5}.
std::vector<double> default_cf_grid();

struct IndependenceResult {
  std::string label;
  double max_abs_corr = 0.0;
  double bound = 0.0;  // 3 / sqrt(n)
  bool pass = false;
};

/// Max |corr(f(x), g(y))| over f, g in {clip to [-10, 10], 1{above median}}.
IndependenceResult independence_diagnostic(std::span<const double> x,
                                           std::span<const double> y,
                                           std::string label = {});

double pearson(std::span<const double> x, std::span<const double> y);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double se_mean() const;
};
Summary summarize(std::span<const double> xs);

/// observed vs expected with |observed - expected| <= k * std_error.
struct MomentCheck {
  std::string label;
  double observed = 0.0;
  double expected = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

MomentCheck mean_check(std::string label, std::span<const double> xs, double expected,
                       double k_se = 3.0);
/// Compares sample means of two independent samples.
MomentCheck mean_diff_check(std::string label, std::span<const double> a,
                            std::span<const double> b, double k_se = 3.0);
/// E[x^2] against its expected value.
MomentCheck second_moment_check(std::string label, std::span<const double> xs,
                                double expected, double k_se = 3.0);
/// Sample variance against its expected value, SE from the fourth moment.
MomentCheck variance_check(std::string label, std::span<const double> xs, double expected,
                           double k_se = 3.0);

/// value <= bound (or >= bound when `at_least`).
struct BoundCheck {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  bool at_least = false;
  bool pass = false;
};
BoundCheck at_most(std::string label, double value, double bound);
BoundCheck at_least(std::string label, double value, double bound);

struct StatReport {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<KsResult> ks;
  std::vector<MomentCheck> moments;
  std::vector<IndependenceResult> independence;
  std::vector<BoundCheck> bounds;
  /// Reports whose verdict is expected to be "fail" (negative controls)
  /// set this; verdict() then reports whether the failure happened.
  bool expect_fail = false;
  std::uint64_t seed = 0;
  std::string fingerprint;

  /// True iff every enabled check passed (inverted for negative controls).
  bool verdict() const;
  /// True iff every enabled check passed, ignoring expect_fail.
  bool all_checks_pass() const;
  /// name,n,m,D,threshold,checks,failed,verdict
  std::string csv_line() const;
  static std::string csv_header();
};

}  // namespace selfdec
