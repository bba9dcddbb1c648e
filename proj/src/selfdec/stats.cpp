#include "selfdec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "selfdec/error.hpp"

namespace selfdec {

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  // The alternating series converges fast for x >~ 0.3; below that use the
  // Jacobi-transformed form sqrt(2 pi)/x sum e^{-(2k-1)^2 pi^2 / (8 x^2)}.
  if (x < 1.0) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(-odd * odd * pi2 / (8.0 * x * x));
    }
    return std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

double ks_critical_value(double significance) {
  require(significance > 0.0 && significance < 1.0, "significance must lie in (0, 1)");
  double lo = 0.2, hi = 6.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - kolmogorov_cdf(mid) > significance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ks_statistic(std::span<const double> a_in, std::span<const double> b_in) {
  std::vector<double> a(a_in.begin(), a_in.end());
  std::vector<double> b(b_in.begin(), b_in.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double significance) {
  require(a.size() >= 100 && b.size() >= 100, "KS test needs at least 100 samples per side");
  require(significance == 0.01 || significance == 0.001,
          "KS significance must be 0.01 or 0.001");
  KsResult r;
  r.n = a.size();
  r.m = b.size();
  r.significance = significance;
  r.statistic = ks_statistic(a, b);
  const double n = static_cast<double>(r.n), m = static_cast<double>(r.m);
  r.threshold = ks_critical_value(significance) * std::sqrt((n + m) / (n * m));
  r.pass = r.statistic < r.threshold;
  return r;
}

// ---------------------------------------------------------------------------

std::complex<double> evaluate_cf(const CharacteristicFn& cf, double u) {
  struct Visitor {
    double u;
    std::complex<double> operator()(const GammaCf& g) const {
      return std::pow(std::complex<double>(1.0, -u / g.rate), -g.shape);
    }
    std::complex<double> operator()(const NormalCf& g) const {
      return std::exp(std::complex<double>(-0.5 * g.var * u * u, g.mean * u));
    }
    std::complex<double> operator()(const PointMassCf& g) const {
      return std::polar(1.0, g.value * u);
    }
  };
  return std::visit(Visitor{u}, cf);
}

std::complex<double> empirical_cf(std::span<const double> samples, double u) {
  double re = 0.0, im = 0.0;
  for (double x : samples) {
    re += std::cos(u * x);
    im += std::sin(u * x);
  }
  const double n = static_cast<double>(samples.size());
  return {re / n, im / n};
}

double ecf_distance(std::span<const double> samples, const CharacteristicFn& cf,
                    std::span<const double> grid) {
  require(!grid.empty(), "CF grid must be non-empty");
  require(!samples.empty(), "ECF needs samples");
  double d = 0.0;
  for (double u : grid) {
    require(std::isfinite(u), "CF grid values must be finite");
    d = std::max(d, std::abs(empirical_cf(samples, u) - evaluate_cf(cf, u)));
  }
  return d;
}

std::vector<double> default_cf_grid() {
  std::vector<double> g;
  for (int i = -10; i <= 10; ++i) g.push_back(0.5 * i);
  return g;
}

// ---------------------------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "correlation needs paired samples of equal length");
  const Summary sx = summarize(x), sy = summarize(y);
  if (sx.var <= 0.0 || sy.var <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - sx.mean) * (y[i] - sy.mean);
  acc /= static_cast<double>(x.size() - 1);
  return acc / std::sqrt(sx.var * sy.var);
}

namespace {

double median(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<std::vector<double>> transforms(std::span<const double> xs) {
  std::vector<double> clipped(xs.size()), above(xs.size());
  const double med = median(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    clipped[i] = std::clamp(xs[i], -10.0, 10.0);
    above[i] = xs[i] > med ? 1.0 : 0.0;
  }
  return {std::move(clipped), std::move(above)};
}

}  // namespace

IndependenceResult independence_diagnostic(std::span<const double> x,
                                           std::span<const double> y, std::string label) {
  require(x.size() == y.size(), "independence diagnostic: length mismatch");
  require(x.size() >= 1000, "independence diagnostic needs n >= 1000");
  IndependenceResult r;
  r.label = std::move(label);
  const auto fx = transforms(x);
  const auto gy = transforms(y);
  for (const auto& f : fx) {
    for (const auto& g : gy) {
      r.max_abs_corr = std::max(r.max_abs_corr, std::abs(pearson(f, g)));
    }
  }
  r.bound = 3.0 / std::sqrt(static_cast<double>(x.size()));
  r.pass = r.max_abs_corr <= r.bound;
  return r;
}

// ---------------------------------------------------------------------------

double Summary::se_mean() const {
  return n > 0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.var = s.n > 1 ? m2 / static_cast<double>(s.n - 1) : 0.0;
  return s;
}

namespace {

MomentCheck finish(std::string label, double observed, double expected, double se,
                   double k_se) {
  MomentCheck c;
  c.label = std::move(label);
  c.observed = observed;
  c.expected = expected;
  c.std_error = se;
  c.tolerance = k_se * se;
  c.pass = std::abs(observed - expected) <= c.tolerance;
  return c;
}

}  // namespace

MomentCheck mean_check(std::string label, std::span<const double> xs, double expected,
                       double k_se) {
  const Summary s = summarize(xs);
  return finish(std::move(label), s.mean, expected, s.se_mean(), k_se);
}

MomentCheck mean_diff_check(std::string label, std::span<const double> a,
                            std::span<const double> b, double k_se) {
  const Summary sa = summarize(a), sb = summarize(b);
  const double se = std::sqrt(sa.var / static_cast<double>(sa.n) +
                              sb.var / static_cast<double>(sb.n));
  return finish(std::move(label), sa.mean - sb.mean, 0.0, se, k_se);
}

MomentCheck second_moment_check(std::string label, std::span<const double> xs,
                                double expected, double k_se) {
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = xs[i] * xs[i];
  const Summary s = summarize(sq);
  return finish(std::move(label), s.mean, expected, s.se_mean(), k_se);
}

MomentCheck variance_check(std::string label, std::span<const double> xs, double expected,
                           double k_se) {
  const Summary s = summarize(xs);
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(s.n);
  const double se = std::sqrt(std::max(0.0, m4 - s.var * s.var) / static_cast<double>(s.n));
  return finish(std::move(label), s.var, expected, se, k_se);
}

BoundCheck at_most(std::string label, double value, double bound) {
  return {std::move(label), value, bound, false, value <= bound};
}

BoundCheck at_least(std::string label, double value, double bound) {
  return {std::move(label), value, bound, true, value >= bound};
}

// ---------------------------------------------------------------------------

bool StatReport::all_checks_pass() const {
  if (ks && !ks->pass) return false;
  for (const auto& m : moments) {
    if (!m.pass) return false;
  }
  for (const auto& i : independence) {
    if (!i.pass) return false;
  }
  for (const auto& b : bounds) {
    if (!b.pass) return false;
  }
  return true;
}

bool StatReport::verdict() const { return all_checks_pass() != expect_fail; }

std::string StatReport::csv_header() { return "name,n,m,ks_D,ks_threshold,checks,failed,verdict"; }

std::string StatReport::csv_line() const {
  std::size_t total = 0, failed = 0;
  auto count = [&](bool pass) {
    ++total;
    if (!pass) ++failed;
  };
  if (ks) count(ks->pass);
  for (const auto& m : moments) count(m.pass);
  for (const auto& i : independence) count(i.pass);
  for (const auto& b : bounds) count(b.pass);
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%zu,%zu,%.17g,%.17g,%zu,%zu,%s", n, m,
                ks ? ks->statistic : 0.0, ks ? ks->threshold : 0.0, total, failed,
                verdict() ? "pass" : "fail");
  if (name.find_first_of(",\"\n") == std::string::npos) return name + buf;
  std::string quoted = "\"";
  for (char ch : name) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"" + buf;
}

}  // namespace selfdec
