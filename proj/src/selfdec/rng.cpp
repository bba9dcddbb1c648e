#include "selfdec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "selfdec/error.hpp"

namespace selfdec {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * std::uint64_t{b};
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

RngStream::Block RngStream::philox(Block ctr,
                                   std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t block = counter_ >> 1;
  if (block != cached_block_) {
    cache_ = philox(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_id_),
         static_cast<std::uint32_t>(stream_id_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    cached_block_ = block;
  }
  const std::size_t half = static_cast<std::size_t>(counter_ & 1u) * 2;
  ++counter_;
  return (std::uint64_t{cache_[half + 1]} << 32) | cache_[half];
}

RngStream RngStream::substream(std::uint64_t index) const noexcept {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(index)), 0);
}

GammaParams::GammaParams(double shape_, double rate_) : shape(shape_), rate(rate_) {
  require(finite(shape) && shape > 0.0, "gamma shape must be positive");
  require(finite(rate) && rate > 0.0, "gamma rate must be positive");
}

double sample_uniform(RngStream& stream) {
  // 53 random bits centred in their cell: the result lies in (0, 1).
  return (static_cast<double>(stream.next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_normal(RngStream& stream) {
  const double u1 = sample_uniform(stream);
  const double u2 = sample_uniform(stream);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_exponential(double rate, RngStream& stream) {
  require(finite(rate) && rate > 0.0, "exponential rate must be positive");
  return -std::log(sample_uniform(stream)) / rate;
}

double sample_gamma(const GammaParams& p, RngStream& stream) {
  const double shape = p.shape < 1.0 ? p.shape + 1.0 : p.shape;
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double draw;
  for (;;) {
    const double x = sample_normal(stream);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = sample_uniform(stream);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      draw = d * v;
      break;
    }
  }
  if (p.shape < 1.0) {
    draw *= std::exp(std::log(sample_uniform(stream)) / p.shape);
  }
  return draw / p.rate;
}

std::vector<double> sample_poisson_arrivals(double rate, double horizon,
                                            RngStream& stream) {
  require(finite(rate) && rate > 0.0, "Poisson rate must be positive");
  require(finite(horizon) && horizon > 0.0, "Poisson horizon must be positive");
  std::vector<double> times;
  double t = 0.0;
  for (;;) {
    t += sample_exponential(rate, stream);
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

void validate(const ScalarLaw& law) {
  struct Visitor {
    void operator()(const ExponentialLaw& l) const {
      require(finite(l.rate) && l.rate > 0.0, "exponential law: rate must be positive");
    }
    void operator()(const GammaLaw& l) const { GammaParams(l.shape, l.rate); }
    void operator()(const PointMassLaw& l) const {
      require(finite(l.value), "point mass: value must be finite");
    }
    void operator()(const UniformLaw& l) const {
      require(finite(l.lo) && finite(l.hi) && l.lo <= l.hi,
              "uniform law: need finite lo <= hi");
    }
    void operator()(const NormalLaw& l) const {
      require(finite(l.mean) && finite(l.sd) && l.sd >= 0.0,
              "normal law: need finite mean and sd >= 0");
    }
    void operator()(const PowerUniformLaw& l) const {
      require(finite(l.exponent) && l.exponent > 0.0,
              "power-uniform law: exponent must be positive");
    }
    void operator()(const TableLaw& l) const {
      require(!l.values.empty() && l.values.size() == l.weights.size(),
              "table law: values and weights must be non-empty and equal length");
      double total = 0.0;
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        require(finite(l.values[i]), "table law: values must be finite");
        require(finite(l.weights[i]) && l.weights[i] >= 0.0,
                "table law: weights must be finite and nonnegative");
        total += l.weights[i];
      }
      require(total > 0.0, "table law: total weight must be positive");
    }
  };
  std::visit(Visitor{}, law);
}

double sample(const ScalarLaw& law, RngStream& stream) {
  struct Visitor {
    RngStream& s;
    double operator()(const ExponentialLaw& l) const { return sample_exponential(l.rate, s); }
    double operator()(const GammaLaw& l) const {
      return sample_gamma(GammaParams(l.shape, l.rate), s);
    }
    double operator()(const PointMassLaw& l) const { return l.value; }
    double operator()(const UniformLaw& l) const {
      return l.lo + (l.hi - l.lo) * sample_uniform(s);
    }
    double operator()(const NormalLaw& l) const { return l.mean + l.sd * sample_normal(s); }
    double operator()(const PowerUniformLaw& l) const {
      return std::exp(l.exponent * std::log(sample_uniform(s)));
    }
    double operator()(const TableLaw& l) const {
      const double total = std::accumulate(l.weights.begin(), l.weights.end(), 0.0);
      double target = sample_uniform(s) * total;
      for (std::size_t i = 0; i + 1 < l.values.size(); ++i) {
        if (target < l.weights[i]) return l.values[i];
        target -= l.weights[i];
      }
      return l.values.back();
    }
  };
  return std::visit(Visitor{stream}, law);
}

double mean(const ScalarLaw& law) {
  struct Visitor {
    double operator()(const ExponentialLaw& l) const { return 1.0 / l.rate; }
    double operator()(const GammaLaw& l) const { return l.shape / l.rate; }
    double operator()(const PointMassLaw& l) const { return l.value; }
    double operator()(const UniformLaw& l) const { return 0.5 * (l.lo + l.hi); }
    double operator()(const NormalLaw& l) const { return l.mean; }
    double operator()(const PowerUniformLaw& l) const { return 1.0 / (1.0 + l.exponent); }
    double operator()(const TableLaw& l) const {
      double total = 0.0, acc = 0.0;
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        total += l.weights[i];
        acc += l.weights[i] * l.values[i];
      }
      return acc / total;
    }
  };
  return std::visit(Visitor{}, law);
}

double mean_abs(const ScalarLaw& law) {
  struct Visitor {
    double operator()(const ExponentialLaw& l) const { return 1.0 / l.rate; }
    double operator()(const GammaLaw& l) const { return l.shape / l.rate; }
    double operator()(const PointMassLaw& l) const { return std::abs(l.value); }
    double operator()(const UniformLaw& l) const {
      if (l.lo >= 0.0 || l.hi <= 0.0) return std::abs(0.5 * (l.lo + l.hi));
      return (l.lo * l.lo + l.hi * l.hi) / (2.0 * (l.hi - l.lo));
    }
    double operator()(const NormalLaw& l) const {
      if (l.sd == 0.0) return std::abs(l.mean);
      const double z = l.mean / l.sd;
      return l.sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) +
             l.mean * std::erf(z / std::numbers::sqrt2);
    }
    double operator()(const PowerUniformLaw& l) const { return 1.0 / (1.0 + l.exponent); }
    double operator()(const TableLaw& l) const {
      double total = 0.0, acc = 0.0;
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        total += l.weights[i];
        acc += l.weights[i] * std::abs(l.values[i]);
      }
      return acc / total;
    }
  };
  return std::visit(Visitor{}, law);
}

std::pair<double, double> support(const ScalarLaw& law) {
  static constexpr double inf = std::numeric_limits<double>::infinity();
  struct Visitor {
    std::pair<double, double> operator()(const ExponentialLaw&) const { return {0.0, inf}; }
    std::pair<double, double> operator()(const GammaLaw&) const { return {0.0, inf}; }
    std::pair<double, double> operator()(const PointMassLaw& l) const {
      return {l.value, l.value};
    }
    std::pair<double, double> operator()(const UniformLaw& l) const { return {l.lo, l.hi}; }
    std::pair<double, double> operator()(const NormalLaw& l) const {
      if (l.sd == 0.0) return {l.mean, l.mean};
      return {-inf, inf};
    }
    std::pair<double, double> operator()(const PowerUniformLaw&) const { return {0.0, 1.0}; }
    std::pair<double, double> operator()(const TableLaw& l) const {
      double lo = inf, hi = -inf;
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        if (l.weights[i] <= 0.0) continue;
        lo = std::min(lo, l.values[i]);
        hi = std::max(hi, l.values[i]);
      }
      return {lo, hi};
    }
  };
  return std::visit(Visitor{}, law);
}

std::string describe(const ScalarLaw& law) {
  std::ostringstream os;
  os.precision(15);
  struct Visitor {
    std::ostringstream& os;
    void operator()(const ExponentialLaw& l) const { os << "Exp(" << l.rate << ")"; }
    void operator()(const GammaLaw& l) const {
      os << "Gamma(" << l.shape << "," << l.rate << ")";
    }
    void operator()(const PointMassLaw& l) const { os << "Delta(" << l.value << ")"; }
    void operator()(const UniformLaw& l) const {
      os << "Uniform(" << l.lo << "," << l.hi << ")";
    }
    void operator()(const NormalLaw& l) const {
      os << "Normal(" << l.mean << "," << l.sd << ")";
    }
    void operator()(const PowerUniformLaw& l) const { os << "U^" << l.exponent; }
    void operator()(const TableLaw& l) const { os << "Table[" << l.values.size() << "]"; }
  };
  std::visit(Visitor{os}, law);
  return os.str();
}

}  // namespace selfdec
