#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace selfdec {

/// Counter-based random stream built on Philox4x32-10.
///
/// Draw number `i` of a stream is a pure function of (seed, stream_id, i),
/// so batches of independent streams give the same numbers no matter how
/// the work is scheduled. A stream is a small value; copy it to fork, but do
/// not share one instance between threads.
class RngStream {
 public:
  using Block = std::array<std::uint32_t, 4>;

  RngStream(std::uint64_t seed, std::uint64_t stream_id,
            std::uint64_t counter = 0) noexcept
      : seed_(seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Next 64 random bits; advances the counter by one.
  std::uint64_t next_u64();

  /// Independent child stream for task `index` (same seed, hashed stream id).
  RngStream substream(std::uint64_t index) const noexcept;

  /// Child stream whose id is the next draw of this one; advances the counter.
  RngStream fork() { return RngStream(seed_, next_u64()); }

  /// Raw Philox4x32-10 block function.
  static Block philox(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  Block cache_{};
};

struct GammaParams {
  double shape;
  double rate;

  /// Throws kInvalidArgument unless shape > 0 and rate > 0.
  GammaParams(double shape, double rate);
};

/// Uniform on the open interval (0, 1); never returns 0 or 1.
double sample_uniform(RngStream& stream);

/// Standard normal via Box-Muller (consumes two uniforms).
double sample_normal(RngStream& stream);

double sample_exponential(double rate, RngStream& stream);

/// Marsaglia-Tsang squeeze/rejection for shape >= 1. For shape < 1 draws
/// at shape + 1 and multiplies by U^(1/shape); that boost is the beta-gamma
/// identity gamma(a) = U^(1/a) gamma(a+1).
double sample_gamma(const GammaParams& p, RngStream& stream);

/// Arrival times of a rate-`rate` Poisson process on (0, horizon], strictly
/// increasing.
std::vector<double> sample_poisson_arrivals(double rate, double horizon,
                                            RngStream& stream);

// Scalar laws used as jump-size laws and as factors of affine pair laws.

struct ExponentialLaw {
  double rate;
};
struct GammaLaw {
  double shape;
  double rate;
};
struct PointMassLaw {
  double value;
};
struct UniformLaw {
  double lo;
  double hi;
};
struct NormalLaw {
  double mean;
  double sd;
};
/// U^exponent with U uniform on (0,1). exponent = 1/a gives Beta(a, 1).
struct PowerUniformLaw {
  double exponent;
};
/// Finite table of values drawn with the given (unnormalized) weights.
struct TableLaw {
  std::vector<double> values;
  std::vector<double> weights;
};

using ScalarLaw = std::variant<ExponentialLaw, GammaLaw, PointMassLaw,
                               UniformLaw, NormalLaw, PowerUniformLaw, TableLaw>;

/// Throws kInvalidArgument for non-finite or out-of-domain parameters.
void validate(const ScalarLaw& law);
double sample(const ScalarLaw& law, RngStream& stream);
double mean(const ScalarLaw& law);
double mean_abs(const ScalarLaw& law);
/// Smallest and largest points of the support (may be infinite).
std::pair<double, double> support(const ScalarLaw& law);
std::string describe(const ScalarLaw& law);

}  // namespace selfdec
