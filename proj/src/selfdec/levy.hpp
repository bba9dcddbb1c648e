#pragma once

#include <memory>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "selfdec/rng.hpp"

namespace selfdec {

/// Lévy process law: compound Poisson jumps + drift + Brownian part.
struct LevyModel {
  double jump_rate = 0.0;
  ScalarLaw jump_law = PointMassLaw{0.0};
  double drift = 0.0;
  double gauss_var = 0.0;

  void validate() const;
  bool has_gaussian() const noexcept { return gauss_var > 0.0; }
  /// No drift and no Gaussian part: the path only moves by jumps.
  bool purely_discontinuous() const noexcept { return drift == 0.0 && gauss_var == 0.0; }
  /// E[Y(1)].
  double mean_increment() const;
  /// Upper bound on E|Y(1)|.
  double mean_abs_increment_bound() const;
};

/// Short human-readable label, e.g. "cp(2;exp(1))+drift(0.5)".
std::string describe(const LevyModel& model);

/// Borel set of jump sizes bounded away from zero.
struct JumpSet {
  enum class Kind { kAbsAtLeast, kAtLeast, kInterval };

  Kind kind = Kind::kAbsAtLeast;
  double lo = 1.0;
  double hi = 0.0;  // used by kInterval only

  static JumpSet abs_at_least(double a);
  static JumpSet at_least(double a);
  static JumpSet interval(double a, double b);

  void validate() const;
  bool contains(double x) const noexcept;
};

/// Brownian motion realized lazily on a growing set of breakpoints.
///
/// For each elementary interval (a, b] the cache holds the pair
/// (W(b) - W(a), int_(a,b] e^{-(s-a)} dW(s)), which is jointly Gaussian.
/// New breakpoints inside an existing interval are filled in by sampling
/// from the conditional law given the stored pair, so earlier answers are
/// never contradicted. Mutation happens behind const accessors; a cache
/// must only be queried from one thread at a time.
class GaussianCache {
 public:
  explicit GaussianCache(RngStream stream) : stream_(stream) {}

  /// W(b) - W(a) for 0 <= a <= b.
  double increment(double a, double b) const;
  /// int_(a,b] e^{-(s-a)} dW(s) for 0 <= a <= b.
  double discounted(double a, double b) const;

  const RngStream& stream() const noexcept { return stream_; }
  std::size_t breakpoint_count() const noexcept { return knots_.size(); }

 private:
  struct Piece {
    double dw;
    double disc;  // int over the piece of e^{-(s - left)} dW(s)
  };

  /// Index of the knot equal to t, inserting it if needed.
  std::size_t ensure_knot(double t) const;

  mutable RngStream stream_;
  mutable std::vector<double> knots_{0.0};  // knots_[i] is the left end of pieces_[i]
  mutable std::vector<Piece> pieces_;       // pieces_.size() == knots_.size() - 1
};

/// One realized trajectory on (0, horizon].
///
/// Y(t) = drift * t + sum of jump sizes at times <= t + sqrt(gauss_var) W(t).
/// A path produced by shift_path shares its parent's Brownian cache and
/// reads it with a time offset.
class JumpPath {
 public:
  JumpPath() = default;
  /// Validates: horizon >= 0, times strictly increasing in (0, horizon],
  /// sizes finite and the same length as times.
  JumpPath(double horizon, std::vector<double> times, std::vector<double> sizes,
           double drift, double gauss_var = 0.0,
           std::shared_ptr<const GaussianCache> gauss = nullptr,
           double gauss_origin = 0.0);

  double horizon() const noexcept { return horizon_; }
  std::span<const double> jump_times() const noexcept { return times_; }
  std::span<const double> jump_sizes() const noexcept { return sizes_; }
  std::size_t jump_count() const noexcept { return times_.size(); }
  double drift() const noexcept { return drift_; }
  double gauss_var() const noexcept { return gauss_var_; }
  bool has_gaussian() const noexcept { return gauss_var_ > 0.0; }
  const std::shared_ptr<const GaussianCache>& gauss_cache() const noexcept { return gauss_; }
  double gauss_origin() const noexcept { return gauss_origin_; }

  /// sqrt(gauss_var) * (W(b) - W(a)) in path-local time.
  double gauss_increment(double a, double b) const;
  /// sqrt(gauss_var) * int_(a,b] e^{-(s-a)} dW(s) in path-local time.
  double gauss_discounted(double a, double b) const;

  /// Appends jumps on (horizon, new_horizon]. Used by extend_path.
  void append(double new_horizon, std::span<const double> times,
              std::span<const double> sizes);

 private:
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::vector<double> sizes_;
  double drift_ = 0.0;
  double gauss_var_ = 0.0;
  std::shared_ptr<const GaussianCache> gauss_;
  double gauss_origin_ = 0.0;
};

/// Simulates Y on (0, horizon]: Poisson(jump_rate) arrivals, i.i.d. sizes.
JumpPath simulate_path(const LevyModel& model, double horizon, RngStream& stream);

/// Continues an unshifted path simulated from `model` up to new_horizon.
/// Jumps on the added stretch come from `stream`, independent of the rest.
void extend_path(JumpPath& path, const LevyModel& model, double new_horizon,
                 RngStream& stream);

/// Y(t), right-continuous.
double path_value(const JumpPath& path, double t);
/// Y(t-), the left limit.
double path_value_left(const JumpPath& path, double t);

/// Y_tau(t) = Y(t + tau) - Y(tau) on (0, horizon - tau]. A jump at exactly
/// tau stays with the pre-tau part.
JumpPath shift_path(const JumpPath& path, double tau);

/// Splits the jumps by membership in `set`. The first part carries only the
/// jumps in the set; the second keeps the remaining jumps and the drift.
std::pair<JumpPath, JumpPath> thin_path(const JumpPath& path, const JumpSet& set);

}  // namespace selfdec
