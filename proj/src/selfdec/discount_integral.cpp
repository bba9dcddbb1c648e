#include "selfdec/discount_integral.hpp"

#include <algorithm>
#include <cmath>

#include "selfdec/error.hpp"
#include "selfdec/parallel.hpp"

namespace selfdec {

void TruncationPolicy::validate() const {
  require(std::isfinite(horizon) && horizon > 0.0, "truncation horizon must be positive");
  require(std::isfinite(tail_tol) && tail_tol > 0.0 && tail_tol < 1.0,
          "tail_tol must lie in (0, 1)");
}

TruncationPolicy TruncationPolicy::for_model(const LevyModel& model, double tail_tol) {
  const double scale = std::max(1.0, model.mean_abs_increment_bound());
  TruncationPolicy p{std::log(scale / tail_tol), tail_tol};
  p.validate();
  return p;
}

double eval_jump_sum(const JumpPath& path, double t) {
  require(std::isfinite(t) && t >= 0.0 && t <= path.horizon(), "time outside [0, horizon]");
  const auto times = path.jump_times();
  const auto sizes = path.jump_sizes();
  double sum = 0.0;
  for (std::size_t k = 0; k < times.size() && times[k] <= t; ++k) {
    sum += std::exp(-times[k]) * sizes[k];
  }
  sum += path.drift() * -std::expm1(-t);
  if (path.has_gaussian()) sum += path.gauss_discounted(0.0, t);
  return sum;
}

double eval_by_parts(const JumpPath& path, double t) {
  require(!path.has_gaussian(),
          "by-parts evaluation needs a path without a Gaussian part");
  require(std::isfinite(t) && t >= 0.0 && t <= path.horizon(), "time outside [0, horizon]");
  const auto times = path.jump_times();
  const auto sizes = path.jump_sizes();
  const double drift = path.drift();

  // Pure-jump part J(s-) is constant on [tau_k, tau_{k+1}).
  double level = 0.0;
  double integral = 0.0;
  double left = 0.0;
  std::size_t k = 0;
  for (; k < times.size() && times[k] <= t; ++k) {
    integral += level * (std::exp(-left) - std::exp(-times[k]));
    level += sizes[k];
    left = times[k];
  }
  integral += level * (std::exp(-left) - std::exp(-t));

  // int_0^t drift s e^{-s} ds = drift (1 - e^{-t} (1 + t))
  const double e_t = std::exp(-t);
  integral += drift * (-std::expm1(-t) - t * e_t);

  return e_t * (drift * t + level) + integral;
}

double sample_discounted_integral(const LevyModel& model, const TruncationPolicy& policy,
                                  RngStream& stream) {
  policy.validate();
  const JumpPath path = simulate_path(model, policy.horizon, stream);
  return eval_jump_sum(path, policy.horizon);
}

std::vector<double> sample_discounted_integrals(const LevyModel& model,
                                                const TruncationPolicy& policy,
                                                std::size_t n, const RngStream& base) {
  model.validate();
  policy.validate();
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.substream(i);
    out[i] = sample_discounted_integral(model, policy, s);
  });
  return out;
}

}  // namespace selfdec
