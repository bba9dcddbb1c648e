#pragma once

#include <vector>

#include "selfdec/levy.hpp"

namespace selfdec {

/// Finite horizon standing in for (0, inf). The discarded tail is
/// e^{-horizon} times an independent copy of the full integral.
struct TruncationPolicy {
  double horizon = 40.0;
  double tail_tol = 1e-17;

  void validate() const;
  /// horizon = ln(scale / tail_tol), scale = max(1, E|Y(1)|).
  static TruncationPolicy for_model(const LevyModel& model, double tail_tol = 1e-17);
};

/// sum_{tau_k <= t} e^{-tau_k} dY_k + drift (1 - e^{-t})
///   + sqrt(gauss_var) int_(0,t] e^{-s} dW(s).
double eval_jump_sum(const JumpPath& path, double t);

/// e^{-t} Y(t) + int_(0,t] Y(s-) e^{-s} ds with every segment integrated in
/// closed form. Rejects paths with a Gaussian part.
double eval_by_parts(const JumpPath& path, double t);

/// One draw of int_(0,T] e^{-s} dY(s) with T = policy.horizon.
double sample_discounted_integral(const LevyModel& model, const TruncationPolicy& policy,
                                  RngStream& stream);

/// n draws; draw i uses base.substream(i).
std::vector<double> sample_discounted_integrals(const LevyModel& model,
                                                const TruncationPolicy& policy,
                                                std::size_t n, const RngStream& base);

}  // namespace selfdec
