#pragma once

#include <string>
#include <variant>
#include <vector>

#include "selfdec/discount_integral.hpp"
#include "selfdec/levy.hpp"

namespace selfdec {

struct FixedTime {
  double t;
};
struct FirstJump {};
struct FirstJumpIn {
  JumpSet set;
};
struct KthJump {
  std::size_t k;
};
/// Random time drawn from `law`, independent of the driving process.
struct IndependentRandomTime {
  ScalarLaw law;
};

/// Stopping time of the path's natural history, or an independent time.
struct StoppingRule {
  std::variant<FixedTime, FirstJump, FirstJumpIn, KthJump, IndependentRandomTime> kind;

  void validate() const;
  std::string name() const;
};

/// Realized stopping time on `path`.
///
/// Throws kInsufficientHorizon when the event does not happen on the
/// simulated horizon (never capped silently). IndependentRandomTime draws
/// from `stream`, which the caller keeps disjoint from the path's stream.
double evaluate_stopping(const StoppingRule& rule, const JumpPath& path, RngStream& stream);

/// One realization of X = X_tau + e^{-tau} X' on a single path.
struct DecompositionRecord {
  double tau = 0.0;
  double x_tau = 0.0;     // int_(0,tau] e^{-s} dY(s)
  double discount = 1.0;  // e^{-tau}
  double x_prime = 0.0;   // int_(0,T] e^{-s} dY_tau(s)
  double x_total = 0.0;   // int_(0,tau+T] e^{-s} dY(s)
};

struct DecomposeOptions {
  /// Largest stopping time accepted before kInsufficientHorizon is raised.
  double max_tau = 1000.0;
};

DecompositionRecord decompose(const LevyModel& model, const StoppingRule& rule,
                              const TruncationPolicy& policy, RngStream& stream,
                              const DecomposeOptions& options = {});

/// (tau, int_(0,tau] e^{-s} dY(s)) from a path simulated only as far as tau.
struct StoppedValue {
  double tau = 0.0;
  double x_tau = 0.0;
};
StoppedValue stopped_integral(const LevyModel& model, const StoppingRule& rule,
                              RngStream& stream, const DecomposeOptions& options = {});

/// |x_total - (x_tau + discount * x_prime)|.
double check_pathwise_identity(const DecompositionRecord& record);

/// Relative tolerance used for pathwise identities: residual <= tol (1 + |x|).
inline constexpr double kPathwiseTolerance = 1e-10;

struct DecompositionBatch {
  std::vector<DecompositionRecord> records;  // completed draws, in index order
  std::size_t discarded = 0;                 // draws whose stopping time exceeded the cap
};

/// n attempts; attempt i uses base.substream(i). Attempts that hit the cap are
/// dropped and counted.
DecompositionBatch decompose_batch(const LevyModel& model, const StoppingRule& rule,
                                   const TruncationPolicy& policy, std::size_t n,
                                   const RngStream& base, const DecomposeOptions& options = {});

/// Both sides of a first-jump factorization computed on one realization.
struct IdentityCheck {
  double tau = 0.0;      // stopping time
  double jump = 0.0;     // Y(tau), the value at the stopping time
  double shifted = 0.0;  // integral of the post-tau process over (0, T]
  double lhs = 0.0;      // full discounted integral over (0, tau + T]
  double rhs = 0.0;      // e^{-tau} jump + e^{-tau} shifted
  double series = 0.0;   // explicit sum over jumps of e^{-tau_k} dY_k

  double residual() const;
};

/// tau_0 = first time Y != 0 for a purely discontinuous model.
IdentityCheck first_value_identity(const LevyModel& model, const TruncationPolicy& policy,
                                   RngStream& stream, const DecomposeOptions& options = {});

/// Same factorization for the thinned process carrying only jumps in `set`.
IdentityCheck restricted_jump_identity(const LevyModel& model, const JumpSet& set,
                                       const TruncationPolicy& policy, RngStream& stream,
                                       const DecomposeOptions& options = {});

}  // namespace selfdec
