#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "selfdec/decomposition.hpp"

namespace selfdec {

/// e^M by scaling and squaring with a diagonal Padé approximant of degree
/// 3, 5, 7, 9 or 13 chosen from the 1-norm (Higham 2005). Throws on
/// non-finite entries.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m);

/// int_0^t e^{-sQ} ds (= Q^{-1}(I - e^{-tQ}) for invertible Q).
Eigen::MatrixXd integrated_kernel(const Eigen::MatrixXd& q, double t);

/// Smallest real part over the eigenvalues of q.
double min_real_eigenvalue(const Eigen::MatrixXd& q);

/// Each coordinate is its own scalar Lévy process (jumps + drift).
struct IndependentCoordinates {
  std::vector<LevyModel> coords;
};
/// One scalar compound Poisson process pushed along a fixed direction, plus
/// a drift vector.
struct SharedDirection {
  LevyModel scalar;
  Eigen::VectorXd direction;
  Eigen::VectorXd drift;
};
using OperatorDriver = std::variant<IndependentCoordinates, SharedDirection>;

/// Q-selfdecomposable law int_(0,inf) e^{-tQ} dY(t) on R^d.
class OperatorModel {
 public:
  static constexpr int kMaxDimension = 16;
  static constexpr double kSpectralTolerance = 1e-12;

  /// Throws kSpectralCondition unless every eigenvalue of q has real part
  /// above kSpectralTolerance (so that e^{-tQ} -> 0).
  OperatorModel(Eigen::MatrixXd q, OperatorDriver driver);

  int dimension() const noexcept { return static_cast<int>(q_.rows()); }
  const Eigen::MatrixXd& q() const noexcept { return q_; }
  const OperatorDriver& driver() const noexcept { return driver_; }
  /// E[Y(1)].
  Eigen::VectorXd mean_increment() const;
  /// Q^{-1} E[Y(1)].
  Eigen::VectorXd mean_integral() const;

 private:
  Eigen::MatrixXd q_;
  OperatorDriver driver_;
};

/// R^d-valued compound Poisson path with drift. Event times are
/// nondecreasing in (0, horizon].
struct VectorPath {
  double horizon = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> jumps;
  Eigen::VectorXd drift;
};

VectorPath simulate_vector_path(const OperatorModel& model, double horizon, RngStream& stream);
void extend_vector_path(VectorPath& path, const OperatorModel& model, double new_horizon,
                        RngStream& stream);
VectorPath shift_vector_path(const VectorPath& path, double tau);

/// sum_{tau_k <= t} e^{-tau_k Q} dY_k + (int_0^t e^{-sQ} ds) drift.
Eigen::VectorXd eval_operator_integral(const VectorPath& path, const Eigen::MatrixXd& q,
                                       double t);

/// One draw of the operator integral truncated at policy.horizon.
Eigen::VectorXd sample_operator_integral(const OperatorModel& model,
                                         const TruncationPolicy& policy, RngStream& stream);

struct OperatorRecord {
  double tau = 0.0;
  Eigen::VectorXd x_tau;
  Eigen::MatrixXd discount;  // e^{-tau Q}
  Eigen::VectorXd x_prime;
  Eigen::VectorXd x_total;
};

/// X = X_tau + e^{-tau Q} X' on one realization. FirstJumpIn tests the
/// Euclidean norm of each jump vector against the set.
OperatorRecord operator_decompose(const OperatorModel& model, const StoppingRule& rule,
                                  const TruncationPolicy& policy, RngStream& stream,
                                  const DecomposeOptions& options = {});

/// ||x_total - (x_tau + discount x_prime)||_2.
double operator_residual(const OperatorRecord& record);

inline constexpr double kOperatorPathwiseTolerance = 1e-9;

}  // namespace selfdec
