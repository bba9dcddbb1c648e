#include "selfdec/operator_sd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "selfdec/error.hpp"

namespace selfdec {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0,
                                        302702400.0,   30270240.0,   2162160.0,
                                        110880.0,      3960.0,       90.0,
                                        1.0};
constexpr std::array<double, 14> kPade13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norms for which each degree is accurate to unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
MatrixXd pade_low(const MatrixXd& a, const std::array<double, N>& b) {
  const auto n = a.rows();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd power = id;
  MatrixXd u_inner = MatrixXd::Zero(n, n);
  MatrixXd v = MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < N; j += 2) {
    v += b[j] * power;
    u_inner += b[j + 1] * power;
    power = power * a2;
  }
  const MatrixXd u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

MatrixXd pade13(const MatrixXd& a) {
  const auto& b = kPade13;
  const auto n = a.rows();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
           b[1] * id);
  const MatrixXd v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

[[noreturn]] void insufficient(const std::string& rule, double horizon) {
  std::ostringstream os;
  os << "insufficient horizon: rule " << rule << " did not occur by t=" << horizon;
  throw Error(ErrorCode::kInsufficientHorizon, os.str());
}

void check_driver_model(const LevyModel& m) {
  m.validate();
  require(!m.has_gaussian(), "operator drivers do not support a Gaussian part");
}

/// Appends jumps on (path.horizon, new_horizon], coordinate by coordinate.
void draw_vector_jumps(const OperatorModel& model, VectorPath& path, double new_horizon,
                       RngStream& stream) {
  const int d = model.dimension();
  std::vector<double> times;
  std::vector<VectorXd> jumps;
  auto collect = [&](const LevyModel& scalar, const auto& embed) {
    JumpPath piece(path.horizon, {}, {}, 0.0);
    if (new_horizon > path.horizon) extend_path(piece, scalar, new_horizon, stream);
    for (std::size_t k = 0; k < piece.jump_count(); ++k) {
      times.push_back(piece.jump_times()[k]);
      jumps.push_back(embed(piece.jump_sizes()[k]));
    }
  };
  if (const auto* ind = std::get_if<IndependentCoordinates>(&model.driver())) {
    for (int i = 0; i < d; ++i) {
      LevyModel jumps_only = ind->coords[static_cast<std::size_t>(i)];
      jumps_only.drift = 0.0;
      collect(jumps_only, [&](double x) {
        VectorXd v = VectorXd::Zero(d);
        v(i) = x;
        return v;
      });
    }
  } else {
    const auto& sh = std::get<SharedDirection>(model.driver());
    collect(sh.scalar, [&](double x) -> VectorXd { return x * sh.direction; });
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  for (std::size_t idx : order) {
    path.times.push_back(times[idx]);
    path.jumps.push_back(jumps[idx]);
  }
  path.horizon = new_horizon;
}

std::optional<double> vector_event(const StoppingRule& rule, const VectorPath& path) {
  if (std::holds_alternative<FirstJump>(rule.kind)) {
    if (path.times.empty()) return std::nullopt;
    return path.times.front();
  }
  if (const auto* r = std::get_if<KthJump>(&rule.kind)) {
    if (path.times.size() < r->k) return std::nullopt;
    return path.times[r->k - 1];
  }
  const auto& in = std::get<FirstJumpIn>(rule.kind);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    if (in.set.contains(path.jumps[k].norm())) return path.times[k];
  }
  return std::nullopt;
}

}  // namespace

MatrixXd matrix_exp(const MatrixXd& m) {
  require(m.rows() == m.cols(), "matrix_exp needs a square matrix");
  require(m.allFinite(), "matrix_exp needs finite entries");
  const auto n = m.rows();
  if (n == 0) return m;
  if (n == 1) return MatrixXd::Constant(1, 1, std::exp(m(0, 0)));
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= kTheta3) return pade_low(m, kPade3);
  if (norm1 <= kTheta5) return pade_low(m, kPade5);
  if (norm1 <= kTheta7) return pade_low(m, kPade7);
  if (norm1 <= kTheta9) return pade_low(m, kPade9);
  const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
  MatrixXd r = pade13(m / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

MatrixXd integrated_kernel(const MatrixXd& q, double t) {
  require(q.rows() == q.cols(), "kernel needs a square matrix");
  require(std::isfinite(t) && t >= 0.0, "kernel needs t >= 0");
  const auto n = q.rows();
  if (n == 1) {
    const double c = q(0, 0);
    return MatrixXd::Constant(1, 1, c == 0.0 ? t : -std::expm1(-c * t) / c);
  }
  // Top-right block of exp(t [[-Q, I], [0, 0]]).
  MatrixXd block = MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -t * q;
  block.topRightCorner(n, n) = t * MatrixXd::Identity(n, n);
  return matrix_exp(block).topRightCorner(n, n);
}

double min_real_eigenvalue(const MatrixXd& q) {
  Eigen::EigenSolver<MatrixXd> solver(q, false);
  require(solver.info() == Eigen::Success, "eigenvalue computation failed");
  return solver.eigenvalues().real().minCoeff();
}

OperatorModel::OperatorModel(MatrixXd q, OperatorDriver driver)
    : q_(std::move(q)), driver_(std::move(driver)) {
  const auto d = q_.rows();
  require(d >= 1 && d == q_.cols(), "Q must be a non-empty square matrix");
  require(d <= kMaxDimension, "Q dimension above the supported maximum of 16");
  require(q_.allFinite(), "Q must have finite entries");
  if (auto* ind = std::get_if<IndependentCoordinates>(&driver_)) {
    require(static_cast<Eigen::Index>(ind->coords.size()) == d,
            "driver needs one coordinate model per dimension");
    for (const auto& c : ind->coords) check_driver_model(c);
  } else {
    auto& sh = std::get<SharedDirection>(driver_);
    check_driver_model(sh.scalar);
    require(sh.scalar.drift == 0.0, "shared-direction scalar law carries no drift; use the drift vector");
    require(sh.direction.size() == d && sh.direction.allFinite(),
            "direction must be a finite d-vector");
    require(sh.drift.size() == d && sh.drift.allFinite(), "drift must be a finite d-vector");
  }
  const double re = min_real_eigenvalue(q_);
  if (!(re > kSpectralTolerance)) {
    std::ostringstream os;
    os << "spectral condition violated: e^{-tQ} -> 0 requires every eigenvalue of Q to have "
          "positive real part (smallest real part "
       << re << ")";
    throw Error(ErrorCode::kSpectralCondition, os.str());
  }
}

VectorXd OperatorModel::mean_increment() const {
  const auto d = q_.rows();
  if (const auto* ind = std::get_if<IndependentCoordinates>(&driver_)) {
    VectorXd m(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      m(i) = ind->coords[static_cast<std::size_t>(i)].mean_increment();
    }
    return m;
  }
  const auto& sh = std::get<SharedDirection>(driver_);
  return sh.scalar.mean_increment() * sh.direction + sh.drift;
}

VectorXd OperatorModel::mean_integral() const {
  return q_.partialPivLu().solve(mean_increment());
}

VectorPath simulate_vector_path(const OperatorModel& model, double horizon, RngStream& stream) {
  require(std::isfinite(horizon) && horizon > 0.0, "simulation horizon must be positive");
  VectorPath path;
  const int d = model.dimension();
  if (const auto* ind = std::get_if<IndependentCoordinates>(&model.driver())) {
    path.drift.resize(d);
    for (int i = 0; i < d; ++i) path.drift(i) = ind->coords[static_cast<std::size_t>(i)].drift;
  } else {
    path.drift = std::get<SharedDirection>(model.driver()).drift;
  }
  draw_vector_jumps(model, path, horizon, stream);
  return path;
}

void extend_vector_path(VectorPath& path, const OperatorModel& model, double new_horizon,
                        RngStream& stream) {
  require(std::isfinite(new_horizon) && new_horizon >= path.horizon,
          "extension horizon must not be below the current horizon");
  draw_vector_jumps(model, path, new_horizon, stream);
}

VectorPath shift_vector_path(const VectorPath& path, double tau) {
  require(std::isfinite(tau) && tau >= 0.0 && tau <= path.horizon, "shift outside [0, horizon]");
  VectorPath out;
  out.horizon = path.horizon - tau;
  out.drift = path.drift;
  const auto first =
      std::upper_bound(path.times.begin(), path.times.end(), tau) - path.times.begin();
  for (auto k = static_cast<std::size_t>(first); k < path.times.size(); ++k) {
    out.times.push_back(path.times[k] - tau);
    out.jumps.push_back(path.jumps[k]);
  }
  return out;
}

VectorXd eval_operator_integral(const VectorPath& path, const MatrixXd& q, double t) {
  require(std::isfinite(t) && t >= 0.0 && t <= path.horizon, "time outside [0, horizon]");
  VectorXd sum = VectorXd::Zero(q.rows());
  for (std::size_t k = 0; k < path.times.size() && path.times[k] <= t; ++k) {
    sum.noalias() += matrix_exp(-path.times[k] * q) * path.jumps[k];
  }
  sum.noalias() += integrated_kernel(q, t) * path.drift;
  return sum;
}

VectorXd sample_operator_integral(const OperatorModel& model, const TruncationPolicy& policy,
                                  RngStream& stream) {
  policy.validate();
  const VectorPath path = simulate_vector_path(model, policy.horizon, stream);
  return eval_operator_integral(path, model.q(), policy.horizon);
}

OperatorRecord operator_decompose(const OperatorModel& model, const StoppingRule& rule,
                                  const TruncationPolicy& policy, RngStream& stream,
                                  const DecomposeOptions& options) {
  rule.validate();
  policy.validate();
  const std::string name = rule.name();
  const double tail = policy.horizon;
  auto cover = [&](double tau) { return (tau + tail) * (1.0 + 1e-12) + 1e-12; };

  double tau = 0.0;
  VectorPath path;
  if (const auto* fixed = std::get_if<FixedTime>(&rule.kind)) {
    tau = fixed->t;
    if (tau > options.max_tau) insufficient(name, options.max_tau);
    path = simulate_vector_path(model, cover(tau), stream);
  } else if (const auto* indep = std::get_if<IndependentRandomTime>(&rule.kind)) {
    RngStream time_stream = stream.fork();
    tau = sample(indep->law, time_stream);
    if (tau > options.max_tau) insufficient(name, options.max_tau);
    path = simulate_vector_path(model, cover(tau), stream);
  } else {
    path = simulate_vector_path(model, tail, stream);
    std::optional<double> event = vector_event(rule, path);
    while (!event) {
      if (path.horizon >= options.max_tau) insufficient(name, path.horizon);
      extend_vector_path(path, model, std::min(options.max_tau, 2.0 * path.horizon), stream);
      event = vector_event(rule, path);
    }
    tau = *event;
    if (tau > options.max_tau) insufficient(name, options.max_tau);
    if (path.horizon < cover(tau)) extend_vector_path(path, model, cover(tau), stream);
  }

  OperatorRecord r;
  r.tau = tau;
  r.x_tau = eval_operator_integral(path, model.q(), tau);
  r.discount = matrix_exp(-tau * model.q());
  r.x_prime = eval_operator_integral(shift_vector_path(path, tau), model.q(), tail);
  r.x_total = eval_operator_integral(path, model.q(), tau + tail);
  return r;
}

double operator_residual(const OperatorRecord& record) {
  return (record.x_total - (record.x_tau + record.discount * record.x_prime)).norm();
}

}  // namespace selfdec
