#include "selfdec/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "selfdec/error.hpp"

namespace selfdec {

void LevyModel::validate() const {
  require(std::isfinite(jump_rate) && jump_rate >= 0.0, "jump_rate must be finite and >= 0");
  require(std::isfinite(drift), "drift must be finite");
  require(std::isfinite(gauss_var) && gauss_var >= 0.0, "gauss_var must be finite and >= 0");
  selfdec::validate(jump_law);
}

double LevyModel::mean_increment() const {
  return drift + (jump_rate > 0.0 ? jump_rate * mean(jump_law) : 0.0);
}

double LevyModel::mean_abs_increment_bound() const {
  return std::abs(drift) + (jump_rate > 0.0 ? jump_rate * mean_abs(jump_law) : 0.0) +
         std::sqrt(gauss_var * 2.0 / std::numbers::pi);
}

JumpSet JumpSet::abs_at_least(double a) {
  JumpSet s{Kind::kAbsAtLeast, a, 0.0};
  s.validate();
  return s;
}

JumpSet JumpSet::at_least(double a) {
  JumpSet s{Kind::kAtLeast, a, 0.0};
  s.validate();
  return s;
}

JumpSet JumpSet::interval(double a, double b) {
  JumpSet s{Kind::kInterval, a, b};
  s.validate();
  return s;
}

void JumpSet::validate() const {
  require(std::isfinite(lo) && lo > 0.0,
          "jump set must be separated from zero (lower bound a > 0)");
  if (kind == Kind::kInterval) {
    require(std::isfinite(hi) && hi >= lo, "jump set interval needs a <= b");
  }
}

bool JumpSet::contains(double x) const noexcept {
  switch (kind) {
    case Kind::kAbsAtLeast:
      return std::abs(x) >= lo;
    case Kind::kAtLeast:
      return x >= lo;
    case Kind::kInterval:
      return x >= lo && x <= hi;
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

struct Cov2 {
  double xx, xy, yy;
};

/// Covariance of (W(h), int_(0,h] e^{-s} dW(s)).
Cov2 piece_cov(double h) {
  return {h, -std::expm1(-h), -0.5 * std::expm1(-2.0 * h)};
}

}  // namespace

std::size_t GaussianCache::ensure_knot(double t) const {
  require(std::isfinite(t) && t >= 0.0, "Brownian cache: time must be finite and >= 0");
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it != knots_.end() && *it == t) {
    return static_cast<std::size_t>(it - knots_.begin());
  }
  if (it == knots_.end()) {
    const Cov2 c = piece_cov(t - knots_.back());
    const double l11 = std::sqrt(c.xx);
    const double l21 = c.xy / l11;
    const double l22 = std::sqrt(std::max(0.0, c.yy - l21 * l21));
    const double z1 = sample_normal(stream_);
    const double z2 = sample_normal(stream_);
    pieces_.push_back({l11 * z1, l21 * z1 + l22 * z2});
    knots_.push_back(t);
    return knots_.size() - 1;
  }

  // Split piece i = (a, b] at t, conditioning on its stored pair.
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double a = knots_[i];
  const double b = knots_[i + 1];
  const Piece whole = pieces_[i];
  const Cov2 s1 = piece_cov(t - a);
  const double g = std::exp(-(t - a));
  Cov2 s2 = piece_cov(b - t);
  s2.xy *= g;
  s2.yy *= g * g;
  const Cov2 tot{s1.xx + s2.xx, s1.xy + s2.xy, s1.yy + s2.yy};
  const double det = tot.xx * tot.yy - tot.xy * tot.xy;

  double m_dw = 0.0, m_disc = 0.0;
  Cov2 cond = s1;
  if (det > 0.0) {
    // K = s1 * tot^{-1}
    const double k11 = (s1.xx * tot.yy - s1.xy * tot.xy) / det;
    const double k12 = (-s1.xx * tot.xy + s1.xy * tot.xx) / det;
    const double k21 = (s1.xy * tot.yy - s1.yy * tot.xy) / det;
    const double k22 = (-s1.xy * tot.xy + s1.yy * tot.xx) / det;
    m_dw = k11 * whole.dw + k12 * whole.disc;
    m_disc = k21 * whole.dw + k22 * whole.disc;
    cond = {s1.xx - (k11 * s1.xx + k12 * s1.xy), s1.xy - (k11 * s1.xy + k12 * s1.yy),
            s1.yy - (k21 * s1.xy + k22 * s1.yy)};
  }
  const double l11 = std::sqrt(std::max(0.0, cond.xx));
  const double l21 = l11 > 0.0 ? cond.xy / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, cond.yy - l21 * l21));
  const double z1 = sample_normal(stream_);
  const double z2 = sample_normal(stream_);
  const Piece left{m_dw + l11 * z1, m_disc + l21 * z1 + l22 * z2};
  const Piece right{whole.dw - left.dw, (whole.disc - left.disc) / g};

  pieces_[i] = left;
  pieces_.insert(pieces_.begin() + static_cast<std::ptrdiff_t>(i) + 1, right);
  knots_.insert(knots_.begin() + static_cast<std::ptrdiff_t>(i) + 1, t);
  return i + 1;
}

double GaussianCache::increment(double a, double b) const {
  require(a <= b, "Brownian cache: need a <= b");
  if (a == b) return 0.0;
  const std::size_t ia = ensure_knot(a);
  const std::size_t ib = ensure_knot(b);
  double sum = 0.0;
  for (std::size_t i = ia; i < ib; ++i) sum += pieces_[i].dw;
  return sum;
}

double GaussianCache::discounted(double a, double b) const {
  require(a <= b, "Brownian cache: need a <= b");
  if (a == b) return 0.0;
  const std::size_t ia = ensure_knot(a);
  const std::size_t ib = ensure_knot(b);
  double sum = 0.0;
  for (std::size_t i = ia; i < ib; ++i) {
    sum += std::exp(-(knots_[i] - a)) * pieces_[i].disc;
  }
  return sum;
}

// ---------------------------------------------------------------------------

JumpPath::JumpPath(double horizon, std::vector<double> times, std::vector<double> sizes,
                   double drift, double gauss_var,
                   std::shared_ptr<const GaussianCache> gauss, double gauss_origin)
    : horizon_(horizon),
      times_(std::move(times)),
      sizes_(std::move(sizes)),
      drift_(drift),
      gauss_var_(gauss_var),
      gauss_(std::move(gauss)),
      gauss_origin_(gauss_origin) {
  require(std::isfinite(horizon_) && horizon_ >= 0.0, "path horizon must be >= 0");
  require(times_.size() == sizes_.size(), "jump times and sizes differ in length");
  require(std::isfinite(drift_), "path drift must be finite");
  require(std::isfinite(gauss_var_) && gauss_var_ >= 0.0, "path gauss_var must be >= 0");
  require(gauss_var_ == 0.0 || gauss_ != nullptr,
          "a path with a Gaussian part needs a Brownian cache");
  double prev = 0.0;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    require(times_[k] > prev && times_[k] <= horizon_,
            "jump times must be strictly increasing in (0, horizon]");
    require(std::isfinite(sizes_[k]), "jump sizes must be finite");
    prev = times_[k];
  }
}

double JumpPath::gauss_increment(double a, double b) const {
  if (!has_gaussian()) return 0.0;
  return std::sqrt(gauss_var_) * gauss_->increment(gauss_origin_ + a, gauss_origin_ + b);
}

double JumpPath::gauss_discounted(double a, double b) const {
  if (!has_gaussian()) return 0.0;
  return std::sqrt(gauss_var_) * gauss_->discounted(gauss_origin_ + a, gauss_origin_ + b);
}

void JumpPath::append(double new_horizon, std::span<const double> times,
                      std::span<const double> sizes) {
  require(new_horizon >= horizon_, "cannot shrink a path");
  require(times.size() == sizes.size(), "jump times and sizes differ in length");
  double prev = times_.empty() ? 0.0 : times_.back();
  for (std::size_t k = 0; k < times.size(); ++k) {
    require(times[k] > std::max(prev, horizon_) && times[k] <= new_horizon,
            "appended jump times must lie in (horizon, new_horizon]");
    prev = times[k];
  }
  times_.insert(times_.end(), times.begin(), times.end());
  sizes_.insert(sizes_.end(), sizes.begin(), sizes.end());
  horizon_ = new_horizon;
}

// ---------------------------------------------------------------------------

namespace {

void draw_jumps(const LevyModel& model, double from, double to, RngStream& stream,
                std::vector<double>& times, std::vector<double>& sizes) {
  if (model.jump_rate <= 0.0) return;
  double t = from;
  for (;;) {
    t += sample_exponential(model.jump_rate, stream);
    if (t > to) break;
    times.push_back(t);
    sizes.push_back(sample(model.jump_law, stream));
  }
}

void check_time(const JumpPath& path, double t) {
  require(std::isfinite(t) && t >= 0.0 && t <= path.horizon(),
          "time outside [0, horizon]");
}

}  // namespace

JumpPath simulate_path(const LevyModel& model, double horizon, RngStream& stream) {
  model.validate();
  require(std::isfinite(horizon) && horizon > 0.0, "simulation horizon must be positive");
  std::shared_ptr<const GaussianCache> cache;
  if (model.has_gaussian()) {
    cache = std::make_shared<GaussianCache>(stream.fork());
  }
  std::vector<double> times, sizes;
  draw_jumps(model, 0.0, horizon, stream, times, sizes);
  return JumpPath(horizon, std::move(times), std::move(sizes), model.drift, model.gauss_var,
                  std::move(cache));
}

void extend_path(JumpPath& path, const LevyModel& model, double new_horizon,
                 RngStream& stream) {
  require(std::isfinite(new_horizon) && new_horizon >= path.horizon(),
          "extension horizon must not be below the current horizon");
  std::vector<double> times, sizes;
  draw_jumps(model, path.horizon(), new_horizon, stream, times, sizes);
  path.append(new_horizon, times, sizes);
}

double path_value(const JumpPath& path, double t) {
  check_time(path, t);
  const auto times = path.jump_times();
  const auto n = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) -
                                          times.begin());
  double jumps = 0.0;
  for (std::size_t k = 0; k < n; ++k) jumps += path.jump_sizes()[k];
  return path.drift() * t + jumps + path.gauss_increment(0.0, t);
}

double path_value_left(const JumpPath& path, double t) {
  check_time(path, t);
  const auto times = path.jump_times();
  const auto n = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) -
                                          times.begin());
  double jumps = 0.0;
  for (std::size_t k = 0; k < n; ++k) jumps += path.jump_sizes()[k];
  return path.drift() * t + jumps + path.gauss_increment(0.0, t);
}

JumpPath shift_path(const JumpPath& path, double tau) {
  check_time(path, tau);
  const auto times = path.jump_times();
  const auto first = static_cast<std::size_t>(
      std::upper_bound(times.begin(), times.end(), tau) - times.begin());
  std::vector<double> new_times, new_sizes;
  new_times.reserve(times.size() - first);
  new_sizes.reserve(times.size() - first);
  for (std::size_t k = first; k < times.size(); ++k) {
    new_times.push_back(times[k] - tau);
    new_sizes.push_back(path.jump_sizes()[k]);
  }
  return JumpPath(path.horizon() - tau, std::move(new_times), std::move(new_sizes),
                  path.drift(), path.gauss_var(), path.gauss_cache(),
                  path.gauss_origin() + tau);
}

std::pair<JumpPath, JumpPath> thin_path(const JumpPath& path, const JumpSet& set) {
  require(!path.has_gaussian(), "thinning applies to paths without a Gaussian part");
  set.validate();
  std::vector<double> in_t, in_s, out_t, out_s;
  for (std::size_t k = 0; k < path.jump_count(); ++k) {
    const double x = path.jump_sizes()[k];
    if (set.contains(x)) {
      in_t.push_back(path.jump_times()[k]);
      in_s.push_back(x);
    } else {
      out_t.push_back(path.jump_times()[k]);
      out_s.push_back(x);
    }
  }
  return {JumpPath(path.horizon(), std::move(in_t), std::move(in_s), 0.0),
          JumpPath(path.horizon(), std::move(out_t), std::move(out_s), path.drift())};
}

std::string describe(const LevyModel& model) {
  std::ostringstream os;
  os.precision(15);
  const char* sep = "";
  if (model.jump_rate > 0.0) {
    os << "cp(" << model.jump_rate << ";" << describe(model.jump_law) << ")";
    sep = "+";
  }
  if (model.drift != 0.0) {
    os << sep << "drift(" << model.drift << ")";
    sep = "+";
  }
  if (model.gauss_var > 0.0) {
    os << sep << "bm(" << model.gauss_var << ")";
    sep = "+";
  }
  if (*sep == '\0') os << "zero";
  return os.str();
}

}  // namespace selfdec
