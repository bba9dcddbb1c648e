#include "selfdec/serialize.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>

#include "selfdec/error.hpp"

namespace selfdec {
namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, "config error at " + where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) config_error(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) config_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const Json& j, const std::string& where) {
  if (!j.is_array()) config_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) config_error(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Re-raise domain validation failures as config errors at `where`.
template <class Fn>
auto validated(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(where, e.what());
  }
}

}  // namespace

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) config_error(where, "unknown field '" + key + "'");
  }
}

double get_number(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) config_error(where + "." + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_error(where + "." + key, "expected a finite number");
  return x;
}

double get_number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key, where);
}

std::uint64_t get_uint_or(const Json& j, const char* key, std::uint64_t fallback,
                          const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    config_error(where + "." + key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

// ---------------------------------------------------------------------------

ScalarLaw scalar_law_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected a law object");
  const std::string type = get_string(j, "type", where);
  ScalarLaw law;
  if (type == "exp") {
    check_keys(j, {"type", "rate"}, where);
    law = ExponentialLaw{get_number(j, "rate", where)};
  } else if (type == "gamma") {
    check_keys(j, {"type", "shape", "rate"}, where);
    law = GammaLaw{get_number(j, "shape", where), get_number(j, "rate", where)};
  } else if (type == "point") {
    check_keys(j, {"type", "value"}, where);
    law = PointMassLaw{get_number(j, "value", where)};
  } else if (type == "uniform") {
    check_keys(j, {"type", "lo", "hi"}, where);
    law = UniformLaw{get_number(j, "lo", where), get_number(j, "hi", where)};
  } else if (type == "normal") {
    check_keys(j, {"type", "mean", "sd"}, where);
    law = NormalLaw{get_number(j, "mean", where), get_number(j, "sd", where)};
  } else if (type == "power_uniform") {
    check_keys(j, {"type", "exponent"}, where);
    law = PowerUniformLaw{get_number(j, "exponent", where)};
  } else if (type == "table") {
    check_keys(j, {"type", "values", "weights"}, where);
    law = TableLaw{number_array(field(j, "values", where), where + ".values"),
                   number_array(field(j, "weights", where), where + ".weights")};
  } else {
    config_error(where + ".type", "unknown law type '" + type + "'");
  }
  validated(where, [&] {
    validate(law);
    return 0;
  });
  return law;
}

Json to_json(const ScalarLaw& law) {
  struct Visitor {
    Json operator()(const ExponentialLaw& l) const { return {{"type", "exp"}, {"rate", l.rate}}; }
    Json operator()(const GammaLaw& l) const {
      return {{"type", "gamma"}, {"shape", l.shape}, {"rate", l.rate}};
    }
    Json operator()(const PointMassLaw& l) const { return {{"type", "point"}, {"value", l.value}}; }
    Json operator()(const UniformLaw& l) const {
      return {{"type", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
    }
    Json operator()(const NormalLaw& l) const {
      return {{"type", "normal"}, {"mean", l.mean}, {"sd", l.sd}};
    }
    Json operator()(const PowerUniformLaw& l) const {
      return {{"type", "power_uniform"}, {"exponent", l.exponent}};
    }
    Json operator()(const TableLaw& l) const {
      return {{"type", "table"}, {"values", l.values}, {"weights", l.weights}};
    }
  };
  return std::visit(Visitor{}, law);
}

LevyModel levy_model_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"jump_rate", "jump_law", "drift", "gauss_var"}, where);
  LevyModel m;
  m.jump_rate = get_number_or(j, "jump_rate", 0.0, where);
  if (j.contains("jump_law")) m.jump_law = scalar_law_from_json(j.at("jump_law"), where + ".jump_law");
  m.drift = get_number_or(j, "drift", 0.0, where);
  m.gauss_var = get_number_or(j, "gauss_var", 0.0, where);
  validated(where, [&] {
    m.validate();
    return 0;
  });
  return m;
}

Json to_json(const LevyModel& model) {
  return {{"jump_rate", model.jump_rate},
          {"jump_law", to_json(model.jump_law)},
          {"drift", model.drift},
          {"gauss_var", model.gauss_var}};
}

JumpSet jump_set_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected a jump-set object");
  const std::string type = get_string(j, "type", where);
  return validated(where, [&] {
    if (type == "abs_at_least") {
      check_keys(j, {"type", "a"}, where);
      return JumpSet::abs_at_least(get_number(j, "a", where));
    }
    if (type == "at_least") {
      check_keys(j, {"type", "a"}, where);
      return JumpSet::at_least(get_number(j, "a", where));
    }
    if (type == "interval") {
      check_keys(j, {"type", "a", "b"}, where);
      return JumpSet::interval(get_number(j, "a", where), get_number(j, "b", where));
    }
    config_error(where + ".type", "unknown jump-set type '" + type + "'");
  });
}

Json to_json(const JumpSet& set) {
  switch (set.kind) {
    case JumpSet::Kind::kAbsAtLeast:
      return {{"type", "abs_at_least"}, {"a", set.lo}};
    case JumpSet::Kind::kAtLeast:
      return {{"type", "at_least"}, {"a", set.lo}};
    case JumpSet::Kind::kInterval:
      return {{"type", "interval"}, {"a", set.lo}, {"b", set.hi}};
  }
  return {};
}

StoppingRule stopping_rule_from_json(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "FirstJump" || s == "first_jump") return StoppingRule{FirstJump{}};
    config_error(where, "unknown rule '" + s + "' (objects describe parameterized rules)");
  }
  if (!j.is_object()) config_error(where, "expected a rule object");
  const std::string type = get_string(j, "type", where);
  StoppingRule rule;
  if (type == "fixed") {
    check_keys(j, {"type", "t"}, where);
    rule.kind = FixedTime{get_number(j, "t", where)};
  } else if (type == "first_jump") {
    check_keys(j, {"type"}, where);
    rule.kind = FirstJump{};
  } else if (type == "first_jump_in") {
    check_keys(j, {"type", "set"}, where);
    rule.kind = FirstJumpIn{jump_set_from_json(field(j, "set", where), where + ".set")};
  } else if (type == "kth_jump") {
    check_keys(j, {"type", "k"}, where);
    const auto k = get_uint_or(j, "k", 0, where);
    rule.kind = KthJump{static_cast<std::size_t>(k)};
  } else if (type == "independent") {
    check_keys(j, {"type", "law"}, where);
    rule.kind = IndependentRandomTime{scalar_law_from_json(field(j, "law", where), where + ".law")};
  } else {
    config_error(where + ".type", "unknown rule type '" + type + "'");
  }
  validated(where, [&] {
    rule.validate();
    return 0;
  });
  return rule;
}

Json to_json(const StoppingRule& rule) {
  struct Visitor {
    Json operator()(const FixedTime& r) const { return {{"type", "fixed"}, {"t", r.t}}; }
    Json operator()(const FirstJump&) const { return {{"type", "first_jump"}}; }
    Json operator()(const FirstJumpIn& r) const {
      return {{"type", "first_jump_in"}, {"set", to_json(r.set)}};
    }
    Json operator()(const KthJump& r) const { return {{"type", "kth_jump"}, {"k", r.k}}; }
    Json operator()(const IndependentRandomTime& r) const {
      return {{"type", "independent"}, {"law", to_json(r.law)}};
    }
  };
  return std::visit(Visitor{}, rule.kind);
}

TruncationPolicy truncation_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"horizon", "tail_tol"}, where);
  TruncationPolicy p;
  p.horizon = get_number_or(j, "horizon", p.horizon, where);
  p.tail_tol = get_number_or(j, "tail_tol", p.tail_tol, where);
  validated(where, [&] {
    p.validate();
    return 0;
  });
  return p;
}

AffinePairLaw affine_law_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected a pair-law object");
  const std::string type = get_string(j, "type", where);
  AffinePairLaw law;
  if (type == "gamma_firstjump") {
    check_keys(j, {"type", "alpha", "lambda"}, where);
    LevyModel m;
    m.jump_rate = get_number(j, "alpha", where);
    m.jump_law = ExponentialLaw{get_number(j, "lambda", where)};
    law.kind = StoppedIntegralPair{m, StoppingRule{FirstJump{}}};
  } else if (type == "beta_gamma") {
    check_keys(j, {"type", "alpha", "lambda", "reading"}, where);
    BetaGammaPair p{get_number(j, "alpha", where), get_number(j, "lambda", where)};
    if (j.contains("reading")) {
      const auto r = get_string(j, "reading", where);
      if (r == "first_jump_time") {
        p.reading = DiscountReading::kFirstJumpTime;
      } else if (r == "gamma_shape_alpha") {
        p.reading = DiscountReading::kGammaShapeA;
      } else {
        config_error(where + ".reading", "expected 'first_jump_time' or 'gamma_shape_alpha'");
      }
    }
    law.kind = p;
  } else if (type == "custom_affine") {
    check_keys(j, {"type", "a", "b", "c_form"}, where);
    IndependentPair p{scalar_law_from_json(field(j, "a", where), where + ".a"),
                      scalar_law_from_json(field(j, "b", where), where + ".b")};
    if (j.contains("c_form")) {
      if (!j.at("c_form").is_boolean()) config_error(where + ".c_form", "expected a boolean");
      p.c_form = j.at("c_form").get<bool>();
    }
    law.kind = p;
  } else if (type == "stopped_integral") {
    check_keys(j, {"type", "model", "rule"}, where);
    law.kind = StoppedIntegralPair{
        levy_model_from_json(field(j, "model", where), where + ".model"),
        stopping_rule_from_json(field(j, "rule", where), where + ".rule")};
  } else if (type == "constant") {
    check_keys(j, {"type", "a", "b"}, where);
    law.kind = ConstantPair{get_number(j, "a", where), get_number(j, "b", where)};
  } else {
    config_error(where + ".type", "unknown pair-law type '" + type + "'");
  }
  validated(where, [&] {
    law.validate();
    return 0;
  });
  return law;
}

OperatorModel operator_model_from_json(const Json& q_json, const Json& driver,
                                       const std::string& where) {
  if (!q_json.is_array() || q_json.empty()) config_error(where + ".Q", "expected a square matrix");
  const auto d = static_cast<Eigen::Index>(q_json.size());
  Eigen::MatrixXd q(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto row = number_array(q_json.at(static_cast<std::size_t>(r)), where + ".Q");
    if (static_cast<Eigen::Index>(row.size()) != d) config_error(where + ".Q", "expected a square matrix");
    for (Eigen::Index c = 0; c < d; ++c) q(r, c) = row[static_cast<std::size_t>(c)];
  }
  const std::string dw = where + ".driver";
  if (!driver.is_object()) config_error(dw, "expected a driver object");
  const std::string type = get_string(driver, "type", dw);
  OperatorDriver drv;
  if (type == "independent") {
    check_keys(driver, {"type", "coords"}, dw);
    const Json& coords = field(driver, "coords", dw);
    if (!coords.is_array()) config_error(dw + ".coords", "expected an array of models");
    IndependentCoordinates ic;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      ic.coords.push_back(levy_model_from_json(coords[i], dw + ".coords[" + std::to_string(i) + "]"));
    }
    drv = std::move(ic);
  } else if (type == "shared") {
    check_keys(driver, {"type", "scalar", "direction", "drift"}, dw);
    SharedDirection sd;
    sd.scalar = levy_model_from_json(field(driver, "scalar", dw), dw + ".scalar");
    const auto dir = number_array(field(driver, "direction", dw), dw + ".direction");
    sd.direction = Eigen::Map<const Eigen::VectorXd>(dir.data(), static_cast<Eigen::Index>(dir.size()));
    if (driver.contains("drift")) {
      const auto dr = number_array(driver.at("drift"), dw + ".drift");
      sd.drift = Eigen::Map<const Eigen::VectorXd>(dr.data(), static_cast<Eigen::Index>(dr.size()));
    } else {
      sd.drift = Eigen::VectorXd::Zero(d);
    }
    drv = std::move(sd);
  } else {
    config_error(dw + ".type", "unknown driver type '" + type + "'");
  }
  try {
    return OperatorModel(std::move(q), std::move(drv));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSpectralCondition) throw;
    config_error(where, e.what());
  }
}

// ---------------------------------------------------------------------------

Json to_json(const JumpPath& path) {
  Json jumps = Json::array();
  for (std::size_t k = 0; k < path.jump_count(); ++k) {
    jumps.push_back({path.jump_times()[k], path.jump_sizes()[k]});
  }
  Json j = {{"horizon", path.horizon()},
            {"jumps", jumps},
            {"drift", path.drift()},
            {"gauss_var", path.gauss_var()}};
  if (path.has_gaussian()) {
    const auto& s = path.gauss_cache()->stream();
    j["gauss_stream"] = {s.seed(), s.stream_id()};
    if (path.gauss_origin() != 0.0) j["gauss_origin"] = path.gauss_origin();
  }
  return j;
}

JumpPath path_from_json(const Json& j) {
  const std::string where = "path";
  check_keys(j, {"horizon", "jumps", "drift", "gauss_var", "gauss_stream", "gauss_origin"}, where);
  const double horizon = get_number(j, "horizon", where);
  const Json& jumps = field(j, "jumps", where);
  if (!jumps.is_array()) config_error(where + ".jumps", "expected [[time, size], ...]");
  std::vector<double> times, sizes;
  for (const auto& pair : jumps) {
    const auto v = number_array(pair, where + ".jumps");
    if (v.size() != 2) config_error(where + ".jumps", "expected [time, size] pairs");
    times.push_back(v[0]);
    sizes.push_back(v[1]);
  }
  const double drift = get_number_or(j, "drift", 0.0, where);
  const double gauss_var = get_number_or(j, "gauss_var", 0.0, where);
  std::shared_ptr<const GaussianCache> cache;
  if (gauss_var > 0.0) {
    std::uint64_t seed = 0, id = 0;
    if (j.contains("gauss_stream")) {
      const Json& s = j.at("gauss_stream");
      if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() || !s[1].is_number_unsigned()) {
        config_error(where + ".gauss_stream", "expected [seed, stream_id]");
      }
      seed = s[0].get<std::uint64_t>();
      id = s[1].get<std::uint64_t>();
    }
    cache = std::make_shared<GaussianCache>(RngStream(seed, id));
  }
  const double origin = get_number_or(j, "gauss_origin", 0.0, where);
  return validated(where, [&] {
    return JumpPath(horizon, std::move(times), std::move(sizes), drift, gauss_var, cache, origin);
  });
}

Json to_json(const KsResult& ks) {
  return {{"statistic", ks.statistic}, {"threshold", ks.threshold},
          {"significance", ks.significance}, {"n", ks.n},
          {"m", ks.m}, {"pass", ks.pass}};
}

Json to_json(const StatReport& report) {
  Json moments = Json::array();
  for (const auto& m : report.moments) {
    moments.push_back({{"label", m.label}, {"observed", m.observed}, {"expected", m.expected},
                       {"std_error", m.std_error}, {"tolerance", m.tolerance}, {"pass", m.pass}});
  }
  Json indep = Json::array();
  for (const auto& i : report.independence) {
    indep.push_back({{"label", i.label}, {"max_abs_corr", i.max_abs_corr},
                     {"bound", i.bound}, {"pass", i.pass}});
  }
  Json bounds = Json::array();
  for (const auto& b : report.bounds) {
    bounds.push_back({{"label", b.label}, {"value", b.value}, {"bound", b.bound},
                      {"relation", b.at_least ? ">=" : "<="}, {"pass", b.pass}});
  }
  Json j = {{"name", report.name},
            {"n", report.n},
            {"m", report.m},
            {"ks", report.ks ? to_json(*report.ks) : Json()},
            {"moments", moments},
            {"independence", indep},
            {"bounds", bounds},
            {"expect_fail", report.expect_fail},
            {"checks_pass", report.all_checks_pass()},
            {"verdict", report.verdict() ? "pass" : "fail"},
            {"seed", report.seed},
            {"fingerprint", report.fingerprint}};
  return j;
}

std::string record_csv_header() { return "tau,x_tau,discount,x_prime,x_total,residual"; }

std::string record_csv_row(const DecompositionRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.tau, r.x_tau,
                r.discount, r.x_prime, r.x_total, check_pathwise_identity(r));
  return buf;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fingerprint(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace selfdec
