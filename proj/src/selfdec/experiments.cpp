// The eight experiment runners. Each has a params parser (used both for
// up-front validation and for the run) and a runner that appends reports,
// comparisons and sample rows to an ExperimentResult.
//
// Stream layout: root = RngStream(seed, 0); every sampling task of a runner
// takes its own root.substream(k), with k fixed by the task's position in
// the config, so adding output never changes the numbers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "selfdec/error.hpp"
#include "selfdec/experiment_registry.hpp"
#include "selfdec/parallel.hpp"

namespace selfdec::detail {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, "config error at " + where + ": " + what);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

/// Prefixes domain errors with the task that raised them.
template <class Fn>
auto in_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what());
  }
}

RngStream root_stream(const ExperimentConfig& c) { return RngStream(c.seed, 0); }

// --- params helpers ---------------------------------------------------------

std::vector<double> number_list(const Json& p, const char* key, std::vector<double> fallback,
                                const std::string& where) {
  if (!p.contains(key)) return fallback;
  const Json& v = p.at(key);
  const std::string w = where + "." + key;
  if (!v.is_array() || v.empty()) config_error(w, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      config_error(w, "expected a non-empty array of finite numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

std::size_t count_or(const Json& p, const char* key, std::size_t fallback, std::size_t lo,
                     std::size_t hi, const std::string& where) {
  const auto v = get_uint_or(p, key, fallback, where);
  if (v < lo || v > hi) {
    config_error(where + "." + key,
                 "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::size_t>(v);
}

bool bool_or(const Json& p, const char* key, bool fallback, const std::string& where) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_boolean()) config_error(where + "." + key, "expected a boolean");
  return p.at(key).get<bool>();
}

std::vector<StoppingRule> rules_or(const Json& p, std::vector<StoppingRule> fallback,
                                   const std::string& where) {
  if (p.contains("rule") && p.contains("rules")) {
    config_error(where, "give either 'rule' or 'rules', not both");
  }
  if (p.contains("rule")) return {stopping_rule_from_json(p.at("rule"), where + ".rule")};
  if (!p.contains("rules")) return fallback;
  const Json& v = p.at("rules");
  if (!v.is_array() || v.empty()) config_error(where + ".rules", "expected a non-empty array");
  std::vector<StoppingRule> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(stopping_rule_from_json(v[i], where + ".rules[" + std::to_string(i) + "]"));
  }
  return out;
}

DecomposeOptions decompose_options(const Json& p, const std::string& where) {
  DecomposeOptions o;
  o.max_tau = get_number_or(p, "max_tau", o.max_tau, where);
  if (!(o.max_tau > 0.0)) config_error(where + ".max_tau", "must be positive");
  return o;
}

LevyModel compound_poisson(double rate, const ScalarLaw& jumps) {
  LevyModel m;
  m.jump_rate = rate;
  m.jump_law = jumps;
  return m;
}

/// Compound Poisson(alpha, Exp(lambda)): the BDLP of gamma(alpha, lambda).
LevyModel gamma_bdlp(double alpha, double lambda) {
  return compound_poisson(alpha, ExponentialLaw{lambda});
}

void require_independence_size(const ExperimentConfig& c, std::size_t n, const char* what) {
  if (n < 1000) {
    config_error(what, "independence diagnostics need at least 1000 samples");
  }
  (void)c;
}

// --- sampling helpers ---------------------------------------------------------

std::vector<double> gamma_draws(double shape, double rate, std::size_t n, const RngStream& base) {
  const GammaParams p(shape, rate);
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.substream(i);
    out[i] = sample_gamma(p, s);
  });
  return out;
}

std::vector<double> law_draws(const ScalarLaw& law, std::size_t n, const RngStream& base) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.substream(i);
    out[i] = sample(law, s);
  });
  return out;
}

std::optional<CharacteristicFn> cf_of(const ScalarLaw& law) {
  if (const auto* l = std::get_if<ExponentialLaw>(&law)) return GammaCf{1.0, l->rate};
  if (const auto* l = std::get_if<GammaLaw>(&law)) return GammaCf{l->shape, l->rate};
  if (const auto* l = std::get_if<NormalLaw>(&law)) return NormalCf{l->mean, l->sd * l->sd};
  if (const auto* l = std::get_if<PointMassLaw>(&law)) return PointMassCf{l->value};
  return std::nullopt;
}

/// Adds the first max_rows pairs (a[i], b[i]) as rows with the given column count;
/// a goes to column ca and b to column cb.
void add_pair_rows(ExperimentResult& out, const ExperimentConfig& c, const std::string& name,
                   const std::vector<double>& a, const std::vector<double>& b, std::size_t ca,
                   std::size_t cb) {
  const std::size_t width = out.samples.columns().size();
  const std::size_t rows = std::min(c.max_rows, std::max(a.size(), b.size()));
  std::vector<double> row(width, kNaN);
  for (std::size_t i = 0; i < rows; ++i) {
    std::fill(row.begin(), row.end(), kNaN);
    if (i < a.size()) row[ca] = a[i];
    if (i < b.size()) row[cb] = b[i];
    out.samples.add(name, i, row);
  }
}

StatReport ks_report(const std::string& name, const std::vector<double>& a,
                     const std::vector<double>& b, double significance) {
  StatReport r;
  r.name = name;
  r.n = a.size();
  r.m = b.size();
  r.ks = ks_two_sample(a, b, significance);
  return r;
}

double max_relative(const std::vector<double>& residual, const std::vector<double>& scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    worst = std::max(worst, residual[i] / (1.0 + std::abs(scale[i])));
  }
  return worst;
}

// =============================================================================
// verify-gamma-bdlp

struct GammaCase {
  double alpha;
  double lambda;
};

struct GammaBdlpParams {
  std::vector<GammaCase> cases;
  bool ecf = true;
};

GammaCase gamma_case(const Json& j, const std::string& where) {
  check_keys(j, {"alpha", "lambda"}, where);
  GammaCase g{get_number(j, "alpha", where), get_number(j, "lambda", where)};
  if (!(g.alpha > 0.0) || !(g.lambda > 0.0)) config_error(where, "alpha and lambda must be > 0");
  return g;
}

GammaBdlpParams parse_gamma_bdlp(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"cases", "alpha", "lambda", "ecf"}, w);
  GammaBdlpParams out;
  out.ecf = bool_or(p, "ecf", true, w);
  const bool single = p.contains("alpha") || p.contains("lambda");
  if (single && p.contains("cases")) config_error(w, "give either 'cases' or 'alpha'/'lambda'");
  if (single) {
    Json one = Json::object();
    if (p.contains("alpha")) one["alpha"] = p.at("alpha");
    if (p.contains("lambda")) one["lambda"] = p.at("lambda");
    out.cases.push_back(gamma_case(one, w));
  } else if (p.contains("cases")) {
    const Json& cs = p.at("cases");
    if (!cs.is_array() || cs.empty()) config_error(w + ".cases", "expected a non-empty array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      out.cases.push_back(gamma_case(cs[i], w + ".cases[" + std::to_string(i) + "]"));
    }
  } else {
    out.cases = {{0.5, 1.0}, {1.0, 1.0}, {2.0, 1.0}, {2.0, 3.0}};
  }
  return out;
}

void run_gamma_bdlp(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_gamma_bdlp(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"integral", "direct"});
  const auto grid = default_cf_grid();
  for (std::size_t k = 0; k < params.cases.size(); ++k) {
    const auto [alpha, lambda] = params.cases[k];
    const std::string name = "gamma-bdlp(alpha=" + fmt(alpha) + ",lambda=" + fmt(lambda) + ")";
    const auto xs = in_context(name, [&] {
      return sample_discounted_integrals(gamma_bdlp(alpha, lambda), c.truncation, c.n_samples,
                                         root.substream(2 * k));
    });
    const auto ref = gamma_draws(alpha, lambda, c.n_samples, root.substream(2 * k + 1));
    StatReport r = ks_report(name, xs, ref, c.significance);
    r.moments.push_back(mean_check("mean integral", xs, alpha / lambda));
    r.moments.push_back(variance_check("var integral", xs, alpha / (lambda * lambda)));
    const CharacteristicFn cf = GammaCf{alpha, lambda};
    if (params.ecf) {
      r.bounds.push_back(at_most("ecf distance to gamma cf", ecf_distance(xs, cf, grid),
                                 ecf_bound(xs.size())));
    }
    out.reports.push_back(std::move(r));
    add_pair_rows(out, c, name, xs, ref, 0, 1);
    out.comparisons.push_back({name, xs, ref, cf});
  }
}

// =============================================================================
// verify-theorem1

struct StoppedLawParams {
  LevyModel model;
  std::optional<GammaCase> gamma;  // set when the model is a gamma BDLP
  std::vector<StoppingRule> rules;
  DecomposeOptions options;
};

StoppedLawParams parse_stopped_law(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"alpha", "lambda", "model", "rules", "rule", "max_tau"}, w);
  StoppedLawParams out;
  if (p.contains("model")) {
    if (p.contains("alpha") || p.contains("lambda")) {
      config_error(w, "give either 'model' or 'alpha'/'lambda'");
    }
    out.model = levy_model_from_json(p.at("model"), w + ".model");
  } else {
    GammaCase g{get_number_or(p, "alpha", 2.0, w), get_number_or(p, "lambda", 1.0, w)};
    if (!(g.alpha > 0.0) || !(g.lambda > 0.0)) config_error(w, "alpha and lambda must be > 0");
    out.gamma = g;
    out.model = gamma_bdlp(g.alpha, g.lambda);
  }
  out.rules = rules_or(p, {StoppingRule{FirstJump{}}}, w);
  out.options = decompose_options(p, w);
  require_independence_size(c, c.n_samples, "n_samples");
  return out;
}

void run_stopped_law(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_stopped_law(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable(
      {"tau", "x_tau", "discount", "x_prime", "x_total", "residual", "direct_1", "direct_2"});
  auto reference = [&](const RngStream& base) {
    if (params.gamma) return gamma_draws(params.gamma->alpha, params.gamma->lambda, c.n_samples, base);
    return sample_discounted_integrals(params.model, c.truncation, c.n_samples, base);
  };
  std::optional<CharacteristicFn> cf;
  if (params.gamma) cf = GammaCf{params.gamma->alpha, params.gamma->lambda};

  for (std::size_t k = 0; k < params.rules.size(); ++k) {
    const StoppingRule& rule = params.rules[k];
    const std::string tag = "stopped-law[" + rule.name() + "]";
    const auto batch = in_context(tag, [&] {
      return decompose_batch(params.model, rule, c.truncation, c.n_samples,
                             root.substream(3 * k), params.options);
    });
    const auto ref1 = reference(root.substream(3 * k + 1));
    const auto ref2 = reference(root.substream(3 * k + 2));
    const std::size_t n = batch.records.size();
    std::vector<double> tau(n), x_tau(n), discount(n), x_prime(n), x_total(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = batch.records[i];
      tau[i] = r.tau;
      x_tau[i] = r.x_tau;
      discount[i] = r.discount;
      x_prime[i] = r.x_prime;
      x_total[i] = r.x_total;
    }

    StatReport total = ks_report(tag + " x_total vs direct", x_total, ref1, c.significance);
    total.bounds.push_back(at_most("discarded paths", static_cast<double>(batch.discarded), 0.0));
    out.reports.push_back(std::move(total));
    out.reports.push_back(ks_report(tag + " x_prime vs direct", x_prime, ref2, c.significance));

    StatReport indep;
    indep.name = tag + " independence";
    indep.n = n;
    indep.m = n;
    indep.independence.push_back(independence_diagnostic(x_tau, x_prime, "(x_tau, x_prime)"));
    indep.independence.push_back(independence_diagnostic(discount, x_prime, "(discount, x_prime)"));
    out.reports.push_back(std::move(indep));

    const std::size_t rows = std::min(c.max_rows, n);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& r = batch.records[i];
      out.samples.add(tag, i,
                      {r.tau, r.x_tau, r.discount, r.x_prime, r.x_total,
                       check_pathwise_identity(r), i < ref1.size() ? ref1[i] : kNaN,
                       i < ref2.size() ? ref2[i] : kNaN});
    }
    out.comparisons.push_back({tag + " x_total vs direct", x_total, ref1, cf});
    out.comparisons.push_back({tag + " x_prime vs direct", x_prime, ref2, cf});
  }
}

// =============================================================================
// verify-corollary2-pathwise

struct PathwiseParams {
  LevyModel model;
  std::vector<StoppingRule> rules;
  std::size_t n_paths = 10'000;
  DecomposeOptions options;
};

std::vector<StoppingRule> default_pathwise_rules() {
  return {StoppingRule{FixedTime{0.7}}, StoppingRule{FirstJump{}},
          StoppingRule{FirstJumpIn{JumpSet::at_least(1.0)}}, StoppingRule{KthJump{3}},
          StoppingRule{IndependentRandomTime{ExponentialLaw{1.0}}}};
}

PathwiseParams parse_pathwise(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"model", "rules", "rule", "n_paths", "max_tau"}, w);
  PathwiseParams out;
  out.model = p.contains("model") ? levy_model_from_json(p.at("model"), w + ".model")
                                  : gamma_bdlp(2.0, 1.0);
  out.rules = rules_or(p, default_pathwise_rules(), w);
  out.n_paths = count_or(p, "n_paths", 10'000, 1, 100'000'000, w);
  out.options = decompose_options(p, w);
  return out;
}

void run_pathwise(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_pathwise(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"tau", "x_tau", "discount", "x_prime", "x_total", "residual"});
  for (std::size_t k = 0; k < params.rules.size(); ++k) {
    const StoppingRule& rule = params.rules[k];
    const std::string tag = "pathwise[" + rule.name() + "]";
    const auto batch = in_context(tag, [&] {
      return decompose_batch(params.model, rule, c.truncation, params.n_paths,
                             root.substream(k), params.options);
    });
    double worst = 0.0;
    for (const auto& r : batch.records) {
      worst = std::max(worst, check_pathwise_identity(r) / (1.0 + std::abs(r.x_total)));
    }
    StatReport rep;
    rep.name = tag;
    rep.n = batch.records.size();
    rep.bounds.push_back(at_most("max relative residual", worst, kPathwiseTolerance));
    rep.bounds.push_back(at_most("discarded paths", static_cast<double>(batch.discarded), 0.0));
    out.reports.push_back(std::move(rep));
    const std::size_t rows = std::min(c.max_rows, batch.records.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& r = batch.records[i];
      out.samples.add(tag, i,
                      {r.tau, r.x_tau, r.discount, r.x_prime, r.x_total, check_pathwise_identity(r)});
    }
    out.summary["max_relative_residual"][rule.name()] = worst;
  }
}

// =============================================================================
// verify-prop1

struct GammaFactorParams {
  bool part_i = true;
  bool part_ii = true;
  std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> lambdas_i{1.0};
  std::vector<double> lambdas_ii{1.0, 3.0};
  double tail_tol = 1e-12;
  DiscountReading reading = DiscountReading::kFirstJumpTime;
};

GammaFactorParams parse_gamma_factor(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"part", "alphas", "part_i_lambdas", "part_ii_lambdas", "tail_tol", "reading"}, w);
  GammaFactorParams out;
  if (p.contains("part")) {
    const Json& v = p.at("part");
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "i") {
      out.part_ii = false;
    } else if (s == "ii") {
      out.part_i = false;
    } else if (s != "both") {
      config_error(w + ".part", "expected 'i', 'ii' or 'both'");
    }
  }
  out.alphas = number_list(p, "alphas", out.alphas, w);
  out.lambdas_i = number_list(p, "part_i_lambdas", out.lambdas_i, w);
  out.lambdas_ii = number_list(p, "part_ii_lambdas", out.lambdas_ii, w);
  for (double v : out.alphas) {
    if (!(v > 0.0)) config_error(w + ".alphas", "must be > 0");
  }
  for (double v : out.lambdas_i) {
    if (!(v > 0.0)) config_error(w + ".part_i_lambdas", "must be > 0");
  }
  for (double v : out.lambdas_ii) {
    if (!(v > 0.0)) config_error(w + ".part_ii_lambdas", "must be > 0");
  }
  out.tail_tol = get_number_or(p, "tail_tol", out.tail_tol, w);
  if (!(out.tail_tol > 0.0 && out.tail_tol < 1.0)) config_error(w + ".tail_tol", "must lie in (0, 1)");
  if (p.contains("reading")) {
    const Json& v = p.at("reading");
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "first_jump_time") {
      out.reading = DiscountReading::kFirstJumpTime;
    } else if (s == "gamma_shape_alpha") {
      out.reading = DiscountReading::kGammaShapeA;
    } else {
      config_error(w + ".reading", "expected 'first_jump_time' or 'gamma_shape_alpha'");
    }
  }
  return out;
}

void gamma_moment_checks(StatReport& r, const std::vector<double>& xs, double alpha,
                         double lambda) {
  r.moments.push_back(mean_check("mean", xs, alpha / lambda));
  r.moments.push_back(second_moment_check("second moment", xs, alpha * (alpha + 1.0) / (lambda * lambda)));
}

void run_gamma_factor(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_gamma_factor(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"construction", "direct"});
  std::uint64_t task = 0;
  auto record = [&](const std::string& name, const std::vector<double>& constructed,
                    const std::vector<double>& direct, double alpha, double lambda) {
    StatReport r = ks_report(name, constructed, direct, c.significance);
    gamma_moment_checks(r, constructed, alpha, lambda);
    out.reports.push_back(std::move(r));
    add_pair_rows(out, c, name, constructed, direct, 0, 1);
    out.comparisons.push_back({name, constructed, direct, GammaCf{alpha, lambda}});
  };
  if (params.part_i) {
    for (double alpha : params.alphas) {
      for (double lambda : params.lambdas_i) {
        const std::string suffix = "(alpha=" + fmt(alpha) + ",lambda=" + fmt(lambda) + ")";
        const auto bg = beta_gamma_identity_samples(alpha, lambda, c.n_samples, root.substream(task++));
        record("gamma factor beta-gamma" + suffix, bg.rhs, bg.lhs, alpha, lambda);
        const auto fj = first_jump_factor_samples(alpha, lambda, c.n_samples,
                                                  root.substream(task++), params.reading);
        record("gamma factor first-jump factor" + suffix, fj.rhs, fj.lhs, alpha, lambda);
      }
    }
  }
  if (params.part_ii) {
    for (double alpha : params.alphas) {
      for (double lambda : params.lambdas_ii) {
        const std::string name =
            "gamma series backward series(alpha=" + fmt(alpha) + ",lambda=" + fmt(lambda) + ")";
        const AffinePairLaw law{BetaGammaPair{alpha, lambda, params.reading}};
        const auto series = in_context(name, [&] {
          return sample_backward_series_batch(law, params.tail_tol, c.n_samples,
                                              root.substream(task++));
        });
        const auto direct = gamma_draws(alpha, lambda, c.n_samples, root.substream(task++));
        record(name, series, direct, alpha, lambda);
      }
    }
  }
}

// =============================================================================
// perpetuity-iterate

struct PerpetuityParams {
  std::vector<LevyModel> drivers;
  std::vector<AffinePairLaw> laws;
  std::vector<std::string> law_names;
  std::size_t n_steps = 0;
  double z0 = 0.0;
  double tail_tol = 1e-12;
};

std::string pair_law_name(const AffinePairLaw& law) {
  struct Visitor {
    std::string operator()(const ConstantPair& p) const {
      return "constant(a=" + fmt(p.a) + ",b=" + fmt(p.b) + ")";
    }
    std::string operator()(const IndependentPair& p) const {
      return std::string(p.c_form ? "affine-c" : "affine") + "(" + describe(p.a) + "," +
             describe(p.b) + ")";
    }
    std::string operator()(const BetaGammaPair& p) const {
      return "beta-gamma(alpha=" + fmt(p.shape) + ",lambda=" + fmt(p.rate) + ")";
    }
    std::string operator()(const StoppedIntegralPair& p) const {
      return "stopped(" + describe(p.model) + "," + p.rule.name() + ")";
    }
  };
  return std::visit(Visitor{}, law.kind);
}

PerpetuityParams parse_perpetuity(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"drivers", "laws", "n_steps", "z0", "tail_tol"}, w);
  PerpetuityParams out;
  if (p.contains("drivers")) {
    const Json& v = p.at("drivers");
    if (!v.is_array()) config_error(w + ".drivers", "expected an array of models");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.drivers.push_back(levy_model_from_json(v[i], w + ".drivers[" + std::to_string(i) + "]"));
    }
  } else {
    LevyModel gauss;
    gauss.gauss_var = 1.0;
    out.drivers = {gamma_bdlp(2.0, 1.0), gauss};
  }
  if (p.contains("laws")) {
    const Json& v = p.at("laws");
    if (!v.is_array()) config_error(w + ".laws", "expected an array of pair laws");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.laws.push_back(affine_law_from_json(v[i], w + ".laws[" + std::to_string(i) + "]"));
      out.law_names.push_back(pair_law_name(out.laws.back()));
    }
  }
  if (out.drivers.empty() && out.laws.empty()) config_error(w, "nothing to run");
  out.n_steps = count_or(p, "n_steps", 0, 0, 100'000'000, w);
  out.z0 = get_number_or(p, "z0", 0.0, w);
  out.tail_tol = get_number_or(p, "tail_tol", out.tail_tol, w);
  if (!(out.tail_tol > 0.0 && out.tail_tol < 1.0)) config_error(w + ".tail_tol", "must lie in (0, 1)");
  for (const auto& law : out.laws) {
    if (const auto* cp = std::get_if<ConstantPair>(&law.kind); cp && !(std::abs(cp->a) < 1.0)) {
      config_error(w + ".laws", "a constant pair needs |a| < 1");
    }
  }
  return out;
}

void run_perpetuity(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_perpetuity(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"chain", "reference"});
  PerpetuityOptions options;
  options.n_steps = params.n_steps;
  options.significance = c.significance;
  options.policy = c.truncation;

  for (std::size_t k = 0; k < params.drivers.size(); ++k) {
    const LevyModel& model = params.drivers[k];
    const std::string context = "perpetuity driver " + describe(model);
    auto cmp = in_context(context, [&] {
      return perpetuity_comparison(model, c.n_samples, root.substream(k), options);
    });
    out.summary["chain_steps"][cmp.report.name] = cmp.n_steps;
    add_pair_rows(out, c, cmp.report.name, cmp.chain, cmp.direct, 0, 1);
    std::optional<CharacteristicFn> cf;
    if (model.jump_rate == 0.0) {
      // drift d and Brownian variance v: N(d (1 - e^{-T}), v (1 - e^{-2T}) / 2).
      const double t = c.truncation.horizon;
      cf = NormalCf{-model.drift * std::expm1(-t), -0.5 * model.gauss_var * std::expm1(-2.0 * t)};
    }
    if (cmp.report.ks) out.comparisons.push_back({cmp.report.name, cmp.chain, cmp.direct, cf});
    out.reports.push_back(std::move(cmp.report));
  }

  const std::uint64_t offset = params.drivers.size();
  for (std::size_t k = 0; k < params.laws.size(); ++k) {
    const AffinePairLaw& law = params.laws[k];
    const std::string name = "perpetuity law:" + params.law_names[k];
    const RngStream base = root.substream(offset + k);
    in_context(name, [&] {
      RngStream pilot = base.substream(2);
      const double log_a = log_contraction_estimate(law, 10'000, pilot);
      std::size_t steps = params.n_steps;
      if (steps == 0) {
        if (!(log_a < 0.0)) {
          throw Error(ErrorCode::kNotContractive, "estimated E log|A| >= 0");
        }
        steps = static_cast<std::size_t>(std::ceil(60.0 / -log_a));
      }
      const auto chain = iterate_batch(law, params.z0, steps, c.n_samples, base.substream(0));
      StatReport r;
      r.name = name;
      r.n = chain.size();
      if (const auto* cp = std::get_if<ConstantPair>(&law.kind)) {
        const double fixed = cp->b / (1.0 - cp->a);
        double worst = 0.0;
        for (double z : chain) worst = std::max(worst, std::abs(z - fixed));
        r.bounds.push_back(at_most("max |chain - b/(1-a)|", worst, 1e-9 * (1.0 + std::abs(fixed))));
        add_pair_rows(out, c, name, chain, {}, 0, 1);
      } else {
        const auto series =
            sample_backward_series_batch(law, params.tail_tol, c.n_samples, base.substream(1));
        r.m = series.size();
        r.ks = ks_two_sample(chain, series, c.significance);
        r.moments.push_back(mean_diff_check("mean(chain) - mean(series)", chain, series));
        add_pair_rows(out, c, name, chain, series, 0, 1);
        std::optional<CharacteristicFn> cf;
        if (const auto* bg = std::get_if<BetaGammaPair>(&law.kind);
            bg && bg->reading == DiscountReading::kFirstJumpTime) {
          cf = GammaCf{bg->shape, bg->rate};
        }
        out.comparisons.push_back({name, chain, series, cf});
      }
      r.bounds.push_back(at_most("E log|A|", log_a, 0.0));
      out.summary["chain_steps"][name] = steps;
      out.reports.push_back(std::move(r));
      return 0;
    });
  }
}

// =============================================================================
// verify-corollary3

struct FactorizationParams {
  bool first_value = true;
  bool restricted = true;
  bool thinning = true;
  bool evaluators = true;
  LevyModel model;
  JumpSet set = JumpSet::abs_at_least(1.0);
  std::size_t n_paths = 10'000;
  std::size_t eval_times = 5;
  double eval_horizon = 20.0;
  DecomposeOptions options;
};

FactorizationParams parse_factorization(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"checks", "model", "set", "n_paths", "eval_times", "eval_horizon", "max_tau"}, w);
  FactorizationParams out;
  if (p.contains("checks")) {
    const Json& v = p.at("checks");
    if (!v.is_array() || v.empty()) config_error(w + ".checks", "expected a non-empty array");
    out.first_value = out.restricted = out.thinning = out.evaluators = false;
    for (const auto& s : v) {
      const std::string name = s.is_string() ? s.get<std::string>() : "";
      if (name == "first_value") {
        out.first_value = true;
      } else if (name == "restricted") {
        out.restricted = true;
      } else if (name == "thinning") {
        out.thinning = true;
      } else if (name == "evaluators") {
        out.evaluators = true;
      } else {
        config_error(w + ".checks",
                     "expected 'first_value', 'restricted', 'thinning' or 'evaluators'");
      }
    }
  }
  out.model = p.contains("model") ? levy_model_from_json(p.at("model"), w + ".model")
                                  : compound_poisson(2.0, NormalLaw{0.5, 1.0});
  if ((out.first_value || out.restricted || out.thinning) && !out.model.purely_discontinuous()) {
    config_error(w + ".model", "first-value, restricted and thinning checks need a model with "
                               "no drift and no Gaussian part");
  }
  if ((out.first_value || out.restricted) && !(out.model.jump_rate > 0.0)) {
    config_error(w + ".model", "first-value and restricted checks need jumps");
  }
  if (p.contains("set")) out.set = jump_set_from_json(p.at("set"), w + ".set");
  out.n_paths = count_or(p, "n_paths", out.n_paths, 1000, 100'000'000, w);
  out.eval_times = count_or(p, "eval_times", out.eval_times, 1, 1000, w);
  out.eval_horizon = get_number_or(p, "eval_horizon", out.eval_horizon, w);
  if (!(out.eval_horizon > 0.0 && out.eval_horizon <= 1000.0)) {
    config_error(w + ".eval_horizon", "must lie in (0, 1000]");
  }
  out.options = decompose_options(p, w);
  if (out.thinning) require_independence_size(c, c.n_samples, "n_samples");
  return out;
}

/// Model with random rate, jump law and drift for the evaluator comparison.
LevyModel random_model(RngStream& s) {
  LevyModel m;
  m.jump_rate = 0.5 + 4.5 * sample_uniform(s);
  const double pick = sample_uniform(s);
  const double u = sample_uniform(s);
  if (pick < 0.25) {
    m.jump_law = ExponentialLaw{0.5 + 2.0 * u};
  } else if (pick < 0.5) {
    m.jump_law = NormalLaw{2.0 * u - 1.0, 0.1 + 2.0 * sample_uniform(s)};
  } else if (pick < 0.75) {
    m.jump_law = UniformLaw{-1.0 - u, 1.0 + 2.0 * u};
  } else {
    m.jump_law = TableLaw{{-1.0, 0.5, 2.0 + u}, {1.0, 1.0, 1.0}};
  }
  m.drift = 2.0 * sample_uniform(s) - 1.0;
  return m;
}

/// Runs the factorization on n_paths paths; returns the post-tau integrals.
std::vector<double> run_identity_check(const ExperimentConfig& c, const FactorizationParams& params,
                        ExperimentResult& out, const std::string& tag, const RngStream& base,
                        bool restricted) {
  std::vector<IdentityCheck> checks(params.n_paths);
  std::vector<char> ok(params.n_paths, 0);
  in_context(tag, [&] {
    parallel_for(params.n_paths, [&](std::size_t i) {
      RngStream s = base.substream(i);
      try {
        checks[i] = restricted
                        ? restricted_jump_identity(params.model, params.set, c.truncation, s, params.options)
                        : first_value_identity(params.model, c.truncation, s, params.options);
        ok[i] = 1;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientHorizon) throw;
      }
    });
    return 0;
  });
  std::vector<double> scaled_jump, shifted;
  double worst = 0.0, worst_series = 0.0;
  std::size_t discarded = 0;
  const std::size_t rows = std::min(c.max_rows, params.n_paths);
  for (std::size_t i = 0; i < params.n_paths; ++i) {
    if (!ok[i]) {
      ++discarded;
      continue;
    }
    const auto& k = checks[i];
    worst = std::max(worst, k.residual() / (1.0 + std::abs(k.lhs)));
    worst_series = std::max(worst_series, std::abs(k.lhs - k.series) / (1.0 + std::abs(k.lhs)));
    scaled_jump.push_back(std::exp(-k.tau) * k.jump);
    shifted.push_back(k.shifted);
    if (i < rows) {
      out.samples.add(tag, i,
                      {k.tau, k.jump, k.shifted, k.lhs, k.rhs, k.series, k.residual(), kNaN,
                       kNaN, kNaN, kNaN, kNaN});
    }
  }
  StatReport r;
  r.name = tag;
  r.n = shifted.size();
  r.bounds.push_back(at_most("max relative residual", worst, kPathwiseTolerance));
  r.bounds.push_back(at_most("max relative |lhs - series|", worst_series, kPathwiseTolerance));
  r.bounds.push_back(at_most("discarded paths", static_cast<double>(discarded), 0.0));
  r.independence.push_back(
      independence_diagnostic(scaled_jump, shifted, "(e^{-tau} jump, shifted)"));
  out.reports.push_back(std::move(r));
  return shifted;
}

void run_factorization(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_factorization(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"tau", "jump", "shifted", "lhs", "rhs", "series", "residual", "t",
                             "by_parts", "jump_sum", "in_set", "rest"});

  if (params.first_value) {
    const std::string tag = "first-value identity";
    // The post-tau integral is again a copy of the full integral.
    const auto x_prime = run_identity_check(c, params, out, tag, root.substream(0), false);
    const auto direct =
        sample_discounted_integrals(params.model, c.truncation, params.n_paths, root.substream(4));
    out.reports.push_back(
        ks_report("first-value shifted integral vs direct", x_prime, direct, c.significance));
    out.comparisons.push_back({"first-value shifted integral vs direct", x_prime, direct, std::nullopt});
  }
  if (params.restricted) {
    run_identity_check(c, params, out, "restricted-jump identity", root.substream(1), true);
  }
  if (params.thinning) {
    const std::string tag = "thinning";
    const RngStream base = root.substream(2);
    const std::size_t n = c.n_samples;
    std::vector<double> in_set(n), rest(n), full(n);
    parallel_for(n, [&](std::size_t i) {
      RngStream s = base.substream(i);
      const JumpPath path = simulate_path(params.model, c.truncation.horizon, s);
      const auto [a, b] = thin_path(path, params.set);
      in_set[i] = eval_jump_sum(a, c.truncation.horizon);
      rest[i] = eval_jump_sum(b, c.truncation.horizon);
      full[i] = eval_jump_sum(path, c.truncation.horizon);
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(in_set[i] + rest[i] - full[i]) / (1.0 + std::abs(full[i])));
    }
    StatReport r;
    r.name = tag;
    r.n = n;
    r.independence.push_back(independence_diagnostic(in_set, rest, "(in-set integral, rest)"));
    r.bounds.push_back(at_most("max relative |in_set + rest - full|", worst, kPathwiseTolerance));
    out.reports.push_back(std::move(r));
    const std::size_t rows = std::min(c.max_rows, n);
    for (std::size_t i = 0; i < rows; ++i) {
      out.samples.add(tag, i,
                      {kNaN, kNaN, kNaN, full[i], kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, in_set[i],
                       rest[i]});
    }
  }
  if (params.evaluators) {
    const std::string tag = "evaluator equivalence";
    const RngStream base = root.substream(3);
    const std::size_t per = params.eval_times;
    std::vector<double> ts(params.n_paths * per), bp(ts.size()), js(ts.size());
    parallel_for(params.n_paths, [&](std::size_t i) {
      RngStream s = base.substream(i);
      const LevyModel model = random_model(s);
      RngStream path_stream = s.fork();
      const JumpPath path = simulate_path(model, params.eval_horizon, path_stream);
      for (std::size_t j = 0; j < per; ++j) {
        const double t = params.eval_horizon * sample_uniform(s);
        ts[i * per + j] = t;
        bp[i * per + j] = eval_by_parts(path, t);
        js[i * per + j] = eval_jump_sum(path, t);
      }
    });
    std::vector<double> residual(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) residual[i] = std::abs(bp[i] - js[i]);
    const double worst = max_relative(residual, js);
    StatReport r;
    r.name = tag;
    r.n = ts.size();
    r.bounds.push_back(at_most("max relative |by_parts - jump_sum|", worst, kPathwiseTolerance));
    out.reports.push_back(std::move(r));
    out.summary["evaluator_max_relative_difference"] = worst;
    const std::size_t rows = std::min(c.max_rows, ts.size());
    for (std::size_t i = 0; i < rows; ++i) {
      out.samples.add(tag, i,
                      {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, residual[i], ts[i], bp[i], js[i], kNaN,
                       kNaN});
    }
  }
}

// =============================================================================
// operator-decompose

struct OperatorParams {
  OperatorModel model;
  std::vector<StoppingRule> rules;
  std::size_t n_paths = 10'000;
  std::vector<Eigen::MatrixXd> probes;
  DecomposeOptions options;
};

Json default_operator_q() { return Json::parse("[[1, 0.5], [-0.3, 2]]"); }
Json default_operator_driver() {
  return Json::parse(R"({"type": "independent", "coords": [
      {"jump_rate": 2, "jump_law": {"type": "exp", "rate": 1}},
      {"jump_rate": 1, "jump_law": {"type": "exp", "rate": 2}}]})");
}
Json default_probes() {
  // Eigenvalues {1, -0.5}, {+i, -i} and {1, 0}: none has all real parts > 0.
  return Json::parse("[[[1, 0], [0, -0.5]], [[0, 1], [-1, 0]], [[1, 2], [0, 0]]]");
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where, "expected a square matrix");
  const auto d = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      config_error(where, "expected a square matrix");
    }
    for (Eigen::Index col = 0; col < d; ++col) {
      const Json& x = row[static_cast<std::size_t>(col)];
      if (!x.is_number() || !std::isfinite(x.get<double>())) config_error(where, "entries must be finite numbers");
      m(r, col) = x.get<double>();
    }
  }
  return m;
}

OperatorParams parse_operator(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"Q", "driver", "rules", "rule", "n_paths", "spectral_probes", "max_tau"}, w);
  const Json q = p.contains("Q") ? p.at("Q") : default_operator_q();
  const Json driver = p.contains("driver") ? p.at("driver") : default_operator_driver();
  std::optional<OperatorModel> model;
  try {
    model.emplace(operator_model_from_json(q, driver, w));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSpectralCondition) throw;
    config_error(w + ".Q", e.what());
  }
  std::vector<StoppingRule> rules = rules_or(
      p, {StoppingRule{FirstJump{}}, StoppingRule{FixedTime{0.7}},
          StoppingRule{IndependentRandomTime{ExponentialLaw{1.0}}}},
      w);
  OperatorParams out{std::move(*model), std::move(rules), 10'000, {}, {}};
  out.n_paths = count_or(p, "n_paths", out.n_paths, 1, 100'000'000, w);
  const Json probes = p.contains("spectral_probes") ? p.at("spectral_probes") : default_probes();
  if (!probes.is_array()) config_error(w + ".spectral_probes", "expected an array of matrices");
  for (std::size_t i = 0; i < probes.size(); ++i) {
    out.probes.push_back(matrix_from_json(probes[i], w + ".spectral_probes[" + std::to_string(i) + "]"));
    if (out.probes.back().rows() > OperatorModel::kMaxDimension) {
      config_error(w + ".spectral_probes", "dimension above " + std::to_string(OperatorModel::kMaxDimension));
    }
  }
  out.options = decompose_options(p, w);
  return out;
}

void run_operator(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_operator(c);
  const OperatorModel& model = params.model;
  const int d = model.dimension();
  const RngStream root = root_stream(c);

  std::vector<std::string> columns{"tau"};
  for (const char* prefix : {"x_tau_", "x_prime_", "x_total_", "direct_", "recombined_"}) {
    for (int k = 1; k <= d; ++k) columns.push_back(prefix + std::to_string(k));
  }
  columns.push_back("residual");
  out.samples = SampleTable(columns);
  const std::size_t width = columns.size();
  auto record_row = [&](const std::string& tag, std::size_t i, const OperatorRecord* r,
                        const Eigen::VectorXd* direct, const Eigen::VectorXd* recombined) {
    std::vector<double> row(width, kNaN);
    if (r) {
      row[0] = r->tau;
      for (int k = 0; k < d; ++k) {
        row[1 + k] = r->x_tau(k);
        row[1 + d + k] = r->x_prime(k);
        row[1 + 2 * d + k] = r->x_total(k);
      }
      row[width - 1] = operator_residual(*r);
    }
    for (int k = 0; k < d; ++k) {
      if (direct) row[1 + 3 * d + k] = (*direct)(k);
      if (recombined) row[1 + 4 * d + k] = (*recombined)(k);
    }
    out.samples.add(tag, i, row);
  };

  // Pathwise recombination per rule.
  for (std::size_t k = 0; k < params.rules.size(); ++k) {
    const StoppingRule& rule = params.rules[k];
    const std::string tag = "operator pathwise[" + rule.name() + "]";
    const RngStream base = root.substream(k);
    std::vector<std::optional<OperatorRecord>> records(params.n_paths);
    in_context(tag, [&] {
      parallel_for(params.n_paths, [&](std::size_t i) {
        RngStream s = base.substream(i);
        try {
          records[i] = operator_decompose(model, rule, c.truncation, s, params.options);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInsufficientHorizon) throw;
        }
      });
      return 0;
    });
    double worst = 0.0;
    std::size_t discarded = 0, kept = 0;
    for (std::size_t i = 0; i < params.n_paths; ++i) {
      if (!records[i]) {
        ++discarded;
        continue;
      }
      ++kept;
      worst = std::max(worst, operator_residual(*records[i]) / (1.0 + records[i]->x_total.norm()));
      if (i < c.max_rows) record_row(tag, i, &*records[i], nullptr, nullptr);
    }
    StatReport r;
    r.name = tag;
    r.n = kept;
    r.bounds.push_back(at_most("max relative residual", worst, kOperatorPathwiseTolerance));
    r.bounds.push_back(at_most("discarded paths", static_cast<double>(discarded), 0.0));
    out.reports.push_back(std::move(r));
    out.summary["max_relative_residual"][rule.name()] = worst;
  }

  // Mean and law identity: direct draws vs x_tau + e^{-tau Q} X'' with X''
  // an independent copy, using the first rule.
  const std::uint64_t offset = params.rules.size();
  const std::size_t n = c.n_samples;
  std::vector<Eigen::VectorXd> direct(n), recombined(n);
  const RngStream direct_base = root.substream(offset);
  const RngStream rec_base = root.substream(offset + 1);
  const StoppingRule& rule = params.rules.front();
  in_context("operator law identity[" + rule.name() + "]", [&] {
    parallel_for(n, [&](std::size_t i) {
      RngStream s = direct_base.substream(i);
      direct[i] = sample_operator_integral(model, c.truncation, s);
      RngStream t = rec_base.substream(i);
      RngStream copy = t.fork();
      const OperatorRecord r = operator_decompose(model, rule, c.truncation, t, params.options);
      recombined[i] = r.x_tau + r.discount * sample_operator_integral(model, c.truncation, copy);
    });
    return 0;
  });

  const Eigen::VectorXd expected = model.mean_integral();
  StatReport mean;
  mean.name = "operator mean Q^-1 E[Y(1)]";
  mean.n = n;
  std::vector<std::vector<double>> dcoord(d, std::vector<double>(n)), rcoord(d, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      dcoord[k][i] = direct[i](k);
      rcoord[k][i] = recombined[i](k);
    }
  }
  for (int k = 0; k < d; ++k) {
    mean.moments.push_back(mean_check("mean coordinate " + std::to_string(k + 1), dcoord[k], expected(k)));
  }
  out.reports.push_back(std::move(mean));
  for (int k = 0; k < d; ++k) {
    const std::string name = "operator law identity[" + rule.name() + "] coordinate " + std::to_string(k + 1);
    out.reports.push_back(ks_report(name, rcoord[k], dcoord[k], c.significance));
    out.comparisons.push_back({name, rcoord[k], dcoord[k], std::nullopt});
  }
  const std::size_t rows = std::min(c.max_rows, n);
  for (std::size_t i = 0; i < rows; ++i) {
    record_row("operator law identity", i, nullptr, &direct[i], &recombined[i]);
  }

  // Spectral gate.
  StatReport gate;
  gate.name = "spectral gate";
  gate.n = params.probes.size();
  gate.bounds.push_back(at_least("configured Q: min Re eigenvalue", min_real_eigenvalue(model.q()),
                                 OperatorModel::kSpectralTolerance));
  for (std::size_t i = 0; i < params.probes.size(); ++i) {
    const Eigen::MatrixXd& q = params.probes[i];
    IndependentCoordinates coords;
    coords.coords.assign(static_cast<std::size_t>(q.rows()), gamma_bdlp(1.0, 1.0));
    bool rejected = false;
    try {
      OperatorModel probe(q, coords);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::kSpectralCondition;
    }
    gate.bounds.push_back(at_least("probe " + std::to_string(i) + " rejected (min Re eigenvalue " +
                                       fmt(min_real_eigenvalue(q)) + ")",
                                   rejected ? 1.0 : 0.0, 1.0));
  }
  out.reports.push_back(std::move(gate));
}

// =============================================================================
// null-calibration

struct NullParams {
  std::size_t repetitions = 100;
  ScalarLaw law = GammaLaw{2.0, 1.0};
  ScalarLaw shifted = GammaLaw{2.2, 1.0};
  std::size_t max_failures = 1;
  bool controls = true;
};

NullParams parse_null(const ExperimentConfig& c) {
  const std::string w = "params";
  const Json& p = c.params;
  check_keys(p, {"repetitions", "law", "shifted_law", "max_failures", "controls"}, w);
  NullParams out;
  out.repetitions = count_or(p, "repetitions", out.repetitions, 1, 100'000, w);
  if (p.contains("law")) out.law = scalar_law_from_json(p.at("law"), w + ".law");
  if (p.contains("shifted_law")) out.shifted = scalar_law_from_json(p.at("shifted_law"), w + ".shifted_law");
  out.max_failures = count_or(p, "max_failures", out.max_failures, 0, 100'000, w);
  out.controls = bool_or(p, "controls", out.controls, w);
  if (out.controls) require_independence_size(c, c.n_samples, "n_samples");
  return out;
}

void run_null(const ExperimentConfig& c, ExperimentResult& out) {
  const auto params = parse_null(c);
  const RngStream root = root_stream(c);
  out.samples = SampleTable({"a", "b"});
  const std::optional<CharacteristicFn> cf = cf_of(params.law);

  std::size_t failures = 0;
  double worst_ratio = 0.0;
  Json failed = Json::array();
  std::vector<double> first_a, first_b;
  for (std::size_t r = 0; r < params.repetitions; ++r) {
    auto a = law_draws(params.law, c.n_samples, root.substream(2 * r));
    auto b = law_draws(params.law, c.n_samples, root.substream(2 * r + 1));
    const KsResult ks = ks_two_sample(a, b, c.significance);
    worst_ratio = std::max(worst_ratio, ks.statistic / ks.threshold);
    if (!ks.pass) {
      ++failures;
      failed.push_back(r);
    }
    if (r == 0) {
      first_a = std::move(a);
      first_b = std::move(b);
    }
  }
  StatReport cal;
  cal.name = "null calibration: " + std::to_string(params.repetitions) + " same-law KS pairs of " +
             describe(params.law);
  cal.n = c.n_samples;
  cal.m = c.n_samples;
  cal.bounds.push_back(at_most("KS failures", static_cast<double>(failures),
                               static_cast<double>(params.max_failures)));
  out.reports.push_back(std::move(cal));
  out.summary["failures"] = failures;
  out.summary["failed_repetitions"] = failed;
  out.summary["max_D_over_threshold"] = worst_ratio;
  add_pair_rows(out, c, "null repetition 0", first_a, first_b, 0, 1);
  out.comparisons.push_back({"null repetition 0", first_a, first_b, cf});

  if (!params.controls) return;
  const std::uint64_t offset = 2 * params.repetitions;
  {
    const auto shifted = law_draws(params.shifted, c.n_samples, root.substream(offset));
    const std::string name = "control: " + describe(params.law) + " vs " + describe(params.shifted);
    StatReport r = ks_report(name, first_a, shifted, c.significance);
    r.expect_fail = true;
    out.reports.push_back(std::move(r));
    add_pair_rows(out, c, name, first_a, shifted, 0, 1);
    out.comparisons.push_back({name, first_a, shifted, cf_of(params.shifted)});
  }
  {
    StatReport r;
    r.name = "control: independence of y = x";
    r.n = r.m = first_a.size();
    r.expect_fail = true;
    r.independence.push_back(independence_diagnostic(first_a, first_a, "(x, x)"));
    out.reports.push_back(std::move(r));
  }
  if (const auto wrong = cf_of(params.shifted)) {
    StatReport r;
    r.name = "control: ecf of " + describe(params.law) + " vs cf of " + describe(params.shifted);
    r.n = first_a.size();
    r.expect_fail = true;
    r.bounds.push_back(at_most("ecf distance", ecf_distance(first_a, *wrong, default_cf_grid()),
                               ecf_bound(first_a.size())));
    out.reports.push_back(std::move(r));
  }
}

template <class Parse>
void validate_with(const ExperimentConfig& c, Parse parse) {
  (void)parse(c);
}

}  // namespace

const std::vector<ExperimentEntry>& experiment_registry() {
  static const std::vector<ExperimentEntry> registry{
      {"verify-gamma-bdlp", [](const ExperimentConfig& c) { validate_with(c, parse_gamma_bdlp); },
       run_gamma_bdlp},
      {"verify-theorem1", [](const ExperimentConfig& c) { validate_with(c, parse_stopped_law); },
       run_stopped_law},
      {"verify-corollary2-pathwise",
       [](const ExperimentConfig& c) { validate_with(c, parse_pathwise); }, run_pathwise},
      {"verify-corollary3", [](const ExperimentConfig& c) { validate_with(c, parse_factorization); },
       run_factorization},
      {"verify-prop1", [](const ExperimentConfig& c) { validate_with(c, parse_gamma_factor); }, run_gamma_factor},
      {"perpetuity-iterate", [](const ExperimentConfig& c) { validate_with(c, parse_perpetuity); },
       run_perpetuity},
      {"operator-decompose", [](const ExperimentConfig& c) { validate_with(c, parse_operator); },
       run_operator},
      {"null-calibration", [](const ExperimentConfig& c) { validate_with(c, parse_null); }, run_null},
  };
  return registry;
}

}  // namespace selfdec::detail
