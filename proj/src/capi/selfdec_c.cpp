#include "selfdec/selfdec.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "selfdec/error.hpp"
#include "selfdec/experiment.hpp"

using namespace selfdec;

struct selfdec_stream {
  RngStream rng;
};
struct selfdec_model {
  LevyModel model;
};
struct selfdec_path {
  JumpPath path;
};
struct selfdec_experiment {
  ExperimentConfig config;
  std::optional<ExperimentResult> result;
};

namespace {

thread_local std::string g_last_error;

selfdec_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return SELFDEC_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInsufficientHorizon:
      return SELFDEC_ERR_INSUFFICIENT_HORIZON;
    case ErrorCode::kNotContractive:
      return SELFDEC_ERR_NOT_CONTRACTIVE;
    case ErrorCode::kSpectralCondition:
      return SELFDEC_ERR_SPECTRAL_CONDITION;
    case ErrorCode::kConfig:
      return SELFDEC_ERR_CONFIG;
    case ErrorCode::kIo:
      return SELFDEC_ERR_IO;
  }
  return SELFDEC_ERR_INTERNAL;
}

selfdec_status fail(selfdec_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

/// Runs fn, translating exceptions into status codes.
template <class Fn>
selfdec_status guard(Fn&& fn) {
  try {
    fn();
    return SELFDEC_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SELFDEC_ERR_CONFIG, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(SELFDEC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SELFDEC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SELFDEC_ERR_INTERNAL, "unknown error");
  }
}

#define SELFDEC_CHECK_ARG(cond)                                                  \
  do {                                                                           \
    if (!(cond)) return fail(SELFDEC_ERR_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

selfdec_status copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1) {
    return fail(SELFDEC_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return SELFDEC_OK;
}

Json parse_json(const char* text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* selfdec_version(void) { return "1.0.0"; }

const char* selfdec_last_error(void) { return g_last_error.c_str(); }

const char* selfdec_status_name(selfdec_status status) {
  switch (status) {
    case SELFDEC_OK:
      return "ok";
    case SELFDEC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case SELFDEC_ERR_INSUFFICIENT_HORIZON:
      return "insufficient horizon";
    case SELFDEC_ERR_NOT_CONTRACTIVE:
      return "not contractive";
    case SELFDEC_ERR_SPECTRAL_CONDITION:
      return "spectral condition";
    case SELFDEC_ERR_CONFIG:
      return "config error";
    case SELFDEC_ERR_IO:
      return "i/o error";
    case SELFDEC_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
    case SELFDEC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

// ---- streams ----------------------------------------------------------------

selfdec_status selfdec_stream_create(uint64_t seed, uint64_t stream_id, selfdec_stream** out) {
  SELFDEC_CHECK_ARG(out);
  return guard([&] { *out = new selfdec_stream{RngStream(seed, stream_id)}; });
}

void selfdec_stream_destroy(selfdec_stream* stream) { delete stream; }

selfdec_status selfdec_stream_substream(const selfdec_stream* stream, uint64_t index,
                                        selfdec_stream** out) {
  SELFDEC_CHECK_ARG(stream && out);
  return guard([&] { *out = new selfdec_stream{stream->rng.substream(index)}; });
}

selfdec_status selfdec_stream_next_u64(selfdec_stream* stream, uint64_t* out) {
  SELFDEC_CHECK_ARG(stream && out);
  *out = stream->rng.next_u64();
  return SELFDEC_OK;
}

selfdec_status selfdec_sample_uniform(selfdec_stream* stream, double* out) {
  SELFDEC_CHECK_ARG(stream && out);
  *out = sample_uniform(stream->rng);
  return SELFDEC_OK;
}

selfdec_status selfdec_sample_gamma(selfdec_stream* stream, double shape, double rate,
                                    double* out) {
  SELFDEC_CHECK_ARG(stream && out);
  return guard([&] { *out = sample_gamma(GammaParams(shape, rate), stream->rng); });
}

selfdec_status selfdec_sample_law(selfdec_stream* stream, const char* law_json, double* out) {
  SELFDEC_CHECK_ARG(stream && law_json && out);
  return guard([&] { *out = sample(scalar_law_from_json(parse_json(law_json), "law"), stream->rng); });
}

// ---- models and paths ---------------------------------------------------------

selfdec_status selfdec_model_parse(const char* model_json, selfdec_model** out) {
  SELFDEC_CHECK_ARG(model_json && out);
  return guard([&] {
    *out = new selfdec_model{levy_model_from_json(parse_json(model_json), "model")};
  });
}

void selfdec_model_destroy(selfdec_model* model) { delete model; }

selfdec_status selfdec_model_mean_increment(const selfdec_model* model, double* out) {
  SELFDEC_CHECK_ARG(model && out);
  return guard([&] { *out = model->model.mean_increment(); });
}

selfdec_status selfdec_path_simulate(const selfdec_model* model, double horizon,
                                     selfdec_stream* stream, selfdec_path** out) {
  SELFDEC_CHECK_ARG(model && stream && out);
  return guard([&] { *out = new selfdec_path{simulate_path(model->model, horizon, stream->rng)}; });
}

selfdec_status selfdec_path_parse(const char* path_json, selfdec_path** out) {
  SELFDEC_CHECK_ARG(path_json && out);
  return guard([&] { *out = new selfdec_path{path_from_json(parse_json(path_json))}; });
}

selfdec_status selfdec_path_to_json(const selfdec_path* path, char* buf, size_t cap,
                                    size_t* needed) {
  SELFDEC_CHECK_ARG(path);
  std::string text;
  const selfdec_status s = guard([&] { text = to_json(path->path).dump(); });
  if (s != SELFDEC_OK) return s;
  return copy_out(text, buf, cap, needed);
}

void selfdec_path_destroy(selfdec_path* path) { delete path; }

selfdec_status selfdec_path_jump_count(const selfdec_path* path, size_t* out) {
  SELFDEC_CHECK_ARG(path && out);
  *out = path->path.jump_count();
  return SELFDEC_OK;
}

selfdec_status selfdec_path_value(const selfdec_path* path, double t, double* out) {
  SELFDEC_CHECK_ARG(path && out);
  return guard([&] { *out = path_value(path->path, t); });
}

selfdec_status selfdec_path_shift(const selfdec_path* path, double tau, selfdec_path** out) {
  SELFDEC_CHECK_ARG(path && out);
  return guard([&] { *out = new selfdec_path{shift_path(path->path, tau)}; });
}

selfdec_status selfdec_eval_jump_sum(const selfdec_path* path, double t, double* out) {
  SELFDEC_CHECK_ARG(path && out);
  return guard([&] { *out = eval_jump_sum(path->path, t); });
}

selfdec_status selfdec_eval_by_parts(const selfdec_path* path, double t, double* out) {
  SELFDEC_CHECK_ARG(path && out);
  return guard([&] { *out = eval_by_parts(path->path, t); });
}

selfdec_status selfdec_sample_discounted_integrals(const selfdec_model* model, double horizon,
                                                   size_t n, const selfdec_stream* stream,
                                                   double* out) {
  SELFDEC_CHECK_ARG(model && stream && (out || n == 0));
  return guard([&] {
    TruncationPolicy policy;
    policy.horizon = horizon;
    const auto xs = sample_discounted_integrals(model->model, policy, n, stream->rng);
    std::copy(xs.begin(), xs.end(), out);
  });
}

// ---- decomposition -----------------------------------------------------------

selfdec_status selfdec_decompose(const selfdec_model* model, const char* rule_json, double horizon,
                                 selfdec_stream* stream, selfdec_record* out) {
  SELFDEC_CHECK_ARG(model && rule_json && stream && out);
  return guard([&] {
    const StoppingRule rule = stopping_rule_from_json(parse_json(rule_json), "rule");
    TruncationPolicy policy;
    policy.horizon = horizon;
    const DecompositionRecord r = decompose(model->model, rule, policy, stream->rng);
    *out = selfdec_record{r.tau, r.x_tau, r.discount, r.x_prime, r.x_total};
  });
}

double selfdec_record_residual(const selfdec_record* record) {
  if (!record) return 0.0;
  return check_pathwise_identity(
      DecompositionRecord{record->tau, record->x_tau, record->discount, record->x_prime, record->x_total});
}

// ---- statistics ----------------------------------------------------------------

selfdec_status selfdec_ks_two_sample(const double* a, size_t n, const double* b, size_t m,
                                     double significance, selfdec_ks_result* out) {
  SELFDEC_CHECK_ARG(a && b && out);
  return guard([&] {
    const KsResult r = ks_two_sample({a, n}, {b, m}, significance);
    *out = selfdec_ks_result{r.statistic, r.threshold, r.significance, r.pass ? 1 : 0};
  });
}

// ---- experiments ---------------------------------------------------------------

selfdec_status selfdec_experiment_parse(const char* config_json, selfdec_experiment** out) {
  SELFDEC_CHECK_ARG(config_json && out);
  return guard([&] { *out = new selfdec_experiment{parse_config_text(config_json), std::nullopt}; });
}

selfdec_status selfdec_experiment_load(const char* config_path, selfdec_experiment** out) {
  SELFDEC_CHECK_ARG(config_path && out);
  return guard([&] { *out = new selfdec_experiment{load_config(config_path), std::nullopt}; });
}

void selfdec_experiment_destroy(selfdec_experiment* experiment) { delete experiment; }

selfdec_status selfdec_experiment_set_seed(selfdec_experiment* experiment, uint64_t seed) {
  SELFDEC_CHECK_ARG(experiment);
  experiment->config.seed = seed;
  experiment->result.reset();
  return SELFDEC_OK;
}

selfdec_status selfdec_experiment_set_out_dir(selfdec_experiment* experiment, const char* dir) {
  SELFDEC_CHECK_ARG(experiment && dir && *dir);
  experiment->config.out_dir = dir;
  return SELFDEC_OK;
}

selfdec_status selfdec_experiment_out_dir(const selfdec_experiment* experiment, char* buf,
                                          size_t cap, size_t* needed) {
  SELFDEC_CHECK_ARG(experiment);
  return copy_out(experiment->config.out_dir, buf, cap, needed);
}

selfdec_status selfdec_experiment_run(selfdec_experiment* experiment, int* all_pass) {
  SELFDEC_CHECK_ARG(experiment && all_pass);
  return guard([&] {
    experiment->result.reset();
    ExperimentResult result = run_experiment(experiment->config);
    write_artifacts(render_artifacts(experiment->config, result), experiment->config.out_dir);
    *all_pass = result.verdict() ? 1 : 0;
    experiment->result = std::move(result);
  });
}

selfdec_status selfdec_experiment_report_count(const selfdec_experiment* experiment, size_t* out) {
  SELFDEC_CHECK_ARG(experiment && out);
  if (!experiment->result) return fail(SELFDEC_ERR_INVALID_ARGUMENT, "experiment has not been run");
  *out = experiment->result->reports.size();
  return SELFDEC_OK;
}

selfdec_status selfdec_experiment_report_line(const selfdec_experiment* experiment, size_t index,
                                              char* buf, size_t cap, size_t* needed) {
  SELFDEC_CHECK_ARG(experiment);
  if (!experiment->result) return fail(SELFDEC_ERR_INVALID_ARGUMENT, "experiment has not been run");
  if (index >= experiment->result->reports.size()) {
    return fail(SELFDEC_ERR_INVALID_ARGUMENT, "report index out of range");
  }
  return copy_out(experiment->result->reports[index].csv_line(), buf, cap, needed);
}

const char* selfdec_report_csv_header(void) {
  static const std::string header = StatReport::csv_header();
  return header.c_str();
}

}  // extern "C"
