#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "selfdec/decomposition.hpp"
#include "selfdec/operator_sd.hpp"
#include "selfdec/perpetuity.hpp"
#include "selfdec/stats.hpp"

namespace selfdec {

using Json = nlohmann::json;

// Readers throw Error(kConfig) naming the offending location `where`, and
// reject keys they do not know.

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where);
double get_number(const Json& j, const char* key, const std::string& where);
double get_number_or(const Json& j, const char* key, double fallback, const std::string& where);
std::uint64_t get_uint_or(const Json& j, const char* key, std::uint64_t fallback,
                          const std::string& where);

ScalarLaw scalar_law_from_json(const Json& j, const std::string& where);
Json to_json(const ScalarLaw& law);

LevyModel levy_model_from_json(const Json& j, const std::string& where);
Json to_json(const LevyModel& model);

JumpSet jump_set_from_json(const Json& j, const std::string& where);
Json to_json(const JumpSet& set);

StoppingRule stopping_rule_from_json(const Json& j, const std::string& where);
Json to_json(const StoppingRule& rule);

TruncationPolicy truncation_from_json(const Json& j, const std::string& where);

AffinePairLaw affine_law_from_json(const Json& j, const std::string& where);

OperatorModel operator_model_from_json(const Json& q, const Json& driver,
                                       const std::string& where);

/// {"horizon": T, "jumps": [[t, size], ...], "drift": d, "gauss_var": v}
/// plus "gauss_stream": [seed, stream_id] when a Brownian part is present.
/// Only the jump part and parameters round-trip exactly; a reloaded
/// Brownian cache replays the same draws when queried in the same order.
Json to_json(const JumpPath& path);
JumpPath path_from_json(const Json& j);

Json to_json(const KsResult& ks);
Json to_json(const StatReport& report);

/// CSV row: tau,x_tau,discount,x_prime,x_total,residual
std::string record_csv_header();
std::string record_csv_row(const DecompositionRecord& r);

/// Shortest text that round-trips; CSV cells use 17 significant digits.
std::string format_double(double x);

/// 64-bit FNV-1a of a canonical JSON dump, as 16 hex digits.
std::string fingerprint(const Json& j);

}  // namespace selfdec
