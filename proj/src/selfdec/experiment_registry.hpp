#pragma once

#include <vector>

#include "selfdec/experiment.hpp"

namespace selfdec::detail {

struct ExperimentEntry {
  const char* name;
  /// Parses config.params and checks cross-field constraints; throws kConfig.
  void (*validate)(const ExperimentConfig& config);
  void (*run)(const ExperimentConfig& config, ExperimentResult& out);
};

const std::vector<ExperimentEntry>& experiment_registry();

}  // namespace selfdec::detail
