#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rnc/beam_model.hpp"
#include "rnc/fem_assembly.hpp"
#include "rnc/hum_control.hpp"
#include "rnc/observability.hpp"

namespace rnc::cli {

// Raised when the config file cannot be read or parsed.
struct UnreadableConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Initial data for simulate and control targets.
struct InitialSpec {
  std::string kind = "modes";  // modes | localized | random
  std::vector<int> modes{1};   // 1-based undamped mode indices
  std::vector<double> displacement{1.0};
  std::vector<double> velocity;  // multiplies omega_k phi_k
  double width = 0.2;
  int band = 10;
};

struct ExperimentConfig {
  nlohmann::json raw;  // effective document after overrides, output_dir removed

  LayerStack stack;
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  Mesh mesh;

  double T = 0.0;
  double dt = 0.0;
  int steps = 0;

  std::uint64_t seed = 1;
  std::string output_dir = "rnc_out";

  EnsembleSpec ensemble;
  std::vector<double> T_grid;
  int eigen_count = 20;
  bool eigen_damping = true;
  HumOptions hum;
  InitialSpec initial;
};

// TOML unless the extension is .json.
nlohmann::json read_document(const std::string& path);

// "section.key=value"; value parsed as JSON, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Throws ValidationError with every problem found.
ExperimentConfig interpret(const nlohmann::json& doc);

std::vector<std::string> diagnose(const nlohmann::json& doc);

}  // namespace rnc::cli
