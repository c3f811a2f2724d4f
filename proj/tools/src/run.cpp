#include "rnc_cli/run.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "rnc/errors.hpp"
#include "rnc_cli/config.hpp"
#include "rnc_cli/output.hpp"

namespace rnc::cli {

namespace {

constexpr std::array<const char*, 6> kCommands = {"validate", "simulate", "eigen", "observe", "sweep", "control"};

const char* kUsage =
    "usage: rnc <command> <config.toml|config.json> [--seed N] [--output-dir DIR] [--set key=value]...\n"
    "commands: validate simulate eigen observe sweep control\n";

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::vector<std::string> overrides;
};

std::string resolve_output_dir(const Invocation& inv, const ExperimentConfig& cfg) {
  if (!inv.output_dir.empty()) return inv.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

int validate_only(const nlohmann::json& doc, std::ostream& out) {
  const auto diags = diagnose(doc);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "validate";
  j["valid"] = diags.empty();
  j["diagnostics"] = diags;
  out << render_json(j);
  return diags.empty() ? kExitOk : kExitValidation;
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  nlohmann::json doc;
  try {
    doc = read_document(inv.config_path);
  } catch (const UnreadableConfig& e) {
    err << "rnc: " << e.what() << "\n";
    return kExitUnreadable;
  }

  ExperimentConfig cfg;
  try {
    for (const auto& o : inv.overrides) apply_override(doc, o);
    if (inv.seed) doc["seed"] = *inv.seed;
    if (inv.command == "validate") return validate_only(doc, out);
    cfg = interpret(doc);
  } catch (const ValidationError& e) {
    err << "rnc: " << e.what() << "\n";
    return kExitValidation;
  }

  ManifestInfo info;
  info.command = inv.command;
  info.config_hash = hex64(fnv1a64(cfg.raw.dump()));
  info.seed = cfg.seed;
  info.stack = cfg.stack;
  info.status = "ok";

  std::unique_ptr<OutputSet> set;
  int code = kExitOk;
  try {
    set = std::make_unique<OutputSet>(resolve_output_dir(inv, cfg));
    if (inv.command == "simulate")
      run_simulate(cfg, *set, out);
    else if (inv.command == "eigen")
      run_eigen(cfg, *set, out);
    else if (inv.command == "observe")
      run_observe(cfg, *set, out);
    else if (inv.command == "sweep")
      run_sweep(cfg, *set, out);
    else if (inv.command == "control")
      run_control(cfg, *set, out);
  } catch (const ValidationError& e) {
    err << "rnc: " << e.what() << "\n";
    info.status = "validation_error";
    info.message = e.what();
    code = kExitValidation;
  } catch (const SolverError& e) {
    err << "rnc: " << e.what() << "\n";
    info.status = "solver_failure";
    info.message = e.what();
    code = kExitSolver;
  }
  if (set) {
    try {
      write_manifest(*set, info);
    } catch (const ValidationError& e) {
      err << "rnc: " << e.what() << "\n";
      if (code == kExitOk) code = kExitValidation;
    }
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << kUsage;
    return kExitUsage;
  }
  const std::string& first = args.front();
  if (first == "--help" || first == "-h") {
    out << kUsage;
    return kExitOk;
  }
  if (first == "--version") {
    out << "rnc " << RNC_VERSION << "\n";
    return kExitOk;
  }
  if (std::find(kCommands.begin(), kCommands.end(), first) == kCommands.end()) {
    err << "rnc: unknown command '" << first << "'\n" << kUsage;
    return kExitUsage;
  }

  Invocation inv;
  inv.command = first;
  CLI::App app{"Boundary control experiments for multilayer sandwich beams", "rnc " + first};
  app.add_option("config", inv.config_path, "TOML or JSON experiment config")->required();
  app.add_option("--seed", inv.seed, "Random seed for ensembles and random initial data");
  app.add_option("--output-dir", inv.output_dir, "Output directory (overrides RNC_OUTPUT_DIR and the config)");
  app.add_option("--set", inv.overrides, "Override a config value, e.g. --set time.T=4")->take_all();

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  return execute(inv, out, err);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rnc::cli
