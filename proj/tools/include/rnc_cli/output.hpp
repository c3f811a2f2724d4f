#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rnc/beam_model.hpp"

namespace rnc::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Collects data files under one directory and writes the manifest last.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const Json& doc);
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

// Pretty-printed, two-space indent, trailing newline.
std::string render_json(const Json& doc);

struct ManifestInfo {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  LayerStack stack;
  std::string status;  // ok | validation_error | solver_failure
  std::string message;
};

Json versions();
void write_manifest(OutputSet& out, const ManifestInfo& info);

}  // namespace rnc::cli
