#include "rnc_cli/output.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <Eigen/Core>
#include <toml.hpp>

#include "rnc/errors.hpp"

namespace rnc::cli {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

std::string render_json(const Json& doc) { return doc.dump(2) + "\n"; }

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void OutputSet::write_text(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw ValidationError("write failed for '" + path.string() + "'");
  files_.push_back(name);
}

void OutputSet::write_json(const std::string& name, const Json& doc) { write_text(name, render_json(doc)); }

Json versions() {
  Json v;
  v["rncontrol"] = RNC_VERSION;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["tomlplusplus"] = std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." +
                      std::to_string(TOML_LIB_PATCH);
  v["compiler"] = __VERSION__;
  return v;
}

void write_manifest(OutputSet& out, const ManifestInfo& info) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

  Json m;
  m["schema_version"] = kSchemaVersion;
  m["command"] = info.command;
  m["status"] = info.status;
  if (!info.message.empty()) m["message"] = info.message;
  m["config_hash"] = "fnv1a64:" + info.config_hash;
  m["seed"] = info.seed;
  Json tau;
  try {
    tau["physical"] = min_control_time(info.stack, TauInterpretation::physical);
    tau["literal"] = min_control_time(info.stack, TauInterpretation::literal);
  } catch (const ValidationError&) {
    tau = nullptr;
  }
  m["tau"] = tau;
  m["versions"] = versions();
  m["files"] = out.files();
  m["created_utc"] = stamp;
  out.write_json("manifest.json", m);
}

}  // namespace rnc::cli
