#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oldroyd/diag/energy.hpp"
#include "oldroyd/diag/fit.hpp"
#include "oldroyd/errors.hpp"

namespace oldroyd::experiment {

using json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// One output file held in memory until emit_outputs writes it.
struct Artifact {
  std::string name;
  std::string content;
};

struct Artifacts {
  std::vector<Artifact> files;
  std::string config_hash;  // hash of the resolved config text; empty when not tied to a config
  std::uint64_t seed = 0;
  std::string scenario;

  void add(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }
};

inline std::string records_csv(std::span<const diag::EnergyRecord> records) {
  std::ostringstream os;
  diag::write_records_csv(os, records);
  return os.str();
}

/// Adds `name` holding the records, skipped for an empty series.
inline void add_records(Artifacts& a, const std::string& name, std::span<const diag::EnergyRecord> records) {
  if (!records.empty()) a.add(name, records_csv(records));
}

inline json fit_json(const std::string& series, const diag::DecayFit& f) {
  return json{{"series", series},
              {"window", {f.t_start, f.t_end}},
              {"rate", f.rate},
              {"amplitude", f.amplitude},
              {"r2", f.r2}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Manifest listing every file with its size and FNV-1a hash, the seed and
/// the config hash. Contains nothing time- or host-dependent.
inline json manifest(const Artifacts& a) {
  json files = json::array();
  for (const auto& f : a.files)
    files.push_back({{"name", f.name}, {"bytes", f.content.size()}, {"fnv1a", hex64(fnv1a(f.content))}});
  return json{{"scenario", a.scenario}, {"seed", a.seed}, {"config_hash", a.config_hash}, {"files", files}};
}

/// Writes every artifact and then manifest.json into out_dir. Throws IoError.
inline void emit_outputs(const Artifacts& a, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << content;
    os.flush();
    if (!os) throw IoError("write failed for " + path.string());
  };
  for (const auto& f : a.files) write(f.name, f.content);
  write("manifest.json", dump(manifest(a)));
}

}  // namespace oldroyd::experiment
