#pragma once

// Dataset manifests: JSON Lines, UTF-8, one record per segment after a
// header line {"schema_version": 1, "mode": "..."}. Paths are resolved
// against the manifest's directory at load.

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"

namespace emodep::data {

enum class ManifestMode { iemocap, mosei, depression };

inline std::string to_string(ManifestMode m) {
  switch (m) {
    case ManifestMode::iemocap: return "iemocap";
    case ManifestMode::mosei: return "mosei";
    default: return "depression";
  }
}

inline ManifestMode manifest_mode_from_string(const std::string& s) {
  if (s == "iemocap") return ManifestMode::iemocap;
  if (s == "mosei") return ManifestMode::mosei;
  if (s == "depression") return ManifestMode::depression;
  throw InvalidInput("unknown manifest mode '" + s + "'");
}

struct ManifestEntry {
  std::string segment_id;
  std::string session_id;
  std::optional<std::string> wav_path;
  std::optional<std::string> embedding_path;
  std::optional<std::string> categorical;          // normalized class name
  std::optional<std::array<float, 3>> attributes;  // (v, a, d)
  std::optional<float> sentiment;
  std::optional<int> depression_label;             // 1 depressed, 0 healthy
  std::string split;                               // train | dev
};

struct Manifest {
  int schema_version = 1;
  ManifestMode mode = ManifestMode::iemocap;
  std::vector<ManifestEntry> entries;
};

namespace detail {

inline void validate(const Manifest& m, const std::string& origin) {
  std::set<std::string> ids;
  std::map<std::string, int> session_label;
  std::map<std::string, std::string> session_split;
  for (const auto& e : m.entries) {
    const std::string where = origin + ", segment '" + e.segment_id + "'";
    if (!ids.insert(e.segment_id).second)
      throw DuplicateId(origin + ": duplicate segment id '" + e.segment_id + "'");
    if (e.split != "train" && e.split != "dev")
      throw InvalidInput(where + ": split '" + e.split + "', want train|dev");
    if (e.wav_path && !std::filesystem::exists(*e.wav_path))
      throw MissingFile(where + ": wav file not found: " + *e.wav_path);
    if (e.embedding_path && !std::filesystem::exists(*e.embedding_path))
      throw MissingFile(where + ": embedding file not found: " + *e.embedding_path);

    switch (m.mode) {
      case ManifestMode::iemocap:
        if (!e.categorical)
          throw LabelInconsistent(where + ": iemocap entry missing categorical label");
        if (!e.attributes)
          throw LabelInconsistent(where + ": iemocap entry missing attribute labels");
        break;
      case ManifestMode::mosei:
        if (!e.sentiment)
          throw LabelInconsistent(where + ": mosei entry missing sentiment score");
        break;
      case ManifestMode::depression: {
        if (!e.depression_label)
          throw LabelInconsistent(where + ": depression entry missing session label");
        auto [it, fresh] = session_label.emplace(e.session_id, *e.depression_label);
        if (!fresh && it->second != *e.depression_label)
          throw LabelInconsistent(origin + ": session '" + e.session_id +
                                  "' carries conflicting depression labels");
        auto [sit, sfresh] = session_split.emplace(e.session_id, e.split);
        if (!sfresh && sit->second != e.split)
          throw LabelInconsistent(origin + ": session '" + e.session_id +
                                  "' spans both train and dev splits");
        break;
      }
    }
  }
}

}  // namespace detail

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("manifest not found: " + path);
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();

  Manifest m;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    if (!header_seen) {
      m.schema_version = j.at("schema_version").get<int>();
      if (m.schema_version != 1)
        throw InvalidInput(path + ": unsupported schema_version " +
                           std::to_string(m.schema_version));
      m.mode = manifest_mode_from_string(j.at("mode").get<std::string>());
      header_seen = true;
      continue;
    }
    try {
      ManifestEntry e;
      e.segment_id = j.at("segment_id").get<std::string>();
      e.session_id = j.at("session_id").get<std::string>();
      e.split = j.at("split").get<std::string>();
      auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
      };
      if (j.contains("wav")) e.wav_path = resolve(j.at("wav").get<std::string>());
      if (j.contains("embedding"))
        e.embedding_path = resolve(j.at("embedding").get<std::string>());
      if (j.contains("categorical")) {
        // normalizes "excited" to "happy"
        int cls = emotion::class_from_string(j.at("categorical").get<std::string>());
        e.categorical = emotion::kClassNames[cls];
      }
      if (j.contains("attributes")) {
        auto a = j.at("attributes").get<std::vector<float>>();
        if (a.size() != 3)
          throw LabelInconsistent("attributes must have 3 values (v, a, d)");
        e.attributes = std::array<float, 3>{a[0], a[1], a[2]};
      }
      if (j.contains("sentiment")) e.sentiment = j.at("sentiment").get<float>();
      if (j.contains("depression_label"))
        e.depression_label = j.at("depression_label").get<int>();
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(line_no) +
                         ": bad manifest entry: " + e.what());
    }
  }
  if (!header_seen) throw InvalidInput(path + ": empty manifest (no header line)");
  detail::validate(m, path);
  return m;
}

inline void save_manifest(const std::string& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << nlohmann::json{{"schema_version", m.schema_version},
                        {"mode", to_string(m.mode)}}
             .dump()
      << "\n";
  for (const auto& e : m.entries) {
    nlohmann::json j{{"segment_id", e.segment_id},
                     {"session_id", e.session_id},
                     {"split", e.split}};
    if (e.wav_path) j["wav"] = *e.wav_path;
    if (e.embedding_path) j["embedding"] = *e.embedding_path;
    if (e.categorical) j["categorical"] = *e.categorical;
    if (e.attributes)
      j["attributes"] = std::vector<float>{(*e.attributes)[0], (*e.attributes)[1],
                                           (*e.attributes)[2]};
    if (e.sentiment) j["sentiment"] = *e.sentiment;
    if (e.depression_label) j["depression_label"] = *e.depression_label;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write: " + path);
}

}  // namespace emodep::data
