#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "discordq/pipeline.hpp"

namespace discordq {

/// True for ids made of [A-Za-z0-9._-] that do not start with a dot.
bool is_safe_story_id(std::string_view id);

// One JSON record per (story id, config fingerprint):
//   <root>/<story_id>/<fingerprint>.json
// Each record carries the SHA-256 of its analysis body. Writes go through a
// temp file and a rename, serialized per story id; readers never see a
// partial record.
class AnalysisStore {
 public:
  explicit AnalysisStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Returns the record path. Throws InputError for unsafe ids.
  std::filesystem::path store(const StoryAnalysis& analysis);

  /// Throws NotFound or CorruptRecord.
  StoryAnalysis load(const std::string& story_id, const std::string& fingerprint) const;
  /// Without a fingerprint: the record with the latest analyzed_at, ties
  /// by fingerprint.
  StoryAnalysis load(const std::string& story_id) const;

  bool contains(const std::string& story_id,
                const std::optional<std::string>& fingerprint = std::nullopt) const;
  /// Story ids with at least one record, sorted.
  std::vector<std::string> story_ids() const;
  /// Fingerprints stored for one story, sorted.
  std::vector<std::string> fingerprints(const std::string& story_id) const;

  /// SHA-256 hex of the analysis body's compact serialization.
  static std::string checksum(const nlohmann::json& analysis);
  static nlohmann::json make_record(const StoryAnalysis& analysis);
  /// Throws CorruptRecord.
  static StoryAnalysis parse_record(std::string_view bytes);

 private:
  std::mutex& story_mutex(const std::string& story_id);

  std::filesystem::path root_;
  std::mutex mutexes_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> mutexes_;
};

}  // namespace discordq
