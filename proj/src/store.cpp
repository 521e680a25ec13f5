#include "discordq/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "digest.hpp"
#include "discordq/errors.hpp"

namespace discordq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRecordFormat = 1;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFound("no record at " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_safe(std::string_view id, std::string_view what) {
  if (!is_safe_story_id(id)) throw InputError("unsafe " + std::string(what) + ": '" + std::string(id) + "'");
}

}  // namespace

bool is_safe_story_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_' || c == '.';
  });
}

AnalysisStore::AnalysisStore(fs::path root) : root_(std::move(root)) {}

std::mutex& AnalysisStore::story_mutex(const std::string& story_id) {
  std::lock_guard lock(mutexes_guard_);
  auto& m = mutexes_[story_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

std::string AnalysisStore::checksum(const json& analysis) { return detail::sha256_hex(analysis.dump()); }

json AnalysisStore::make_record(const StoryAnalysis& analysis) {
  json body = analysis_to_json(analysis);
  return {{"format", kRecordFormat}, {"checksum", checksum(body)}, {"analysis", body}};
}

StoryAnalysis AnalysisStore::parse_record(std::string_view bytes) {
  json record;
  try {
    record = json::parse(bytes);
  } catch (const json::exception& e) {
    throw CorruptRecord(std::string("unreadable record: ") + e.what());
  }
  if (!record.is_object() || !record.contains("analysis") || !record.contains("checksum"))
    throw CorruptRecord("record lacks analysis or checksum");
  if (record.value("format", 0) != kRecordFormat) throw CorruptRecord("unsupported record format");
  const auto& body = record["analysis"];
  if (!record["checksum"].is_string() || record["checksum"].get<std::string>() != checksum(body))
    throw CorruptRecord("checksum mismatch");
  try {
    return analysis_from_json(body);
  } catch (const Error& e) {
    throw CorruptRecord(std::string("invalid analysis: ") + e.what());
  }
}

fs::path AnalysisStore::store(const StoryAnalysis& analysis) {
  require_safe(analysis.story_id, "story id");
  require_safe(analysis.config_fingerprint, "fingerprint");
  const std::string bytes = make_record(analysis).dump(2) + "\n";

  std::lock_guard lock(story_mutex(analysis.story_id));
  fs::path dir = root_ / analysis.story_id;
  fs::create_directories(dir);
  fs::path target = dir / (analysis.config_fingerprint + ".json");
  static std::atomic<unsigned> counter{0};
  fs::path tmp = dir / (".tmp-" + analysis.config_fingerprint + "-" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << bytes;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
  return target;
}

StoryAnalysis AnalysisStore::load(const std::string& story_id, const std::string& fingerprint) const {
  require_safe(story_id, "story id");
  require_safe(fingerprint, "fingerprint");
  fs::path p = root_ / story_id / (fingerprint + ".json");
  if (!fs::is_regular_file(p)) throw NotFound("no analysis for " + story_id + " @ " + fingerprint);
  auto analysis = parse_record(read_file(p));
  if (analysis.story_id != story_id || analysis.config_fingerprint != fingerprint)
    throw CorruptRecord("record at " + p.string() + " belongs to another key");
  return analysis;
}

StoryAnalysis AnalysisStore::load(const std::string& story_id) const {
  auto fps = fingerprints(story_id);
  if (fps.empty()) throw NotFound("no analysis for " + story_id);
  std::optional<StoryAnalysis> best;
  for (const auto& fp : fps) {
    auto a = load(story_id, fp);
    if (!best || a.analyzed_at > best->analyzed_at) best = std::move(a);
  }
  return *best;
}

bool AnalysisStore::contains(const std::string& story_id, const std::optional<std::string>& fingerprint) const {
  if (!is_safe_story_id(story_id)) return false;
  if (fingerprint) return is_safe_story_id(*fingerprint) && fs::is_regular_file(root_ / story_id / (*fingerprint + ".json"));
  return !fingerprints(story_id).empty();
}

std::vector<std::string> AnalysisStore::fingerprints(const std::string& story_id) const {
  std::vector<std::string> out;
  if (!is_safe_story_id(story_id)) return out;
  fs::path dir = root_ / story_id;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    auto stem = e.path().stem().string();
    if (is_safe_story_id(stem)) out.push_back(stem);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> AnalysisStore::story_ids() const {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) return out;
  for (const auto& e : fs::directory_iterator(root_)) {
    if (!e.is_directory()) continue;
    auto id = e.path().filename().string();
    if (!fingerprints(id).empty()) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace discordq
