#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "discordq/corpus.hpp"

namespace discordq {

struct StoryRef {
  std::string ref;
  std::string title;
};

struct ListingEntry {
  std::string article_id;
  std::string url;
  std::string headline;
  std::string published_at;  // ISO-8601 as delivered by the feed
  std::optional<std::string> summary;
  std::string content_ref;   // client-specific handle for fetch_content
};

struct StoryListing {
  std::string ref;
  std::string title;
  std::vector<ListingEntry> entries;
};

// Aggregator access. Implementations must tolerate concurrent
// fetch_content calls.
class FeedClient {
 public:
  virtual ~FeedClient() = default;
  virtual std::vector<StoryRef> list_recent_stories() = 0;
  /// Throws StoryUnavailable.
  virtual StoryListing get_story(const std::string& ref) = 0;
  /// Article body text. Throws FetchError.
  virtual std::string fetch_content(const ListingEntry& entry) = 0;
};

// Replays responses recorded on disk:
//   <root>/index.json            {"stories": [{"ref", "title"}]}
//   <root>/<ref>/listing.json    {"ref", "title", "articles": [{"id", "url",
//                                 "headline", "published_at", "summary"?,
//                                 "body_file"}]}
//   <root>/<ref>/<body_file>     raw article text
class RecordedFeedClient final : public FeedClient {
 public:
  explicit RecordedFeedClient(std::filesystem::path root);

  std::vector<StoryRef> list_recent_stories() override;
  StoryListing get_story(const std::string& ref) override;
  std::string fetch_content(const ListingEntry& entry) override;

 private:
  std::filesystem::path root_;
};

struct FetchFailure {
  std::string article_id;
  std::string url;
  std::string reason;

  bool operator==(const FetchFailure&) const = default;
};

struct FetchReport {
  std::string story_ref;
  std::vector<FetchFailure> failures;  // canonical (published_at, id) order
  std::size_t fetched = 0;
  std::size_t distinct_sources = 0;
  bool below_source_minimum = false;
};

struct FetchResult {
  Story story;
  FetchReport report;
};

inline constexpr std::size_t kMinimumSources = 10;

/// Downloads a story's listing and article bodies (concurrently), maps each
/// article to a source by registered domain, and flags stories with fewer
/// than kMinimumSources distinct sources. Failed articles are skipped and
/// recorded. Throws StoryUnavailable when nothing usable remains.
FetchResult fetch_story(FeedClient& client, const std::string& story_ref);

nlohmann::json fetch_report_to_json(const FetchReport& report);

}  // namespace discordq
