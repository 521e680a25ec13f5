#include "discordq/feed.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "discordq/errors.hpp"
#include "discordq/text.hpp"

namespace discordq {
namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoryUnavailable("missing recorded response " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

}  // namespace

RecordedFeedClient::RecordedFeedClient(std::filesystem::path root) : root_(std::move(root)) {}

std::vector<StoryRef> RecordedFeedClient::list_recent_stories() {
  auto j = read_json(root_ / "index.json");
  std::vector<StoryRef> out;
  for (const auto& s : j.at("stories"))
    out.push_back({s.at("ref").get<std::string>(), s.value("title", "")});
  return out;
}

StoryListing RecordedFeedClient::get_story(const std::string& ref) {
  if (ref.empty() || ref.find('/') != std::string::npos || ref.find("..") != std::string::npos)
    throw StoryUnavailable("invalid story ref '" + ref + "'");
  auto path = root_ / ref / "listing.json";
  if (!std::filesystem::exists(path)) throw StoryUnavailable("unknown story ref '" + ref + "'");
  auto j = read_json(path);
  StoryListing listing;
  listing.ref = ref;
  listing.title = j.value("title", "");
  for (const auto& a : j.at("articles")) {
    ListingEntry e;
    e.article_id = a.at("id").get<std::string>();
    e.url = a.value("url", "");
    e.headline = a.value("headline", "");
    e.published_at = a.value("published_at", "");
    if (a.contains("summary") && a["summary"].is_string()) e.summary = a["summary"].get<std::string>();
    e.content_ref = (root_ / ref / a.value("body_file", e.article_id + ".txt")).string();
    listing.entries.push_back(std::move(e));
  }
  return listing;
}

std::string RecordedFeedClient::fetch_content(const ListingEntry& entry) {
  std::ifstream in(entry.content_ref, std::ios::binary);
  if (!in) throw FetchError("no recorded body for " + entry.url);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FetchResult fetch_story(FeedClient& client, const std::string& story_ref) {
  StoryListing listing = client.get_story(story_ref);

  struct Outcome {
    std::optional<Article> article;
    std::optional<FetchFailure> failure;
  };
  std::vector<std::future<Outcome>> pending;
  pending.reserve(listing.entries.size());
  for (const auto& entry : listing.entries) {
    pending.push_back(std::async(std::launch::async, [&client, entry]() -> Outcome {
      try {
        Article a;
        a.id = entry.article_id;
        a.url = entry.url;
        a.source_id = registered_domain(entry.url);
        if (a.source_id.empty()) throw FetchError("cannot derive source from url");
        a.headline = text::normalize(entry.headline);
        a.published_at = parse_timestamp(entry.published_at);
        if (entry.summary) {
          auto s = text::normalize(*entry.summary);
          if (!s.empty()) a.summary = std::move(s);
        }
        a.content = text::normalize(client.fetch_content(entry));
        if (a.content.empty()) throw FetchError("empty body");
        return {std::move(a), std::nullopt};
      } catch (const Error& e) {
        return {std::nullopt, FetchFailure{entry.article_id, entry.url, e.what()}};
      }
    }));
  }

  FetchResult result;
  result.report.story_ref = story_ref;
  Story& story = result.story;
  story.id = story_ref;
  story.title = text::normalize(listing.title);
  std::vector<std::pair<std::optional<Timestamp>, FetchFailure>> failures;
  std::set<std::string> source_ids;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    Outcome o = pending[i].get();
    if (o.article) {
      source_ids.insert(o.article->source_id);
      story.articles.push_back(std::move(*o.article));
    } else {
      std::optional<Timestamp> ts;
      try {
        ts = parse_timestamp(listing.entries[i].published_at);
      } catch (const Error&) {
      }
      failures.emplace_back(ts, std::move(*o.failure));
    }
  }
  if (story.articles.empty())
    throw StoryUnavailable("no article of story '" + story_ref + "' could be fetched");

  std::sort(story.articles.begin(), story.articles.end(), [](const Article& a, const Article& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.id < b.id;
  });
  // Report order mirrors canonical article order; undated failures last.
  std::sort(failures.begin(), failures.end(), [](const auto& x, const auto& y) {
    if (x.first.has_value() != y.first.has_value()) return x.first.has_value();
    if (x.first && *x.first != *y.first) return *x.first < *y.first;
    return x.second.article_id < y.second.article_id;
  });
  for (auto& f : failures) result.report.failures.push_back(std::move(f.second));
  for (const auto& id : source_ids) story.sources.push_back({id, id});

  result.report.fetched = story.articles.size();
  result.report.distinct_sources = source_ids.size();
  result.report.below_source_minimum = source_ids.size() < kMinimumSources;
  // Round-trip through the bundle validator so fetched stories obey the
  // same invariants as loaded ones.
  result.story = story_from_json(story_to_json(story));
  return result;
}

json fetch_report_to_json(const FetchReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"article_id", f.article_id}, {"url", f.url}, {"reason", f.reason}});
  return {{"story_ref", r.story_ref},
          {"fetched", r.fetched},
          {"distinct_sources", r.distinct_sources},
          {"below_source_minimum", r.below_source_minimum},
          {"failures", failures}};
}

}  // namespace discordq
