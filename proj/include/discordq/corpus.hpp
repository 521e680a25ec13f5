#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/start_word.hpp"
#include "discordq/timeutil.hpp"

namespace discordq {

struct Source {
  std::string id;
  std::string display_name;

  bool operator==(const Source&) const = default;
};

struct Article {
  std::string id;
  std::string source_id;
  std::string headline;
  std::string content;
  std::optional<std::string> summary;
  Timestamp published_at{};
  std::optional<std::string> url;

  bool operator==(const Article&) const = default;
};

// A question shipped inside a bundle, served by the fixture generator.
struct StoredQuestion {
  StartWord start_word = StartWord::What;
  std::string text;

  bool operator==(const StoredQuestion&) const = default;
};

// Articles are held in canonical (published_at, id) order and sources in id
// order, so two bundles that differ only in listing order load equal.
struct Story {
  std::string id;
  std::string title;
  std::vector<Article> articles;
  std::vector<Source> sources;
  // Older archive articles attached to the bundle; candidates for the
  // distractor set.
  std::vector<Article> distractors;
  std::vector<StoredQuestion> questions;

  const Source* find_source(std::string_view id) const;
  const Article* find_article(std::string_view id) const;
  std::vector<std::string> distractor_ids() const;
  /// Concatenated article contents in canonical order.
  std::string full_context() const;

  bool operator==(const Story&) const = default;
};

struct DistractorSet {
  std::vector<Article> articles;
  int cutoff_days = 90;
  std::size_t requested = 10;
  bool insufficient = false;  // fewer than `requested` eligible
  bool empty_archive = false;

  bool operator==(const DistractorSet&) const = default;
};

/// Validates, normalizes text fields and canonicalizes ordering. Unknown
/// fields are reported through `warnings` when given.
/// Throws ParseError on structural problems, ValidationError on invariant
/// violations.
Story story_from_json(const nlohmann::json& bundle,
                      std::vector<std::string>* warnings = nullptr);

Story load_story_bundle(const std::filesystem::path& path,
                        std::vector<std::string>* warnings = nullptr);

nlohmann::json story_to_json(const Story& story);

nlohmann::json article_to_json(const Article& a);
Article article_from_json(const nlohmann::json& j, std::vector<std::string>* warnings);

/// The explicit summary of the earliest article that has one, else the
/// lead three sentences of the earliest article.
std::string select_summary(const Story& story);

/// The `n` most recent archive articles published at least `cutoff_days`
/// before the story's earliest article.
DistractorSet select_distractors(const Story& story, std::span<const Article> archive,
                                 std::size_t n = 10, int cutoff_days = 90);

/// "https://www.news.bbc.co.uk/x" -> "bbc.co.uk". Empty when no host.
std::string registered_domain(std::string_view url);

}  // namespace discordq
