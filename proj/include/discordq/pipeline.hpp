#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/categorize.hpp"
#include "discordq/config.hpp"
#include "discordq/consolidation.hpp"
#include "discordq/corpus.hpp"
#include "discordq/evalharness.hpp"
#include "discordq/providers.hpp"

namespace discordq {

struct QuestionAnalysis {
  CandidateQuestion question;
  std::vector<Answer> answers;  // at most one per source
  std::vector<NoAnswer> no_answers;
  Grouping grouping;
  QuestionStats stats;
  CategoryLabel label;
  std::vector<std::string> warnings;

  bool operator==(const QuestionAnalysis&) const = default;
};

// What the analysis needs to know about an article to attribute answers.
struct ArticleRef {
  std::string id;
  std::string source_id;
  std::string headline;
  std::optional<std::string> url;
  Timestamp published_at{};

  bool operator==(const ArticleRef&) const = default;
};

struct StoryAnalysis {
  std::string story_id;
  std::string title;
  Timestamp analyzed_at{};
  std::string config_fingerprint;
  // Cutoffs the labels were derived with; checked again on load.
  CategoryConfig categories;
  std::vector<Source> sources;
  std::vector<ArticleRef> articles;
  std::vector<QuestionAnalysis> questions;
  // Discord questions served to readers, by descending answering sources,
  // ties by question id.
  std::vector<std::string> selected;
  std::vector<std::string> warnings;

  const QuestionAnalysis* find_question(std::string_view id) const;
  bool operator==(const StoryAnalysis&) const = default;
};

/// Hash of every threshold plus the provider identifiers.
std::string config_fingerprint(const RunConfig& config, const Providers& providers);

/// Generates candidates per start word from the story summary, answers each
/// against every article, keeps one answer per source, consolidates,
/// counts distractor answers, categorizes and selects. Throws
/// AllProvidersDown when no question could be generated or answered.
StoryAnalysis analyze_story(const Story& story, const Providers& providers,
                            const RunConfig& config);

/// Highest confidence per source; ties go to the earlier article (per
/// `article_order`, canonical story order), then the smaller char_start.
/// Output follows source id order.
std::vector<Answer> reduce_per_source(std::span<const Answer> answers,
                                      std::span<const std::string> article_order);

/// Drops normalized exact duplicates and near-duplicates (token F1 >=
/// `near_duplicate`) of earlier candidates.
std::vector<CandidateQuestion> dedup_questions(std::span<const CandidateQuestion> candidates,
                                               double near_duplicate = 0.9);

/// Discord questions ordered by answering sources (descending), then id.
std::vector<std::string> select_questions(std::span<const QuestionAnalysis> questions,
                                          std::size_t limit);

QuestionStats question_stats(const Story& story, std::span<const Answer> answers,
                             const Grouping& grouping, std::size_t n_distractor_answers);

nlohmann::json analysis_to_json(const StoryAnalysis& a);
/// Also re-derives every label from its stats; a mismatch throws
/// ValidationError. Structural problems throw ParseError.
StoryAnalysis analysis_from_json(const nlohmann::json& j);

/// Every question's label as scorecard input, attributed to `system`.
std::vector<CategorizedQuestion> categorized_questions(const StoryAnalysis& a, const std::string& system);

/// Reader-facing rendering: questions with labels and groups (members
/// attributed to sources and article URLs) plus the precomputed grid.
nlohmann::json render_public_analysis(const StoryAnalysis& a);

}  // namespace discordq
