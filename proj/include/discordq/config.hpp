#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/categorize.hpp"
#include "discordq/consolidation.hpp"
#include "discordq/providers.hpp"
#include "discordq/timeutil.hpp"

namespace discordq {

struct ProviderConfig {
  std::string qg = "fixture+template";  // fixture | template | fixture+template
  std::string qa = "lexical";
  std::string scorer = "token-f1";
  // A base address switches that role to the remote wire protocol. Unset
  // keys fall back to DISCORDQ_QG_URL / DISCORDQ_QA_URL /
  // DISCORDQ_SCORER_URL.
  std::optional<std::string> qg_url;
  std::optional<std::string> qa_url;
  std::optional<std::string> scorer_url;
  int timeout_ms = 5000;
  int retries = 2;
  int backoff_ms = 100;
  std::size_t max_context_bytes = 4000;
  std::size_t qa_min_overlap = 2;
};

struct RunConfig {
  CategoryConfig categories;
  ConsolidationOptions consolidation;
  std::size_t candidates_per_start_word = 5;
  std::vector<StartWord> start_words{kAllStartWords.begin(), kAllStartWords.end()};
  std::size_t max_selected = 8;
  int distractor_cutoff_days = 90;
  double dedup_similarity = 0.9;
  std::size_t qa_workers = 4;
  // analyzed_at stamp; unset means the story's latest article time, which
  // keeps reruns byte-identical.
  std::optional<Timestamp> analyzed_at;
  ProviderConfig providers;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& c);

struct Providers {
  std::shared_ptr<QuestionGenerator> qg;
  std::shared_ptr<AnswerExtractor> qa;
  std::shared_ptr<PairScorer> scorer;
  // Set when qg serves bundle questions; stories must be registered.
  std::shared_ptr<FixtureQuestionGenerator> fixture;

  void register_story(const Story& story) const {
    if (fixture) fixture->add_story(story);
  }
};

/// Builds reference or remote providers. Throws InputError for unknown
/// provider names.
Providers make_providers(const ProviderConfig& config);

}  // namespace discordq
