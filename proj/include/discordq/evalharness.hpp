#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/categorize.hpp"
#include "discordq/consolidation.hpp"
#include "discordq/start_word.hpp"

namespace discordq {

// Unordered answer pair; answer_a < answer_b.
struct LabeledPair {
  std::string question_id;
  std::string answer_a;
  std::string answer_b;
  bool gold = false;
  std::optional<double> score;

  bool operator==(const LabeledPair&) const = default;
};

struct MetricReport {
  std::optional<double> balanced_accuracy;
  std::optional<double> pearson;
  std::optional<double> ari;
  std::size_t n = 0;
  std::optional<double> threshold_used;
};

nlohmann::json metric_report_to_json(const MetricReport& r);

/// All n(n-1)/2 pairs of the grouping's answers; gold = same group.
std::vector<LabeledPair> pairs_from_grouping(const Grouping& g);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// (TPR + TNR) / 2. Throws OneClassOnly unless both gold classes occur.
double balanced_accuracy(const Confusion& c);

/// Prediction is score >= threshold (or score > threshold when
/// `ties_positive` is false). Every pair needs a score (InputError).
double balanced_accuracy(std::span<const LabeledPair> pairs, double threshold,
                         bool ties_positive = true);

/// Product-moment correlation. Throws InputError (size mismatch or n < 2),
/// ZeroVariance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Contingency-table ARI. Two identical partitions score 1 even in the
/// degenerate all-singletons / single-cluster cases. Throws
/// MismatchedAnswerSets.
double adjusted_rand_index(const Grouping& a, const Grouping& b);

struct AgreementReport {
  std::string question_id;
  std::vector<std::pair<std::string, double>> per_annotator;  // annotator, ARI
  double mean = 0.0;
};

/// Each annotator against the aggregate of the others. Needs >= 3
/// annotators (InputError).
AgreementReport agreement_leave_one_out(const std::string& question_id,
                                        std::span<const Annotation> annotations);

// ---- discord-rate scorecard -------------------------------------------------

struct CategorizedQuestion {
  std::string system;
  std::string story_id;
  StartWord start_word = StartWord::What;
  Category label = Category::Peripheral;
};

struct ScorecardCell {
  double percent_discord = 0.0;
  std::map<Category, std::size_t> counts;
  std::size_t n_questions = 0;
};

struct ScorecardRow {
  std::string system;
  std::map<StartWord, ScorecardCell> cells;
  double average = 0.0;  // unweighted mean over start-word columns
  std::size_t n_stories = 0;
};

struct MissingCell {
  std::string system;
  std::string story_id;
  StartWord start_word = StartWord::What;
};

struct DiscordScorecard {
  std::vector<StartWord> columns;
  std::vector<ScorecardRow> rows;  // sorted by system name
  std::vector<MissingCell> missing;
};

/// Table column order: How, Why, What, Who.
inline constexpr std::array<StartWord, 4> kScorecardColumns = {
    StartWord::How, StartWord::Why, StartWord::What, StartWord::Who};

/// Percent of discord labels per (system, start word) and the macro
/// average across start-word columns. A (system, story, start word)
/// combination without questions is reported in `missing`.
DiscordScorecard discord_rate_report(std::span<const CategorizedQuestion> questions,
                                     std::span<const StartWord> columns = kScorecardColumns);

/// Aligned text table, one decimal place.
std::string render_scorecard(const DiscordScorecard& card);
nlohmann::json scorecard_to_json(const DiscordScorecard& card);

// ---- evaluation files -------------------------------------------------------

struct NancoAnswer {
  std::string id;
  std::string text;
};

struct NancoQuestion {
  std::string id;
  std::string text;
  std::string split;
  std::vector<NancoAnswer> answers;
  std::vector<Annotation> annotations;
};

/// {"questions": [{"id", "text", "split"?, "answers": [{"id", "text"}],
///   "annotations": [{"annotator", "labels": {answer_id: int}}]}]}
std::vector<NancoQuestion> nanco_from_json(const nlohmann::json& j);

struct ScoredPairRow {
  LabeledPair pair;  // score always set, unit scale
  bool has_gold = false;
  std::optional<double> target;  // graded similarity, for correlation
};

struct ScoredPairFile {
  Scale scale = Scale::Unit;
  std::vector<ScoredPairRow> rows;
};

/// {"scale"?, "pairs": [{"question_id", "answer_a", "answer_b", "score",
///   "gold"?, "target"?}]}. Scores are mapped to unit scale on load.
ScoredPairFile scored_pairs_from_json(const nlohmann::json& j);

}  // namespace discordq
