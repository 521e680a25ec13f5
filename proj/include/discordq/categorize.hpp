#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace discordq {

// Cutoffs are config-exposed; the defaults are the published operating
// point.
struct CategoryConfig {
  double coverage_min = 0.30;
  double consensus_share = 0.70;
  double spec_min = 2.0;
  double epsilon = 0.001;
  std::size_t distractor_count = 10;

  /// Throws InputError when an invariant is violated.
  void validate() const;
  bool operator==(const CategoryConfig&) const = default;
};

struct QuestionStats {
  std::size_t n_sources = 0;
  std::size_t answering_sources = 0;
  std::size_t n_answers = 0;
  std::size_t largest_group_size = 0;
  std::size_t n_distractor_answers = 0;

  bool operator==(const QuestionStats&) const = default;
};

enum class Category { Peripheral, Consensus, Vague, Discord };

std::string_view to_string(Category c);
/// Accepts "factoid" as an alias of consensus.
Category parse_category(std::string_view s);

struct CategoryLabel {
  Category label = Category::Peripheral;
  std::vector<std::string> reasons;  // ids of the rules that decided

  bool operator==(const CategoryLabel&) const = default;
};

// The three quantities the rules look at.
struct QuestionMeasures {
  double coverage = 0.0;
  double largest_share = 0.0;
  double specificity = 0.0;
  bool has_answers = false;
};

/// answering_sources / n_sources. Throws InputError when n_sources is 0.
double coverage_ratio(const QuestionStats& stats);

/// n_answers / (n_distractor_answers + epsilon).
double specificity(std::size_t n_answers, std::size_t n_distractor_answers, double epsilon);

QuestionMeasures measure(const QuestionStats& stats, const CategoryConfig& config);

/// Rules in order: peripheral (no answers, or coverage < coverage_min),
/// consensus (largest share >= consensus_share), vague (specificity <=
/// spec_min), otherwise discord.
CategoryLabel classify(const QuestionMeasures& m, const CategoryConfig& config);

/// Throws InputError on inconsistent stats.
CategoryLabel categorize_question(const QuestionStats& stats, const CategoryConfig& config);

nlohmann::json category_config_to_json(const CategoryConfig& c);
CategoryConfig category_config_from_json(const nlohmann::json& j);

}  // namespace discordq
