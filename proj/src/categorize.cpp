#include "discordq/categorize.hpp"

#include "discordq/errors.hpp"

namespace discordq {

void CategoryConfig::validate() const {
  if (!(coverage_min > 0.0 && coverage_min < 1.0))
    throw InputError("coverage_min must lie in (0, 1)");
  if (!(consensus_share > 0.0 && consensus_share <= 1.0))
    throw InputError("consensus_share must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Peripheral: return "peripheral";
    case Category::Consensus: return "consensus";
    case Category::Vague: return "vague";
    case Category::Discord: return "discord";
  }
  return "peripheral";
}

Category parse_category(std::string_view s) {
  if (s == "peripheral") return Category::Peripheral;
  if (s == "consensus" || s == "factoid") return Category::Consensus;
  if (s == "vague") return Category::Vague;
  if (s == "discord") return Category::Discord;
  throw ParseError("unknown category '" + std::string(s) + "'");
}

double coverage_ratio(const QuestionStats& s) {
  if (s.n_sources == 0) throw InputError("coverage needs at least one source");
  return static_cast<double>(s.answering_sources) / static_cast<double>(s.n_sources);
}

double specificity(std::size_t n_answers, std::size_t n_distractor_answers, double epsilon) {
  return static_cast<double>(n_answers) / (static_cast<double>(n_distractor_answers) + epsilon);
}

QuestionMeasures measure(const QuestionStats& s, const CategoryConfig& config) {
  if (s.answering_sources > s.n_sources)
    throw InputError("more answering sources than sources");
  if (s.largest_group_size > s.n_answers) throw InputError("largest group exceeds answer count");
  QuestionMeasures m;
  m.has_answers = s.n_answers > 0;
  m.coverage = coverage_ratio(s);
  m.largest_share = m.has_answers ? static_cast<double>(s.largest_group_size) /
                                        static_cast<double>(s.n_answers)
                                  : 0.0;
  m.specificity = specificity(s.n_answers, s.n_distractor_answers, config.epsilon);
  return m;
}

CategoryLabel classify(const QuestionMeasures& m, const CategoryConfig& c) {
  if (!m.has_answers) return {Category::Peripheral, {"no_answers"}};
  if (m.coverage < c.coverage_min) return {Category::Peripheral, {"low_coverage"}};
  if (m.largest_share >= c.consensus_share) return {Category::Consensus, {"dominant_group"}};
  if (m.specificity <= c.spec_min) return {Category::Vague, {"low_specificity"}};
  return {Category::Discord, {"coverage_ok", "diverse_groups", "specific"}};
}

CategoryLabel categorize_question(const QuestionStats& stats, const CategoryConfig& config) {
  return classify(measure(stats, config), config);
}

nlohmann::json category_config_to_json(const CategoryConfig& c) {
  return {{"coverage_min", c.coverage_min},
          {"consensus_share", c.consensus_share},
          {"spec_min", c.spec_min},
          {"epsilon", c.epsilon},
          {"distractor_count", c.distractor_count}};
}

CategoryConfig category_config_from_json(const nlohmann::json& j) {
  CategoryConfig c;
  c.coverage_min = j.value("coverage_min", c.coverage_min);
  c.consensus_share = j.value("consensus_share", c.consensus_share);
  c.spec_min = j.value("spec_min", c.spec_min);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.distractor_count = j.value("distractor_count", c.distractor_count);
  c.validate();
  return c;
}

}  // namespace discordq
