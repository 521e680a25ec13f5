#include "discordq/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "discordq/errors.hpp"

namespace discordq {

using nlohmann::json;

json metric_report_to_json(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"balanced_accuracy", opt(r.balanced_accuracy)},
          {"pearson", opt(r.pearson)},
          {"ari", opt(r.ari)},
          {"n", r.n},
          {"threshold_used", opt(r.threshold_used)}};
}

std::vector<LabeledPair> pairs_from_grouping(const Grouping& g) {
  auto assignment = g.assignment();  // sorted by id
  std::vector<std::pair<std::string, std::size_t>> items(assignment.begin(), assignment.end());
  std::vector<LabeledPair> out;
  out.reserve(items.size() * (items.size() - (items.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      out.push_back({g.question_id, items[i].first, items[j].first,
                     items[i].second == items[j].second, std::nullopt});
  return out;
}

double balanced_accuracy(const Confusion& c) {
  std::size_t pos = c.tp + c.fn, neg = c.tn + c.fp;
  if (pos == 0 || neg == 0) throw OneClassOnly("balanced accuracy needs both gold classes");
  return 0.5 * (static_cast<double>(c.tp) / static_cast<double>(pos) +
                static_cast<double>(c.tn) / static_cast<double>(neg));
}

double balanced_accuracy(std::span<const LabeledPair> pairs, double threshold, bool ties_positive) {
  Confusion c;
  for (const auto& p : pairs) {
    if (!p.score) throw InputError("pair (" + p.answer_a + ", " + p.answer_b + ") has no score");
    bool predicted = ties_positive ? *p.score >= threshold : *p.score > threshold;
    if (p.gold)
      (predicted ? c.tp : c.fn) += 1;
    else
      (predicted ? c.fp : c.tn) += 1;
  }
  return balanced_accuracy(c);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw InputError("pearson needs at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double adjusted_rand_index(const Grouping& a, const Grouping& b) {
  auto la = a.assignment();
  auto lb = b.assignment();
  if (la.size() != a.answer_count() || lb.size() != b.answer_count())
    throw ValidationError("grouping repeats an answer id");
  if (la.size() != lb.size())
    throw MismatchedAnswerSets("ARI requires groupings over the same answers");
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (auto ia = la.begin(), ib = lb.begin(); ia != la.end(); ++ia, ++ib) {
    if (ia->first != ib->first)
      throw MismatchedAnswerSets("ARI requires groupings over the same answers");
    table[{ia->second, ib->second}] += 1;
    rows[ia->second] += 1;
    cols[ib->second] += 1;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0, sum_rows = 0, sum_cols = 0;
  for (const auto& [_, v] : table) index += choose2(v);
  for (const auto& [_, v] : rows) sum_rows += choose2(v);
  for (const auto& [_, v] : cols) sum_cols += choose2(v);
  double total = choose2(static_cast<double>(la.size()));
  if (total == 0.0) return 1.0;
  double expected = sum_rows * sum_cols / total;
  double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

AgreementReport agreement_leave_one_out(const std::string& question_id,
                                        std::span<const Annotation> annotations) {
  if (annotations.size() < 3)
    throw InputError("leave-one-out agreement needs at least three annotators");
  AgreementReport report;
  report.question_id = question_id;
  double sum = 0.0;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    std::vector<Annotation> others;
    for (std::size_t k = 0; k < annotations.size(); ++k)
      if (k != i) others.push_back(annotations[k]);
    auto global = aggregate_annotations(question_id, others);
    double ari = adjusted_rand_index(annotation_to_grouping(question_id, annotations[i]), global);
    report.per_annotator.emplace_back(annotations[i].annotator, ari);
    sum += ari;
  }
  report.mean = sum / static_cast<double>(annotations.size());
  return report;
}

DiscordScorecard discord_rate_report(std::span<const CategorizedQuestion> questions,
                                     std::span<const StartWord> columns) {
  DiscordScorecard card;
  card.columns.assign(columns.begin(), columns.end());

  std::set<std::string> stories, systems;
  std::map<std::string, std::set<std::string>> stories_by_system;
  std::map<std::tuple<std::string, std::string, StartWord>, std::size_t> per_cell;
  for (const auto& q : questions) {
    stories.insert(q.story_id);
    systems.insert(q.system);
    stories_by_system[q.system].insert(q.story_id);
    ++per_cell[{q.system, q.story_id, q.start_word}];
  }

  for (const auto& system : systems) {
    ScorecardRow row;
    row.system = system;
    row.n_stories = stories_by_system[system].size();
    for (auto sw : columns) row.cells[sw];
    for (const auto& q : questions) {
      if (q.system != system) continue;
      auto it = row.cells.find(q.start_word);
      if (it == row.cells.end()) continue;
      ++it->second.counts[q.label];
      ++it->second.n_questions;
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (auto sw : columns) {
      auto& cell = row.cells[sw];
      for (auto c : {Category::Peripheral, Category::Consensus, Category::Vague, Category::Discord})
        cell.counts.try_emplace(c, 0);
      if (cell.n_questions == 0) continue;
      cell.percent_discord = 100.0 * static_cast<double>(cell.counts[Category::Discord]) /
                             static_cast<double>(cell.n_questions);
      sum += cell.percent_discord;
      ++present;
    }
    row.average = present ? sum / static_cast<double>(present) : 0.0;
    card.rows.push_back(std::move(row));

    for (const auto& story : stories)
      for (auto sw : columns)
        if (!per_cell.contains({system, story, sw})) card.missing.push_back({system, story, sw});
  }
  return card;
}

std::string render_scorecard(const DiscordScorecard& card) {
  std::size_t name_width = 6;
  for (const auto& r : card.rows) name_width = std::max(name_width, r.system.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << "System";
  for (auto sw : card.columns) out << "  " << std::right << std::setw(6) << to_string(sw);
  out << "  " << std::setw(6) << "Avg." << "  " << std::setw(7) << "Stories" << "\n";
  out << std::fixed << std::setprecision(1);
  for (const auto& r : card.rows) {
    out << std::left << std::setw(static_cast<int>(name_width)) << r.system << std::right;
    for (auto sw : card.columns) {
      const auto& cell = r.cells.at(sw);
      out << "  " << std::setw(6);
      if (cell.n_questions == 0)
        out << "-";
      else
        out << cell.percent_discord;
    }
    out << "  " << std::setw(6) << r.average << "  " << std::setw(7) << r.n_stories << "\n";
  }
  if (!card.missing.empty()) out << card.missing.size() << " missing cell(s) excluded\n";
  return out.str();
}

json scorecard_to_json(const DiscordScorecard& card) {
  json rows = json::array();
  for (const auto& r : card.rows) {
    json cells = json::object();
    for (const auto& [sw, cell] : r.cells) {
      json counts = json::object();
      for (const auto& [c, n] : cell.counts) counts[std::string(to_string(c))] = n;
      cells[std::string(to_string(sw))] = {{"percent_discord", cell.percent_discord},
                                           {"n_questions", cell.n_questions},
                                           {"counts", counts}};
    }
    rows.push_back({{"system", r.system},
                    {"cells", cells},
                    {"average", r.average},
                    {"n_stories", r.n_stories}});
  }
  json missing = json::array();
  for (const auto& m : card.missing)
    missing.push_back(
        {{"system", m.system}, {"story_id", m.story_id}, {"start_word", to_string(m.start_word)}});
  json columns = json::array();
  for (auto sw : card.columns) columns.push_back(to_string(sw));
  return {{"columns", columns}, {"rows", rows}, {"missing", missing}};
}

std::vector<NancoQuestion> nanco_from_json(const json& j) {
  std::vector<NancoQuestion> out;
  try {
    for (const auto& qj : j.at("questions")) {
      NancoQuestion q;
      q.id = qj.at("id").get<std::string>();
      q.text = qj.value("text", "");
      q.split = qj.value("split", "");
      for (const auto& aj : qj.at("answers"))
        q.answers.push_back({aj.at("id").get<std::string>(), aj.value("text", "")});
      std::set<std::string> answer_ids;
      for (const auto& a : q.answers)
        if (!answer_ids.insert(a.id).second)
          throw ValidationError("duplicate answer id '" + a.id + "' in " + q.id);
      for (const auto& anj : qj.at("annotations")) {
        Annotation a;
        a.annotator = anj.value("annotator", "annotator-" + std::to_string(q.annotations.size() + 1));
        for (const auto& [id, label] : anj.at("labels").items()) a.labels[id] = label.get<int>();
        std::set<std::string> labelled;
        for (const auto& [id, _] : a.labels) labelled.insert(id);
        if (labelled != answer_ids)
          throw MismatchedAnswerSets("annotator '" + a.annotator + "' on " + q.id +
                                     " does not label exactly the answer list");
        q.annotations.push_back(std::move(a));
      }
      out.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("annotation file: ") + e.what());
  }
  return out;
}

ScoredPairFile scored_pairs_from_json(const json& j) {
  ScoredPairFile out;
  try {
    out.scale = parse_scale(j.value("scale", "unit"));
    for (const auto& pj : j.at("pairs")) {
      ScoredPairRow row;
      row.pair.question_id = pj.value("question_id", "");
      row.pair.answer_a = pj.at("answer_a").get<std::string>();
      row.pair.answer_b = pj.at("answer_b").get<std::string>();
      if (row.pair.answer_a == row.pair.answer_b)
        throw ValidationError("pair compares an answer with itself");
      if (row.pair.answer_b < row.pair.answer_a) std::swap(row.pair.answer_a, row.pair.answer_b);
      row.pair.score = to_unit(pj.at("score").get<double>(), out.scale);
      if (pj.contains("gold") && !pj["gold"].is_null()) {
        row.has_gold = true;
        const auto& g = pj["gold"];
        row.pair.gold = g.is_boolean() ? g.get<bool>() : g.get<int>() != 0;
      }
      if (pj.contains("target") && pj["target"].is_number()) row.target = pj["target"].get<double>();
      out.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("pair-scores file: ") + e.what());
  }
  return out;
}

}  // namespace discordq
