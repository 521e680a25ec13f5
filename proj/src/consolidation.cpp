#include "discordq/consolidation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "discordq/errors.hpp"
#include "discordq/text.hpp"

namespace discordq {

using nlohmann::json;

SimilarityMatrix::SimilarityMatrix(std::string question_id, std::vector<std::string> answer_ids)
    : question_id_(std::move(question_id)),
      ids_(std::move(answer_ids)),
      scores_(ids_.size() * ids_.size(), 0.0) {
  for (std::size_t i = 0; i < ids_.size(); ++i) scores_[i * ids_.size() + i] = 1.0;
}

void SimilarityMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InputError("similarity outside [0, 1]");
  scores_[i * ids_.size() + j] = value;
  scores_[j * ids_.size() + i] = value;
}

std::optional<std::size_t> SimilarityMatrix::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

std::string_view to_string(GroupingMethod m) {
  switch (m) {
    case GroupingMethod::Louvain: return "louvain";
    case GroupingMethod::Annotated: return "annotated";
    case GroupingMethod::Aggregated: return "aggregated";
  }
  return "louvain";
}

GroupingMethod parse_grouping_method(std::string_view s) {
  if (s == "louvain") return GroupingMethod::Louvain;
  if (s == "annotated") return GroupingMethod::Annotated;
  if (s == "aggregated") return GroupingMethod::Aggregated;
  throw ParseError("unknown grouping method '" + std::string(s) + "'");
}

std::size_t Grouping::answer_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.member_ids.size();
  return n;
}

std::size_t Grouping::largest_group_size() const {
  std::size_t best = 0;
  for (const auto& g : groups) best = std::max(best, g.member_ids.size());
  return best;
}

std::map<std::string, std::size_t> Grouping::assignment() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (const auto& id : groups[i].member_ids) out[id] = i;
  return out;
}

Grouping make_grouping(std::string question_id, std::vector<std::vector<std::string>> groups,
                       GroupingMethod method) {
  Grouping out;
  out.question_id = std::move(question_id);
  out.method = method;
  std::set<std::string> seen;
  for (auto& members : groups) {
    if (members.empty()) continue;
    std::sort(members.begin(), members.end());
    for (const auto& id : members)
      if (!seen.insert(id).second) throw ValidationError("answer '" + id + "' in two groups");
    AnswerGroup g;
    g.representative_id = members.front();
    g.member_ids = std::move(members);
    out.groups.push_back(std::move(g));
  }
  std::sort(out.groups.begin(), out.groups.end(), [](const AnswerGroup& a, const AnswerGroup& b) {
    if (a.member_ids.size() != b.member_ids.size()) return a.member_ids.size() > b.member_ids.size();
    return a.member_ids.front() < b.member_ids.front();
  });
  return out;
}

MatrixBuild build_similarity_matrix(std::string_view question, std::span<const Answer> answers,
                                    PairScorer& scorer, std::size_t workers) {
  if (answers.empty()) throw InputError("similarity matrix needs at least one answer");
  std::vector<std::string> ids;
  for (const auto& a : answers) ids.push_back(a.id);
  MatrixBuild out{SimilarityMatrix(answers.front().question_id, ids), {}};

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < answers.size(); ++i)
    for (std::size_t j = i + 1; j < answers.size(); ++j) pairs.emplace_back(i, j);
  std::vector<double> values(pairs.size(), 0.0);
  std::vector<std::optional<std::string>> failures(pairs.size());

  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < pairs.size(); k += stride) {
      auto [i, j] = pairs[k];
      try {
        auto forward = scorer.score(question, answers[i].text, answers[j].text);
        auto backward = scorer.score(question, answers[j].text, answers[i].text);
        values[k] = 0.5 * (to_unit(forward.score, forward.scale) +
                           to_unit(backward.score, backward.scale));
      } catch (const ProviderUnavailable& e) {
        failures[k] = "scoring failed for (" + answers[i].id + ", " + answers[j].id +
                      "); imputed 0: " + e.what();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, pairs.size()));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.matrix.set(pairs[k].first, pairs[k].second, values[k]);
    if (failures[k]) {
      spdlog::warn("{}", *failures[k]);
      out.warnings.push_back(*failures[k]);
    }
  }
  return out;
}

Grouping louvain_cluster(const SimilarityMatrix& m, double tau, const ConsolidationOptions& opts) {
  const std::size_t n = m.size();
  WeightedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m.at(i, j) >= tau) g.add_edge(i, j, opts.weighted ? m.at(i, j) : 1.0);
  LouvainOptions lo;
  lo.resolution = opts.resolution;
  auto labels = louvain(g, lo);
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    if (c >= groups.size()) groups.resize(c + 1);
    groups[c].push_back(m.answer_ids()[i]);
  }
  return make_grouping(m.question_id(), std::move(groups), GroupingMethod::Louvain);
}

std::string select_representative(const AnswerGroup& group, const SimilarityMatrix& m,
                                  const std::map<std::string, std::string>& texts) {
  if (group.member_ids.empty()) throw InputError("empty answer group");
  if (group.member_ids.size() == 1) return group.member_ids.front();
  std::vector<std::size_t> idx;
  for (const auto& id : group.member_ids) {
    auto i = m.index_of(id);
    if (!i) throw InputError("group member '" + id + "' missing from matrix");
    idx.push_back(*i);
  }
  auto length = [&](const std::string& id) {
    auto it = texts.find(id);
    return it == texts.end() ? std::size_t{0} : text::codepoint_length(it->second);
  };
  std::string best;
  double best_mean = -1.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < idx.size(); ++b)
      if (a != b) sum += m.at(idx[a], idx[b]);
    double mean = sum / static_cast<double>(idx.size() - 1);
    const auto& id = group.member_ids[a];
    bool better = false;
    if (best.empty() || mean > best_mean + 1e-12) {
      better = true;
    } else if (std::abs(mean - best_mean) <= 1e-12) {
      auto la = length(id), lb = length(best);
      better = la > lb || (la == lb && id < best);
    }
    if (better) {
      best = id;
      best_mean = mean;
    }
  }
  return best;
}

Consolidation consolidate(std::string_view question_id, std::string_view question,
                          std::span<const Answer> answers, PairScorer& scorer,
                          const ConsolidationOptions& opts) {
  Consolidation out;
  out.grouping.question_id = std::string(question_id);
  out.grouping.method = GroupingMethod::Louvain;
  if (answers.empty()) return out;

  std::vector<Answer> sorted(answers.begin(), answers.end());
  std::sort(sorted.begin(), sorted.end(), [](const Answer& a, const Answer& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].id == sorted[i - 1].id)
      throw ValidationError("duplicate answer id '" + sorted[i].id + "'");
  for (auto& a : sorted) a.question_id = std::string(question_id);

  auto built = build_similarity_matrix(question, sorted, scorer, opts.workers);
  out.matrix = std::move(built.matrix);
  out.warnings = std::move(built.warnings);
  out.grouping = louvain_cluster(out.matrix, opts.tau, opts);
  std::map<std::string, std::string> texts;
  for (const auto& a : sorted) texts[a.id] = a.text;
  for (auto& g : out.grouping.groups) g.representative_id = select_representative(g, out.matrix, texts);
  return out;
}

Threshold select_threshold(std::span<const ScoredLabel> pairs, std::string tuned_on) {
  long long positives = 0, negatives = 0;
  for (const auto& p : pairs) (p.gold ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0)
    throw OneClassOnly("threshold selection needs both classes");

  std::vector<ScoredLabel> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });

  Threshold out;
  out.tuned_on = std::move(tuned_on);
  if (sorted.front().score == sorted.back().score) {
    out.tau = sorted.front().score;
    out.achieved_balanced_accuracy = 0.5;
    return out;
  }
  // Sweep upward: below the cut everything is predicted negative.
  long long neg_below = 0, pos_below = 0;
  long long best_key = -1;
  std::size_t i = 0;
  while (i < sorted.size()) {
    double value = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == value) {
      (sorted[i].gold ? pos_below : neg_below) += 1;
      ++i;
    }
    if (i == sorted.size()) break;
    double tau = 0.5 * (value + sorted[i].score);
    long long tp = positives - pos_below;
    long long tn = neg_below;
    // BA * 2PN as an exact integer.
    long long key = tp * negatives + tn * positives;
    if (key > best_key) {
      best_key = key;
      out.tau = tau;
      out.achieved_balanced_accuracy =
          0.5 * (static_cast<double>(tp) / static_cast<double>(positives) +
                 static_cast<double>(tn) / static_cast<double>(negatives));
    }
  }
  return out;
}

namespace {

std::vector<std::string> check_answer_sets(std::span<const Annotation> annotations) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : annotations.front().labels) ids.push_back(id);
  for (const auto& a : annotations) {
    if (a.labels.size() != ids.size())
      throw MismatchedAnswerSets("annotator '" + a.annotator + "' labels a different answer set");
    std::size_t k = 0;
    for (const auto& [id, _] : a.labels)
      if (id != ids[k++])
        throw MismatchedAnswerSets("annotator '" + a.annotator + "' labels a different answer set");
  }
  return ids;
}

}  // namespace

Grouping aggregate_annotations(std::string question_id, std::span<const Annotation> annotations,
                               double resolution) {
  if (annotations.size() < 2) throw InputError("aggregation needs at least two annotators");
  auto ids = check_answer_sets(annotations);
  const std::size_t n = ids.size();

  WeightedGraph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      int raters = 0, together = 0;
      for (const auto& a : annotations) {
        int li = a.labels.at(ids[i]);
        int lj = a.labels.at(ids[j]);
        if (li == kInvalidAnswer || lj == kInvalidAnswer) continue;
        ++raters;
        if (li == lj) ++together;
      }
      if (raters > 0 && 2 * together > raters) g.add_edge(i, j, 1.0);
    }
  }
  LouvainOptions lo;
  lo.resolution = resolution;
  auto labels = louvain(g, lo);
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    if (c >= groups.size()) groups.resize(c + 1);
    groups[c].push_back(ids[i]);
  }
  return make_grouping(std::move(question_id), std::move(groups), GroupingMethod::Aggregated);
}

Grouping annotation_to_grouping(std::string question_id, const Annotation& a) {
  std::map<int, std::vector<std::string>> by_label;
  std::vector<std::vector<std::string>> groups;
  for (const auto& [id, label] : a.labels) {
    if (label == kInvalidAnswer)
      groups.push_back({id});
    else
      by_label[label].push_back(id);
  }
  for (auto& [_, members] : by_label) groups.push_back(std::move(members));
  return make_grouping(std::move(question_id), std::move(groups), GroupingMethod::Annotated);
}

json grouping_to_json(const Grouping& g) {
  json groups = json::array();
  for (const auto& grp : g.groups) {
    json j = {{"members", grp.member_ids}, {"representative", grp.representative_id}};
    if (grp.label) j["label"] = *grp.label;
    groups.push_back(std::move(j));
  }
  return {{"question_id", g.question_id}, {"method", to_string(g.method)}, {"groups", groups}};
}

Grouping grouping_from_json(const json& j) {
  Grouping g;
  g.question_id = j.at("question_id").get<std::string>();
  g.method = parse_grouping_method(j.at("method").get<std::string>());
  std::set<std::string> seen;
  for (const auto& gj : j.at("groups")) {
    AnswerGroup grp;
    grp.member_ids = gj.at("members").get<std::vector<std::string>>();
    grp.representative_id = gj.at("representative").get<std::string>();
    if (gj.contains("label")) grp.label = gj["label"].get<std::string>();
    if (grp.member_ids.empty()) throw ValidationError("empty group in grouping");
    if (std::find(grp.member_ids.begin(), grp.member_ids.end(), grp.representative_id) ==
        grp.member_ids.end())
      throw ValidationError("representative is not a group member");
    for (const auto& id : grp.member_ids)
      if (!seen.insert(id).second) throw ValidationError("answer '" + id + "' in two groups");
    g.groups.push_back(std::move(grp));
  }
  return g;
}

}  // namespace discordq
