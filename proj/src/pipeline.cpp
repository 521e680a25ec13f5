#include "discordq/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <set>

#include "digest.hpp"
#include "discordq/errors.hpp"
#include "discordq/text.hpp"
#include "parallel.hpp"

namespace discordq {

using nlohmann::json;

const QuestionAnalysis* StoryAnalysis::find_question(std::string_view id) const {
  for (const auto& q : questions)
    if (q.question.id == id) return &q;
  return nullptr;
}

std::string config_fingerprint(const RunConfig& c, const Providers& p) {
  json sw = json::array();
  for (auto w : c.start_words) sw.push_back(to_string(w));
  json basis = {{"categories", category_config_to_json(c.categories)},
                {"tau", c.consolidation.tau},
                {"resolution", c.consolidation.resolution},
                {"weighted", c.consolidation.weighted},
                {"candidates_per_start_word", c.candidates_per_start_word},
                {"start_words", sw},
                {"max_selected", c.max_selected},
                {"distractor_cutoff_days", c.distractor_cutoff_days},
                {"dedup_similarity", c.dedup_similarity},
                {"qg", p.qg ? p.qg->id() : ""},
                {"qa", p.qa ? p.qa->id() : ""},
                {"scorer", p.scorer ? p.scorer->id() : ""}};
  return detail::sha256_hex(basis.dump()).substr(0, 16);
}

std::vector<Answer> reduce_per_source(std::span<const Answer> answers,
                                      std::span<const std::string> article_order) {
  auto rank = [&](const std::string& article_id) {
    auto it = std::find(article_order.begin(), article_order.end(), article_id);
    return static_cast<std::size_t>(it - article_order.begin());
  };
  std::map<std::string, const Answer*> best;
  for (const auto& a : answers) {
    auto [it, inserted] = best.try_emplace(a.source_id, &a);
    if (inserted) continue;
    const Answer& cur = *it->second;
    bool better = false;
    if (a.confidence != cur.confidence) {
      better = a.confidence > cur.confidence;
    } else if (rank(a.article_id) != rank(cur.article_id)) {
      better = rank(a.article_id) < rank(cur.article_id);
    } else {
      better = a.char_start < cur.char_start;
    }
    if (better) it->second = &a;
  }
  std::vector<Answer> out;
  for (const auto& [_, a] : best) out.push_back(*a);
  return out;
}

std::vector<CandidateQuestion> dedup_questions(std::span<const CandidateQuestion> candidates,
                                               double near_duplicate) {
  std::vector<CandidateQuestion> out;
  std::set<std::string> folded;
  for (const auto& c : candidates) {
    auto key = text::fold(c.text);
    if (folded.contains(key)) continue;
    bool near = std::any_of(out.begin(), out.end(), [&](const CandidateQuestion& kept) {
      return text::token_f1(kept.text, c.text) >= near_duplicate;
    });
    if (near) continue;
    folded.insert(key);
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> select_questions(std::span<const QuestionAnalysis> questions,
                                          std::size_t limit) {
  std::vector<const QuestionAnalysis*> discord;
  for (const auto& q : questions)
    if (q.label.label == Category::Discord) discord.push_back(&q);
  std::sort(discord.begin(), discord.end(), [](const QuestionAnalysis* a, const QuestionAnalysis* b) {
    if (a->stats.answering_sources != b->stats.answering_sources)
      return a->stats.answering_sources > b->stats.answering_sources;
    return a->question.id < b->question.id;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < discord.size() && i < limit; ++i) out.push_back(discord[i]->question.id);
  return out;
}

QuestionStats question_stats(const Story& story, std::span<const Answer> answers,
                             const Grouping& grouping, std::size_t n_distractor_answers) {
  QuestionStats s;
  s.n_sources = story.sources.size();
  std::set<std::string> sources;
  for (const auto& a : answers) sources.insert(a.source_id);
  s.answering_sources = sources.size();
  s.n_answers = answers.size();
  s.largest_group_size = grouping.largest_group_size();
  s.n_distractor_answers = n_distractor_answers;
  return s;
}

namespace {

struct ExtractionOutcome {
  std::optional<Extraction> result;
  std::optional<std::string> failure;
};

QuestionAnalysis analyze_question(const Story& story, const DistractorSet& distractors,
                                  const CandidateQuestion& q, const Providers& providers,
                                  const RunConfig& config, bool& provider_failed) {
  QuestionAnalysis qa;
  qa.question = q;
  qa.grouping.question_id = q.id;

  std::vector<const Article*> targets;
  for (const auto& a : story.articles) targets.push_back(&a);
  for (const auto& a : distractors.articles) targets.push_back(&a);

  auto outcomes = detail::parallel_map<ExtractionOutcome>(
      targets.size(), config.qa_workers, [&](std::size_t i) -> ExtractionOutcome {
        try {
          return {extract_answer(*providers.qa, q, *targets[i]), std::nullopt};
        } catch (const ProviderUnavailable& e) {
          return {std::nullopt, std::string(e.what())};
        }
      });

  std::vector<Answer> raw;
  std::size_t distractor_answers = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.failure) {
      provider_failed = true;
      qa.warnings.push_back("answer extraction unavailable: " + *o.failure);
      continue;
    }
    bool is_distractor = i >= story.articles.size();
    if (auto* a = std::get_if<Answer>(&*o.result)) {
      if (is_distractor)
        ++distractor_answers;
      else
        raw.push_back(std::move(*a));
    } else if (!is_distractor) {
      auto& n = std::get<NoAnswer>(*o.result);
      if (n.warning) qa.warnings.push_back(*n.warning);
      qa.no_answers.push_back(std::move(n));
    }
  }

  if (provider_failed) {
    // Degrade: no answers, which categorizes as peripheral.
    qa.answers.clear();
    qa.no_answers.clear();
    qa.stats = question_stats(story, qa.answers, qa.grouping, 0);
    qa.label = categorize_question(qa.stats, config.categories);
    return qa;
  }

  std::vector<std::string> order;
  for (const auto& a : story.articles) order.push_back(a.id);
  qa.answers = reduce_per_source(raw, order);

  auto cons = consolidate(q.id, q.text, qa.answers, *providers.scorer, config.consolidation);
  qa.grouping = std::move(cons.grouping);
  for (auto& w : cons.warnings) qa.warnings.push_back(std::move(w));
  qa.stats = question_stats(story, qa.answers, qa.grouping, distractor_answers);
  qa.label = categorize_question(qa.stats, config.categories);
  return qa;
}

}  // namespace

StoryAnalysis analyze_story(const Story& story, const Providers& providers, const RunConfig& config) {
  if (!providers.qg || !providers.qa || !providers.scorer)
    throw InputError("analysis needs all three providers");
  config.categories.validate();

  StoryAnalysis out;
  out.story_id = story.id;
  out.title = story.title;
  out.config_fingerprint = config_fingerprint(config, providers);
  out.categories = config.categories;
  out.sources = story.sources;
  for (const auto& a : story.articles)
    out.articles.push_back({a.id, a.source_id, a.headline, a.url, a.published_at});
  Timestamp latest = story.articles.front().published_at;
  for (const auto& a : story.articles) latest = std::max(latest, a.published_at);
  out.analyzed_at = config.analyzed_at.value_or(latest);

  const std::string summary = select_summary(story);
  std::vector<CandidateQuestion> candidates;
  std::size_t qg_failures = 0;
  for (auto sw : config.start_words) {
    try {
      auto qs = generate_questions(*providers.qg,
                                   {story.id, summary, sw, config.candidates_per_start_word});
      candidates.insert(candidates.end(), qs.begin(), qs.end());
    } catch (const ProviderUnavailable& e) {
      ++qg_failures;
      out.warnings.push_back("question generation unavailable for " + std::string(to_string(sw)) +
                             ": " + e.what());
    }
  }
  if (!config.start_words.empty() && qg_failures == config.start_words.size())
    throw AllProvidersDown("question generation failed for every start word");
  candidates = dedup_questions(candidates, config.dedup_similarity);

  auto distractors = select_distractors(story, story.distractors, config.categories.distractor_count,
                                        config.distractor_cutoff_days);
  if (distractors.empty_archive)
    out.warnings.push_back("no distractor archive attached; distractor answers counted as 0");
  else if (distractors.insufficient)
    out.warnings.push_back("only " + std::to_string(distractors.articles.size()) + " of " +
                           std::to_string(distractors.requested) + " distractor articles eligible");

  std::size_t failed = 0;
  for (const auto& q : candidates) {
    bool provider_failed = false;
    out.questions.push_back(analyze_question(story, distractors, q, providers, config, provider_failed));
    if (provider_failed) ++failed;
  }
  if (!candidates.empty() && failed == candidates.size())
    throw AllProvidersDown("answer extraction failed for every question");
  if (failed > 0)
    out.warnings.push_back(std::to_string(failed) + " question(s) degraded by provider failures");

  out.selected = select_questions(out.questions, config.max_selected);
  return out;
}

// ---- serialization ----------------------------------------------------------

namespace {

json question_to_json(const CandidateQuestion& q) {
  return {{"id", q.id},
          {"text", q.text},
          {"start_word", to_string(q.start_word)},
          {"story_id", q.story_id},
          {"origin", to_string(q.origin)}};
}

CandidateQuestion question_from_json(const json& j) {
  CandidateQuestion q;
  q.id = j.at("id").get<std::string>();
  q.text = j.at("text").get<std::string>();
  auto sw = parse_start_word(j.at("start_word").get<std::string>());
  if (!sw) throw ParseError("bad start word in question " + q.id);
  q.start_word = *sw;
  q.story_id = j.at("story_id").get<std::string>();
  q.origin = parse_question_origin(j.at("origin").get<std::string>());
  return q;
}

json answer_to_json(const Answer& a) {
  return {{"id", a.id},
          {"question_id", a.question_id},
          {"source_id", a.source_id},
          {"article_id", a.article_id},
          {"text", a.text},
          {"char_start", a.char_start},
          {"char_end", a.char_end},
          {"confidence", a.confidence}};
}

Answer answer_from_json(const json& j) {
  Answer a;
  a.id = j.at("id").get<std::string>();
  a.question_id = j.at("question_id").get<std::string>();
  a.source_id = j.at("source_id").get<std::string>();
  a.article_id = j.at("article_id").get<std::string>();
  a.text = j.at("text").get<std::string>();
  a.char_start = j.at("char_start").get<std::size_t>();
  a.char_end = j.at("char_end").get<std::size_t>();
  a.confidence = j.at("confidence").get<double>();
  return a;
}

json no_answer_to_json(const NoAnswer& n) {
  json j = {{"question_id", n.question_id},
            {"source_id", n.source_id},
            {"article_id", n.article_id},
            {"confidence", n.confidence}};
  if (n.warning) j["warning"] = *n.warning;
  return j;
}

NoAnswer no_answer_from_json(const json& j) {
  NoAnswer n;
  n.question_id = j.at("question_id").get<std::string>();
  n.source_id = j.at("source_id").get<std::string>();
  n.article_id = j.at("article_id").get<std::string>();
  n.confidence = j.at("confidence").get<double>();
  if (j.contains("warning")) n.warning = j["warning"].get<std::string>();
  return n;
}

json stats_to_json(const QuestionStats& s) {
  return {{"n_sources", s.n_sources},
          {"answering_sources", s.answering_sources},
          {"n_answers", s.n_answers},
          {"largest_group_size", s.largest_group_size},
          {"n_distractor_answers", s.n_distractor_answers}};
}

QuestionStats stats_from_json(const json& j) {
  QuestionStats s;
  s.n_sources = j.at("n_sources").get<std::size_t>();
  s.answering_sources = j.at("answering_sources").get<std::size_t>();
  s.n_answers = j.at("n_answers").get<std::size_t>();
  s.largest_group_size = j.at("largest_group_size").get<std::size_t>();
  s.n_distractor_answers = j.at("n_distractor_answers").get<std::size_t>();
  return s;
}

}  // namespace

json analysis_to_json(const StoryAnalysis& a) {
  json sources = json::array();
  for (const auto& s : a.sources) sources.push_back({{"id", s.id}, {"display_name", s.display_name}});
  json articles = json::array();
  for (const auto& r : a.articles) {
    json j = {{"id", r.id},
              {"source_id", r.source_id},
              {"headline", r.headline},
              {"published_at", format_timestamp(r.published_at)}};
    if (r.url) j["url"] = *r.url;
    articles.push_back(std::move(j));
  }
  json questions = json::array();
  for (const auto& q : a.questions) {
    json answers = json::array();
    for (const auto& ans : q.answers) answers.push_back(answer_to_json(ans));
    json none = json::array();
    for (const auto& n : q.no_answers) none.push_back(no_answer_to_json(n));
    questions.push_back({{"question", question_to_json(q.question)},
                         {"answers", answers},
                         {"no_answers", none},
                         {"grouping", grouping_to_json(q.grouping)},
                         {"stats", stats_to_json(q.stats)},
                         {"label", {{"label", to_string(q.label.label)}, {"reasons", q.label.reasons}}},
                         {"warnings", q.warnings}});
  }
  return {{"story_id", a.story_id},
          {"title", a.title},
          {"analyzed_at", format_timestamp(a.analyzed_at)},
          {"config_fingerprint", a.config_fingerprint},
          {"categories", category_config_to_json(a.categories)},
          {"sources", sources},
          {"articles", articles},
          {"questions", questions},
          {"selected", a.selected},
          {"warnings", a.warnings}};
}

StoryAnalysis analysis_from_json(const json& j) {
  StoryAnalysis a;
  try {
    a.story_id = j.at("story_id").get<std::string>();
    a.title = j.at("title").get<std::string>();
    a.analyzed_at = parse_timestamp(j.at("analyzed_at").get<std::string>());
    a.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    a.categories = category_config_from_json(j.at("categories"));
    for (const auto& s : j.at("sources"))
      a.sources.push_back({s.at("id").get<std::string>(), s.at("display_name").get<std::string>()});
    for (const auto& r : j.at("articles")) {
      ArticleRef ref;
      ref.id = r.at("id").get<std::string>();
      ref.source_id = r.at("source_id").get<std::string>();
      ref.headline = r.at("headline").get<std::string>();
      ref.published_at = parse_timestamp(r.at("published_at").get<std::string>());
      if (r.contains("url")) ref.url = r["url"].get<std::string>();
      a.articles.push_back(std::move(ref));
    }
    for (const auto& qj : j.at("questions")) {
      QuestionAnalysis q;
      q.question = question_from_json(qj.at("question"));
      for (const auto& x : qj.at("answers")) q.answers.push_back(answer_from_json(x));
      for (const auto& x : qj.at("no_answers")) q.no_answers.push_back(no_answer_from_json(x));
      q.grouping = grouping_from_json(qj.at("grouping"));
      q.stats = stats_from_json(qj.at("stats"));
      q.label.label = parse_category(qj.at("label").at("label").get<std::string>());
      q.label.reasons = qj.at("label").at("reasons").get<std::vector<std::string>>();
      q.warnings = qj.at("warnings").get<std::vector<std::string>>();
      a.questions.push_back(std::move(q));
    }
    a.selected = j.at("selected").get<std::vector<std::string>>();
    a.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("analysis record: ") + e.what());
  }

  for (const auto& q : a.questions) {
    if (q.grouping.answer_count() != q.answers.size())
      throw ValidationError("question " + q.question.id + ": grouping does not cover its answers");
    auto derived = categorize_question(q.stats, a.categories);
    if (derived != q.label)
      throw ValidationError("question " + q.question.id + ": label not derivable from its stats");
  }
  for (const auto& id : a.selected) {
    const auto* q = a.find_question(id);
    if (!q || q->label.label != Category::Discord)
      throw ValidationError("selected question " + id + " is not a discord question");
  }
  return a;
}

json render_public_analysis(const StoryAnalysis& a) {
  std::map<std::string, const Source*> sources;
  for (const auto& s : a.sources) sources[s.id] = &s;
  std::map<std::string, const ArticleRef*> articles;
  for (const auto& r : a.articles) articles[r.id] = &r;

  auto render_answer = [&](const Answer& ans) {
    json j = {{"answer_id", ans.id},
              {"text", ans.text},
              {"source_id", ans.source_id},
              {"article_id", ans.article_id}};
    auto s = sources.find(ans.source_id);
    j["source_name"] = s != sources.end() ? s->second->display_name : ans.source_id;
    auto r = articles.find(ans.article_id);
    j["url"] = r != articles.end() && r->second->url ? json(*r->second->url) : json(nullptr);
    j["headline"] = r != articles.end() ? json(r->second->headline) : json(nullptr);
    return j;
  };

  std::set<std::string> selected(a.selected.begin(), a.selected.end());
  json questions = json::array();
  for (const auto& q : a.questions) {
    std::map<std::string, const Answer*> by_id;
    for (const auto& ans : q.answers) by_id[ans.id] = &ans;
    json groups = json::array();
    for (std::size_t g = 0; g < q.grouping.groups.size(); ++g) {
      const auto& grp = q.grouping.groups[g];
      json members = json::array();
      for (const auto& id : grp.member_ids)
        if (auto it = by_id.find(id); it != by_id.end()) members.push_back(render_answer(*it->second));
      json rep = nullptr;
      if (auto it = by_id.find(grp.representative_id); it != by_id.end())
        rep = render_answer(*it->second);
      groups.push_back({{"index", g}, {"size", grp.member_ids.size()}, {"representative", rep},
                        {"members", members}});
    }
    double coverage = q.stats.n_sources ? static_cast<double>(q.stats.answering_sources) /
                                              static_cast<double>(q.stats.n_sources)
                                        : 0.0;
    questions.push_back({{"id", q.question.id},
                         {"text", q.question.text},
                         {"start_word", to_string(q.question.start_word)},
                         {"label", to_string(q.label.label)},
                         {"reasons", q.label.reasons},
                         {"selected", selected.contains(q.question.id)},
                         {"coverage", coverage},
                         {"stats", stats_to_json(q.stats)},
                         {"groups", groups}});
  }

  // Grid: selected questions x sources; sources by answered count, then id.
  std::map<std::string, std::size_t> answered;
  for (const auto& s : a.sources) answered[s.id] = 0;
  for (const auto& id : a.selected)
    if (const auto* q = a.find_question(id))
      for (const auto& ans : q->answers) ++answered[ans.source_id];
  std::vector<std::string> cols;
  for (const auto& [id, _] : answered) cols.push_back(id);
  std::stable_sort(cols.begin(), cols.end(), [&](const std::string& x, const std::string& y) {
    return answered[x] > answered[y];
  });
  json cells = json::array();
  for (const auto& id : a.selected) {
    const auto* q = a.find_question(id);
    json row = json::array();
    std::map<std::string, std::pair<std::size_t, std::string>> by_source;
    if (q) {
      auto assignment = q->grouping.assignment();
      for (const auto& ans : q->answers) by_source[ans.source_id] = {assignment.at(ans.id), ans.id};
    }
    for (const auto& sid : cols) {
      auto it = by_source.find(sid);
      if (it == by_source.end())
        row.push_back(nullptr);
      else
        row.push_back({{"group_index", it->second.first}, {"answer_id", it->second.second}});
    }
    cells.push_back(std::move(row));
  }

  json srcs = json::array();
  for (const auto& s : a.sources) srcs.push_back({{"id", s.id}, {"display_name", s.display_name}});
  return {{"story_id", a.story_id},
          {"title", a.title},
          {"analyzed_at", format_timestamp(a.analyzed_at)},
          {"config_fingerprint", a.config_fingerprint},
          {"sources", srcs},
          {"selected", a.selected},
          {"questions", questions},
          {"grid", {{"rows", a.selected}, {"cols", cols}, {"cells", cells}}}};
}

std::vector<CategorizedQuestion> categorized_questions(const StoryAnalysis& a, const std::string& system) {
  std::vector<CategorizedQuestion> out;
  out.reserve(a.questions.size());
  for (const auto& q : a.questions) out.push_back({system, a.story_id, q.question.start_word, q.label.label});
  return out;
}

}  // namespace discordq
