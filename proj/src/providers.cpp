#include "discordq/providers.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "discordq/errors.hpp"
#include "discordq/text.hpp"

namespace discordq {

std::string_view to_string(QuestionOrigin o) {
  switch (o) {
    case QuestionOrigin::Generated: return "generated";
    case QuestionOrigin::Fixture: return "fixture";
    case QuestionOrigin::Human: return "human";
  }
  return "generated";
}

QuestionOrigin parse_question_origin(std::string_view s) {
  if (s == "generated") return QuestionOrigin::Generated;
  if (s == "fixture") return QuestionOrigin::Fixture;
  if (s == "human") return QuestionOrigin::Human;
  throw ParseError("unknown question origin '" + std::string(s) + "'");
}

std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::Unit: return "unit";
    case Scale::Mocha: return "mocha";
    case Scale::Signed: return "signed";
  }
  return "unit";
}

Scale parse_scale(std::string_view s) {
  if (s == "unit") return Scale::Unit;
  if (s == "mocha") return Scale::Mocha;
  if (s == "signed") return Scale::Signed;
  throw ParseError("unknown score scale '" + std::string(s) + "'");
}

double to_unit(double score, Scale scale) {
  double u = score;
  switch (scale) {
    case Scale::Unit: break;
    case Scale::Mocha: u = (score - 1.0) / 4.0; break;
    case Scale::Signed: u = (score + 1.0) / 2.0; break;
  }
  return std::clamp(u, 0.0, 1.0);
}

double nli_score(double p_entail, double p_contradict) {
  auto in_range = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_range(p_entail) || !in_range(p_contradict))
    throw InputError("NLI probabilities must lie in [0, 1]");
  return p_entail - p_contradict;
}

bool is_verbatim(const Answer& a, std::string_view content) {
  return !a.text.empty() && a.char_start < a.char_end && a.char_end <= content.size() &&
         content.substr(a.char_start, a.char_end - a.char_start) == a.text;
}

std::vector<CandidateQuestion> generate_questions(QuestionGenerator& gen,
                                                  const GenerationRequest& req,
                                                  std::size_t first_index) {
  if (text::normalize(req.summary).empty()) throw InputError("summary is empty");
  std::vector<CandidateQuestion> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : gen.generate(req)) {
    if (out.size() >= req.n) break;
    auto q = text::normalize(raw);
    if (!satisfies_start_word(q, req.start_word)) {
      spdlog::warn("dropping malformed {} question from {}: '{}'", to_string(req.start_word),
                   gen.id(), q);
      continue;
    }
    if (!seen.insert(text::fold(q)).second) continue;
    CandidateQuestion c;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "-%02zu", first_index + out.size());
    c.id = text::to_lower_ascii(to_string(req.start_word)) + idbuf;
    c.text = std::move(q);
    c.start_word = req.start_word;
    c.story_id = req.story_id;
    c.origin = gen.origin();
    out.push_back(std::move(c));
  }
  return out;
}

Extraction extract_answer(AnswerExtractor& qa, const CandidateQuestion& q, const Article& article) {
  if (article.content.empty()) throw InputError("article '" + article.id + "' has no content");
  Extraction e = qa.extract(q, article);
  if (auto* a = std::get_if<Answer>(&e)) {
    a->question_id = q.id;
    a->source_id = article.source_id;
    a->article_id = article.id;
    if (a->id.empty()) a->id = article.id;
    a->confidence = std::clamp(a->confidence, 0.0, 1.0);
    if (!is_verbatim(*a, article.content)) {
      std::string warning = "offset mismatch from " + qa.id() + " on article " + article.id;
      spdlog::warn("{}", warning);
      return NoAnswer{q.id, article.source_id, article.id, a->confidence, warning};
    }
  } else {
    auto& n = std::get<NoAnswer>(e);
    n.question_id = q.id;
    n.source_id = article.source_id;
    n.article_id = article.id;
    n.confidence = std::clamp(n.confidence, 0.0, 1.0);
  }
  return e;
}

void FixtureQuestionGenerator::add_story(const Story& story) {
  for (const auto& q : story.questions) questions_.emplace_back(story.id, q);
}

std::vector<std::string> FixtureQuestionGenerator::generate(const GenerationRequest& req) {
  std::vector<std::string> out;
  for (const auto& [story_id, q] : questions_)
    if (story_id == req.story_id && q.start_word == req.start_word) out.push_back(q.text);
  return out;
}

namespace {

std::string as_clause(std::string_view sentence) {
  std::string s(sentence);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' ||
                        s.back() == '"' || s.back() == '\'' || s.back() == ' '))
    s.pop_back();
  auto first_word = s.substr(0, s.find(' '));
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' && text::is_stopword(text::to_lower_ascii(first_word)))
    s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

std::string_view template_prefix(StartWord w) {
  switch (w) {
    case StartWord::Why: return "Why does it matter that ";
    case StartWord::How: return "How did it come about that ";
    case StartWord::What: return "What will happen now that ";
    case StartWord::Who: return "Who is affected by the news that ";
  }
  return "What will happen now that ";
}

}  // namespace

std::vector<std::string> TemplateQuestionGenerator::generate(const GenerationRequest& req) {
  std::string summary = text::normalize(req.summary);
  std::vector<std::string> out;
  for (const auto& span : text::split_sentences(summary)) {
    if (out.size() >= req.n) break;
    auto clause = as_clause(std::string_view(summary).substr(span.begin, span.size()));
    if (clause.empty()) continue;
    out.push_back(std::string(template_prefix(req.start_word)) + clause + "?");
  }
  return out;
}

FixtureThenTemplateGenerator::FixtureThenTemplateGenerator(
    std::shared_ptr<FixtureQuestionGenerator> fixture)
    : fixture_(std::move(fixture)) {}

std::vector<std::string> FixtureThenTemplateGenerator::generate(const GenerationRequest& req) {
  auto out = fixture_->generate(req);
  if (out.size() < req.n) {
    GenerationRequest rest = req;
    rest.n = req.n - out.size();
    for (auto& q : templates_.generate(rest)) out.push_back(std::move(q));
  }
  return out;
}

std::string LexicalAnswerExtractor::id() const {
  return "lexical-qa/v1(min_overlap=" + std::to_string(min_overlap_) + ")";
}

Extraction LexicalAnswerExtractor::extract(const CandidateQuestion& q, const Article& article) {
  auto qtoks = text::content_tokens(q.text);
  std::set<std::string> qset(qtoks.begin(), qtoks.end());
  std::size_t best = 0;
  std::optional<text::Span> best_span;
  const std::string& content = article.content;
  for (const auto& span : text::split_sentences(content)) {
    auto stoks = text::content_tokens(std::string_view(content).substr(span.begin, span.size()));
    std::set<std::string> sset(stoks.begin(), stoks.end());
    std::size_t overlap = 0;
    for (const auto& t : sset) overlap += qset.contains(t) ? 1 : 0;
    if (overlap > best) {
      best = overlap;
      best_span = span;
    }
  }
  double denom = qset.empty() ? 1.0 : static_cast<double>(qset.size());
  if (!best_span || best < min_overlap_) {
    return NoAnswer{q.id, article.source_id, article.id, 1.0 - static_cast<double>(best) / denom,
                    std::nullopt};
  }
  Answer a;
  a.id = article.id;
  a.question_id = q.id;
  a.source_id = article.source_id;
  a.article_id = article.id;
  a.char_start = best_span->begin;
  a.char_end = best_span->end;
  a.text = content.substr(best_span->begin, best_span->size());
  a.confidence = static_cast<double>(best) / denom;
  return a;
}

PairScore TokenF1Scorer::score(std::string_view, std::string_view a1, std::string_view a2) {
  return {text::token_f1(a1, a2), Scale::Unit};
}

}  // namespace discordq
