#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "discordq/corpus.hpp"
#include "discordq/start_word.hpp"

namespace discordq {

enum class QuestionOrigin { Generated, Fixture, Human };

std::string_view to_string(QuestionOrigin o);
QuestionOrigin parse_question_origin(std::string_view s);

struct CandidateQuestion {
  std::string id;
  std::string text;
  StartWord start_word = StartWord::What;
  std::string story_id;
  QuestionOrigin origin = QuestionOrigin::Generated;

  bool operator==(const CandidateQuestion&) const = default;
};

// A verbatim span of one article's normalized content.
struct Answer {
  std::string id;
  std::string question_id;
  std::string source_id;
  std::string article_id;
  std::string text;
  std::size_t char_start = 0;  // byte offsets into Article::content
  std::size_t char_end = 0;
  double confidence = 0.0;

  bool operator==(const Answer&) const = default;
};

struct NoAnswer {
  std::string question_id;
  std::string source_id;
  std::string article_id;
  double confidence = 0.0;
  std::optional<std::string> warning;

  bool operator==(const NoAnswer&) const = default;
};

using Extraction = std::variant<Answer, NoAnswer>;

enum class Scale { Unit, Mocha, Signed };

std::string_view to_string(Scale s);
Scale parse_scale(std::string_view s);

struct PairScore {
  double score = 0.0;
  Scale scale = Scale::Unit;
};

/// Affine map of a score on `scale` to [0, 1], clamped.
double to_unit(double score, Scale scale);

/// Entailment minus contradiction probability. Throws InputError when
/// either probability is outside [0, 1].
double nli_score(double p_entail, double p_contradict);

/// True when `answer.text` is exactly content[char_start, char_end).
bool is_verbatim(const Answer& answer, std::string_view content);

struct GenerationRequest {
  std::string story_id;
  std::string summary;
  StartWord start_word = StartWord::What;
  std::size_t n = 5;
};

class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  /// Raw question strings; validation happens in generate_questions().
  virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;
  virtual QuestionOrigin origin() const { return QuestionOrigin::Generated; }
  virtual std::string id() const = 0;
};

class AnswerExtractor {
 public:
  virtual ~AnswerExtractor() = default;
  virtual Extraction extract(const CandidateQuestion& q, const Article& article) = 0;
  virtual std::string id() const = 0;
};

class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual PairScore score(std::string_view question, std::string_view a1,
                          std::string_view a2) = 0;
  virtual std::string id() const = 0;
};

/// Runs the generator and enforces the output contract: questions that do
/// not begin with the start word or do not end with '?' are dropped (and
/// logged), normalized duplicates removed, at most req.n kept. Ids are
/// "<start word>-<NN>" in lowercase, numbered from `first_index`.
std::vector<CandidateQuestion> generate_questions(QuestionGenerator& gen,
                                                  const GenerationRequest& req,
                                                  std::size_t first_index = 1);

/// Validates offsets and verbatim text of an Answer; anything else becomes
/// NoAnswer carrying a warning. Throws InputError on empty content.
Extraction extract_answer(AnswerExtractor& qa, const CandidateQuestion& q,
                          const Article& article);

// ---- reference providers ---------------------------------------------------

// Serves the questions stored in a bundle for the matching story id.
class FixtureQuestionGenerator final : public QuestionGenerator {
 public:
  void add_story(const Story& story);
  std::vector<std::string> generate(const GenerationRequest& req) override;
  QuestionOrigin origin() const override { return QuestionOrigin::Fixture; }
  std::string id() const override { return "fixture/v1"; }

 private:
  std::vector<std::pair<std::string, StoredQuestion>> questions_;
};

// One question per summary sentence, from a per-start-word template.
class TemplateQuestionGenerator final : public QuestionGenerator {
 public:
  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return "template/v1"; }
};

// Fixture questions first, topped up from the template generator.
class FixtureThenTemplateGenerator final : public QuestionGenerator {
 public:
  explicit FixtureThenTemplateGenerator(std::shared_ptr<FixtureQuestionGenerator> fixture);
  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return "fixture+template/v1"; }
  FixtureQuestionGenerator& fixture() { return *fixture_; }

 private:
  std::shared_ptr<FixtureQuestionGenerator> fixture_;
  TemplateQuestionGenerator templates_;
};

// Picks the sentence with the largest stopword-filtered token overlap with
// the question; NoAnswer when that overlap is below `min_overlap`.
class LexicalAnswerExtractor final : public AnswerExtractor {
 public:
  explicit LexicalAnswerExtractor(std::size_t min_overlap = 2) : min_overlap_(min_overlap) {}
  Extraction extract(const CandidateQuestion& q, const Article& article) override;
  std::string id() const override;

 private:
  std::size_t min_overlap_;
};

// Token-level F1, unit scale. Ignores the question.
class TokenF1Scorer final : public PairScorer {
 public:
  PairScore score(std::string_view question, std::string_view a1, std::string_view a2) override;
  std::string id() const override { return "token-f1/v1"; }
};

}  // namespace discordq
