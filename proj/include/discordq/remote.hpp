#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "json.hpp"

#include "discordq/providers.hpp"
#include "discordq/text.hpp"

namespace discordq {

struct RemoteOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8090"
  std::chrono::milliseconds timeout{5000};
  int retries = 2;
  std::chrono::milliseconds backoff{100};  // doubled after each failed attempt
  std::size_t max_context_bytes = 4000;    // /extract window size
};

// POSTs a JSON body and returns the decoded reply. Transport failures and
// non-200 statuses are retried `retries` times before ProviderUnavailable.
class JsonEndpoint {
 public:
  explicit JsonEndpoint(RemoteOptions opts);
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  const RemoteOptions& options() const { return opts_; }

 private:
  RemoteOptions opts_;
};

// POST /generate {summary, start_word, n} -> {questions: [...]}
class RemoteQuestionGenerator final : public QuestionGenerator {
 public:
  explicit RemoteQuestionGenerator(RemoteOptions opts) : endpoint_(std::move(opts)) {}
  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return "remote:" + endpoint_.options().base_url; }

 private:
  JsonEndpoint endpoint_;
};

// POST /extract {question, context} -> {span, start, end, confidence}
//                                   or {no_answer: true, confidence}
// Long articles are sent as sentence-aligned windows of at most
// max_context_bytes; the highest-confidence verbatim span wins.
class RemoteAnswerExtractor final : public AnswerExtractor {
 public:
  explicit RemoteAnswerExtractor(RemoteOptions opts) : endpoint_(std::move(opts)) {}
  Extraction extract(const CandidateQuestion& q, const Article& article) override;
  std::string id() const override { return "remote:" + endpoint_.options().base_url; }

 private:
  JsonEndpoint endpoint_;
};

// POST /score {question, answer_a, answer_b} -> {score, scale}
class RemotePairScorer final : public PairScorer {
 public:
  explicit RemotePairScorer(RemoteOptions opts) : endpoint_(std::move(opts)) {}
  PairScore score(std::string_view question, std::string_view a1, std::string_view a2) override;
  std::string id() const override { return "remote:" + endpoint_.options().base_url; }

 private:
  JsonEndpoint endpoint_;
};

/// Byte ranges of `content` covering it with sentence-aligned windows of at
/// most `max_bytes` (a single longer sentence forms its own window).
/// Consecutive windows share one sentence.
std::vector<text::Span> context_windows(std::string_view content, std::size_t max_bytes);

// Serves the three wire endpoints from in-process providers. Useful as an
// offline stand-in for model servers and in tests.
class ProviderServer {
 public:
  ProviderServer(std::shared_ptr<QuestionGenerator> qg, std::shared_ptr<AnswerExtractor> qa,
                 std::shared_ptr<PairScorer> scorer);
  ~ProviderServer();
  ProviderServer(const ProviderServer&) = delete;
  ProviderServer& operator=(const ProviderServer&) = delete;

  /// Binds and starts serving on a background thread; port 0 picks a free
  /// port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace discordq
