#include "discordq/remote.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "discordq/errors.hpp"

namespace discordq {

using nlohmann::json;

JsonEndpoint::JsonEndpoint(RemoteOptions opts) : opts_(std::move(opts)) {
  if (opts_.base_url.empty()) throw InputError("remote provider needs a base url");
}

json JsonEndpoint::post(const std::string& path, const json& body) const {
  const auto payload = body.dump();
  std::string last_error;
  auto backoff = opts_.backoff;
  for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    // One client per call: httplib::Client is not safe for concurrent use.
    httplib::Client cli(opts_.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      last_error = std::string("malformed reply: ") + e.what();
    }
  }
  throw ProviderUnavailable(opts_.base_url + path + ": " + last_error);
}

std::vector<std::string> RemoteQuestionGenerator::generate(const GenerationRequest& req) {
  json reply = endpoint_.post("/generate", {{"summary", req.summary},
                                            {"start_word", to_string(req.start_word)},
                                            {"n", req.n},
                                            {"story_id", req.story_id}});
  auto it = reply.find("questions");
  if (it == reply.end() || !it->is_array())
    throw ProviderUnavailable("/generate reply lacks a questions array");
  std::vector<std::string> out;
  for (const auto& q : *it)
    if (q.is_string()) out.push_back(q.get<std::string>());
  return out;
}

std::vector<text::Span> context_windows(std::string_view content, std::size_t max_bytes) {
  std::vector<text::Span> out;
  if (content.empty()) return out;
  if (content.size() <= max_bytes) return {{0, content.size()}};
  auto sentences = text::split_sentences(content);
  std::size_t i = 0;
  while (i < sentences.size()) {
    std::size_t j = i;
    while (j + 1 < sentences.size() && sentences[j + 1].end - sentences[i].begin <= max_bytes) ++j;
    out.push_back({sentences[i].begin, sentences[j].end});
    if (j + 1 >= sentences.size()) break;
    i = j > i ? j : j + 1;
  }
  return out;
}

Extraction RemoteAnswerExtractor::extract(const CandidateQuestion& q, const Article& article) {
  std::optional<Answer> best;
  double no_answer_conf = 0.0;
  std::optional<std::string> warning;
  const std::string_view content = article.content;
  for (const auto& w : context_windows(content, endpoint_.options().max_context_bytes)) {
    auto window = content.substr(w.begin, w.size());
    json reply = endpoint_.post("/extract", {{"question", q.text}, {"context", window}});
    double conf = std::clamp(reply.value("confidence", 0.0), 0.0, 1.0);
    if (reply.value("no_answer", false)) {
      no_answer_conf = std::max(no_answer_conf, conf);
      continue;
    }
    if (!reply.contains("span") || !reply.contains("start") || !reply.contains("end")) {
      warning = "incomplete /extract reply on article " + article.id;
      continue;
    }
    auto span = reply["span"].get<std::string>();
    auto start = reply["start"].get<std::size_t>();
    auto end = reply["end"].get<std::size_t>();
    if (span.empty() || start >= end || end > window.size() ||
        window.substr(start, end - start) != span) {
      warning = "offset mismatch on article " + article.id;
      spdlog::warn("{} from {}", *warning, id());
      continue;
    }
    if (!best || conf > best->confidence) {
      Answer a;
      a.id = article.id;
      a.question_id = q.id;
      a.source_id = article.source_id;
      a.article_id = article.id;
      a.text = std::move(span);
      a.char_start = w.begin + start;
      a.char_end = w.begin + end;
      a.confidence = conf;
      best = std::move(a);
    }
  }
  if (best) return *best;
  return NoAnswer{q.id, article.source_id, article.id, no_answer_conf, warning};
}

PairScore RemotePairScorer::score(std::string_view question, std::string_view a1,
                                  std::string_view a2) {
  json reply = endpoint_.post("/score", {{"question", question}, {"answer_a", a1}, {"answer_b", a2}});
  if (!reply.contains("score") || !reply["score"].is_number())
    throw ProviderUnavailable("/score reply lacks a numeric score");
  PairScore s;
  s.score = reply["score"].get<double>();
  s.scale = parse_scale(reply.value("scale", "unit"));
  return s;
}

// ---- server ----------------------------------------------------------------

struct ProviderServer::Impl {
  std::shared_ptr<QuestionGenerator> qg;
  std::shared_ptr<AnswerExtractor> qa;
  std::shared_ptr<PairScorer> scorer;
  httplib::Server server;
  std::thread thread;
};

namespace {

void reply_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

ProviderServer::ProviderServer(std::shared_ptr<QuestionGenerator> qg,
                               std::shared_ptr<AnswerExtractor> qa,
                               std::shared_ptr<PairScorer> scorer)
    : impl_(std::make_unique<Impl>()) {
  impl_->qg = std::move(qg);
  impl_->qa = std::move(qa);
  impl_->scorer = std::move(scorer);
  auto* impl = impl_.get();

  auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(json::parse(req.body), res);
      } catch (const std::exception& e) {
        reply_json(res, {{"error", e.what()}}, 400);
      }
    };
  };

  impl_->server.Post("/generate", guarded([impl](const json& body, httplib::Response& res) {
    if (!impl->qg) return reply_json(res, {{"error", "no generator"}}, 404);
    GenerationRequest req;
    req.summary = body.at("summary").get<std::string>();
    auto sw = parse_start_word(body.at("start_word").get<std::string>());
    if (!sw) throw InputError("unknown start word");
    req.start_word = *sw;
    req.n = body.value("n", std::size_t{5});
    req.story_id = body.value("story_id", "");
    reply_json(res, {{"questions", impl->qg->generate(req)}});
  }));

  impl_->server.Post("/extract", guarded([impl](const json& body, httplib::Response& res) {
    if (!impl->qa) return reply_json(res, {{"error", "no extractor"}}, 404);
    CandidateQuestion q;
    q.id = "q";
    q.text = body.at("question").get<std::string>();
    Article a;
    a.id = "context";
    a.content = body.at("context").get<std::string>();
    auto e = impl->qa->extract(q, a);
    if (const auto* ans = std::get_if<Answer>(&e)) {
      reply_json(res, {{"span", ans->text},
                       {"start", ans->char_start},
                       {"end", ans->char_end},
                       {"confidence", ans->confidence}});
    } else {
      reply_json(res, {{"no_answer", true}, {"confidence", std::get<NoAnswer>(e).confidence}});
    }
  }));

  impl_->server.Post("/score", guarded([impl](const json& body, httplib::Response& res) {
    if (!impl->scorer) return reply_json(res, {{"error", "no scorer"}}, 404);
    auto s = impl->scorer->score(body.value("question", ""), body.at("answer_a").get<std::string>(),
                                 body.at("answer_b").get<std::string>());
    reply_json(res, {{"score", s.score}, {"scale", to_string(s.scale)}});
  }));
}

ProviderServer::~ProviderServer() { stop(); }

int ProviderServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host.c_str())
                        : (impl_->server.bind_to_port(host.c_str(), port) ? port : -1);
  if (bound < 0) throw InputError("cannot bind provider server to " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ProviderServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host.c_str(), port))
    throw InputError("cannot listen on " + host + ":" + std::to_string(port));
}

void ProviderServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace discordq
