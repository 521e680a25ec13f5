#include "discordq/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "discordq/errors.hpp"
#include "discordq/remote.hpp"

namespace discordq {

using nlohmann::json;

namespace {

std::optional<std::string> from_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("categories")) c.categories = category_config_from_json(j["categories"]);
    if (j.contains("consolidation")) {
      const auto& cj = j["consolidation"];
      c.consolidation.tau = cj.value("tau", c.consolidation.tau);
      c.consolidation.resolution = cj.value("resolution", c.consolidation.resolution);
      c.consolidation.weighted = cj.value("weighted", c.consolidation.weighted);
      c.consolidation.workers = cj.value("workers", c.consolidation.workers);
    }
    c.candidates_per_start_word = j.value("candidates_per_start_word", c.candidates_per_start_word);
    if (j.contains("start_words")) {
      c.start_words.clear();
      for (const auto& s : j["start_words"]) {
        auto sw = parse_start_word(s.get<std::string>());
        if (!sw) throw InputError("unknown start word " + s.dump());
        c.start_words.push_back(*sw);
      }
    }
    c.max_selected = j.value("max_selected", c.max_selected);
    c.distractor_cutoff_days = j.value("distractor_cutoff_days", c.distractor_cutoff_days);
    c.dedup_similarity = j.value("dedup_similarity", c.dedup_similarity);
    c.qa_workers = j.value("qa_workers", c.qa_workers);
    if (auto s = opt_string(j, "analyzed_at")) c.analyzed_at = parse_timestamp(*s);

    const json& pj = j.contains("providers") ? j["providers"] : j;
    auto& p = c.providers;
    p.qg = pj.value("qg", p.qg);
    p.qa = pj.value("qa", p.qa);
    p.scorer = pj.value("scorer", p.scorer);
    p.qg_url = opt_string(pj, "qg_url");
    p.qa_url = opt_string(pj, "qa_url");
    p.scorer_url = opt_string(pj, "scorer_url");
    p.timeout_ms = pj.value("timeout_ms", p.timeout_ms);
    p.retries = pj.value("retries", p.retries);
    p.backoff_ms = pj.value("backoff_ms", p.backoff_ms);
    p.max_context_bytes = pj.value("max_context_bytes", p.max_context_bytes);
    p.qa_min_overlap = pj.value("qa_min_overlap", p.qa_min_overlap);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  if (!(c.consolidation.tau >= 0.0 && c.consolidation.tau <= 1.0))
    throw InputError("consolidation.tau must lie in [0, 1]");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return run_config_from_json(json::parse(buf.str()));
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
}

json run_config_to_json(const RunConfig& c) {
  json sw = json::array();
  for (auto w : c.start_words) sw.push_back(to_string(w));
  json providers = {{"qg", c.providers.qg},
                    {"qa", c.providers.qa},
                    {"scorer", c.providers.scorer},
                    {"timeout_ms", c.providers.timeout_ms},
                    {"retries", c.providers.retries},
                    {"backoff_ms", c.providers.backoff_ms},
                    {"max_context_bytes", c.providers.max_context_bytes},
                    {"qa_min_overlap", c.providers.qa_min_overlap}};
  if (c.providers.qg_url) providers["qg_url"] = *c.providers.qg_url;
  if (c.providers.qa_url) providers["qa_url"] = *c.providers.qa_url;
  if (c.providers.scorer_url) providers["scorer_url"] = *c.providers.scorer_url;
  json out = {{"categories", category_config_to_json(c.categories)},
              {"consolidation",
               {{"tau", c.consolidation.tau},
                {"resolution", c.consolidation.resolution},
                {"weighted", c.consolidation.weighted},
                {"workers", c.consolidation.workers}}},
              {"candidates_per_start_word", c.candidates_per_start_word},
              {"start_words", sw},
              {"max_selected", c.max_selected},
              {"distractor_cutoff_days", c.distractor_cutoff_days},
              {"dedup_similarity", c.dedup_similarity},
              {"qa_workers", c.qa_workers},
              {"providers", providers}};
  if (c.analyzed_at) out["analyzed_at"] = format_timestamp(*c.analyzed_at);
  return out;
}

Providers make_providers(const ProviderConfig& config) {
  auto remote = [&](const std::string& url) {
    RemoteOptions o;
    o.base_url = url;
    o.timeout = std::chrono::milliseconds(config.timeout_ms);
    o.retries = config.retries;
    o.backoff = std::chrono::milliseconds(config.backoff_ms);
    o.max_context_bytes = config.max_context_bytes;
    return o;
  };
  Providers p;
  auto qg_url = config.qg_url ? config.qg_url : from_env("DISCORDQ_QG_URL");
  auto qa_url = config.qa_url ? config.qa_url : from_env("DISCORDQ_QA_URL");
  auto scorer_url = config.scorer_url ? config.scorer_url : from_env("DISCORDQ_SCORER_URL");

  if (qg_url) {
    p.qg = std::make_shared<RemoteQuestionGenerator>(remote(*qg_url));
  } else if (config.qg == "fixture") {
    p.fixture = std::make_shared<FixtureQuestionGenerator>();
    p.qg = p.fixture;
  } else if (config.qg == "template") {
    p.qg = std::make_shared<TemplateQuestionGenerator>();
  } else if (config.qg == "fixture+template") {
    p.fixture = std::make_shared<FixtureQuestionGenerator>();
    p.qg = std::make_shared<FixtureThenTemplateGenerator>(p.fixture);
  } else {
    throw InputError("unknown question generator '" + config.qg + "'");
  }

  if (qa_url)
    p.qa = std::make_shared<RemoteAnswerExtractor>(remote(*qa_url));
  else if (config.qa == "lexical")
    p.qa = std::make_shared<LexicalAnswerExtractor>(config.qa_min_overlap);
  else
    throw InputError("unknown answer extractor '" + config.qa + "'");

  if (scorer_url)
    p.scorer = std::make_shared<RemotePairScorer>(remote(*scorer_url));
  else if (config.scorer == "token-f1")
    p.scorer = std::make_shared<TokenF1Scorer>();
  else
    throw InputError("unknown pair scorer '" + config.scorer + "'");
  return p;
}

}  // namespace discordq
