#include "discordq/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "discordq/errors.hpp"
#include "discordq/text.hpp"

namespace discordq {
namespace {

using nlohmann::json;

void warn_unknown(const json& obj, std::initializer_list<std::string_view> known,
                  std::string_view where, std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      warnings->push_back("unknown field '" + key + "' in " + std::string(where));
  }
}

std::string required_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(std::string(where) + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ParseError(std::string(where) + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

const json& required_array(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array())
    throw ParseError(std::string("bundle: missing array '") + key + "'");
  return *it;
}

bool article_order(const Article& a, const Article& b) {
  if (a.published_at != b.published_at) return a.published_at < b.published_at;
  return a.id < b.id;
}

}  // namespace

const Source* Story::find_source(std::string_view sid) const {
  for (const auto& s : sources)
    if (s.id == sid) return &s;
  return nullptr;
}

const Article* Story::find_article(std::string_view aid) const {
  for (const auto& a : articles)
    if (a.id == aid) return &a;
  return nullptr;
}

std::vector<std::string> Story::distractor_ids() const {
  std::vector<std::string> ids;
  for (const auto& a : distractors) ids.push_back(a.id);
  return ids;
}

std::string Story::full_context() const {
  std::string out;
  for (const auto& a : articles) {
    if (!out.empty()) out += "\n\n";
    out += a.content;
  }
  return out;
}

Article article_from_json(const json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ParseError("article entry must be an object");
  Article a;
  a.id = required_string(j, "id", "article");
  std::string where = "article '" + a.id + "'";
  a.source_id = required_string(j, "source_id", where);
  a.headline = text::normalize(optional_string(j, "headline", where).value_or(""));
  a.content = text::normalize(required_string(j, "content", where));
  if (auto s = optional_string(j, "summary", where)) {
    auto norm = text::normalize(*s);
    if (!norm.empty()) a.summary = std::move(norm);
  }
  a.published_at = parse_timestamp(required_string(j, "published_at", where));
  a.url = optional_string(j, "url", where);
  warn_unknown(j, {"id", "source_id", "headline", "content", "summary", "published_at", "url"},
               where, warnings);
  return a;
}

json article_to_json(const Article& a) {
  json j = {{"id", a.id},
            {"source_id", a.source_id},
            {"headline", a.headline},
            {"content", a.content},
            {"published_at", format_timestamp(a.published_at)}};
  if (a.summary) j["summary"] = *a.summary;
  if (a.url) j["url"] = *a.url;
  return j;
}

Story story_from_json(const json& b, std::vector<std::string>* warnings) {
  if (!b.is_object()) throw ParseError("bundle must be a JSON object");
  Story story;
  story.id = required_string(b, "id", "bundle");
  story.title = text::normalize(optional_string(b, "title", "bundle").value_or(""));
  warn_unknown(b, {"id", "title", "sources", "articles", "distractors", "questions"}, "bundle",
               warnings);

  for (const auto& sj : required_array(b, "sources")) {
    if (!sj.is_object()) throw ParseError("source entry must be an object");
    Source s;
    s.id = required_string(sj, "id", "source");
    s.display_name = optional_string(sj, "display_name", "source").value_or(s.id);
    warn_unknown(sj, {"id", "display_name"}, "source '" + s.id + "'", warnings);
    story.sources.push_back(std::move(s));
  }
  for (const auto& aj : required_array(b, "articles"))
    story.articles.push_back(article_from_json(aj, warnings));
  if (auto it = b.find("distractors"); it != b.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("bundle: 'distractors' must be an array");
    for (const auto& aj : *it) story.distractors.push_back(article_from_json(aj, warnings));
  }
  if (auto it = b.find("questions"); it != b.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("bundle: 'questions' must be an array");
    for (const auto& qj : *it) {
      if (!qj.is_object()) throw ParseError("question entry must be an object");
      auto sw_text = required_string(qj, "start_word", "question");
      auto sw = parse_start_word(sw_text);
      if (!sw) throw ValidationError("unknown start word '" + sw_text + "'");
      StoredQuestion q{*sw, text::normalize(required_string(qj, "text", "question"))};
      warn_unknown(qj, {"start_word", "text"}, "question", warnings);
      story.questions.push_back(std::move(q));
    }
  }

  if (story.id.empty()) throw ValidationError("story id is empty");
  if (story.articles.empty()) throw ValidationError("story '" + story.id + "' has no articles");
  std::set<std::string> source_ids;
  for (const auto& s : story.sources) {
    if (s.id.empty()) throw ValidationError("source with empty id");
    if (!source_ids.insert(s.id).second)
      throw ValidationError("duplicate source id '" + s.id + "'");
  }
  std::set<std::string> article_ids;
  auto check_article = [&](const Article& a, bool needs_source) {
    if (a.id.empty()) throw ValidationError("article with empty id");
    if (!article_ids.insert(a.id).second)
      throw ValidationError("duplicate article id '" + a.id + "'");
    if (a.content.empty())
      throw ValidationError("article '" + a.id + "' has empty content");
    if (needs_source && !source_ids.contains(a.source_id))
      throw ValidationError("article '" + a.id + "' references unknown source '" +
                            a.source_id + "'");
  };
  for (const auto& a : story.articles) check_article(a, true);
  for (const auto& a : story.distractors) check_article(a, false);

  std::sort(story.articles.begin(), story.articles.end(), article_order);
  std::sort(story.distractors.begin(), story.distractors.end(), article_order);
  std::sort(story.sources.begin(), story.sources.end(),
            [](const Source& x, const Source& y) { return x.id < y.id; });
  return story;
}

Story load_story_bundle(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open bundle " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError("bundle " + path.string() + ": " + e.what());
  }
  return story_from_json(j, warnings);
}

json story_to_json(const Story& story) {
  json sources = json::array();
  for (const auto& s : story.sources)
    sources.push_back({{"id", s.id}, {"display_name", s.display_name}});
  json articles = json::array();
  for (const auto& a : story.articles) articles.push_back(article_to_json(a));
  json j = {{"id", story.id}, {"title", story.title}, {"sources", sources}, {"articles", articles}};
  if (!story.distractors.empty()) {
    json d = json::array();
    for (const auto& a : story.distractors) d.push_back(article_to_json(a));
    j["distractors"] = d;
  }
  if (!story.questions.empty()) {
    json q = json::array();
    for (const auto& sq : story.questions)
      q.push_back({{"start_word", to_string(sq.start_word)}, {"text", sq.text}});
    j["questions"] = q;
  }
  return j;
}

std::string select_summary(const Story& story) {
  // Articles are already in (published_at, id) order.
  for (const auto& a : story.articles)
    if (a.summary) return *a.summary;
  return text::lead_sentences(story.articles.front().content, 3);
}

DistractorSet select_distractors(const Story& story, std::span<const Article> archive,
                                 std::size_t n, int cutoff_days) {
  DistractorSet out;
  out.cutoff_days = cutoff_days;
  out.requested = n;
  if (archive.empty()) {
    out.empty_archive = true;
    out.insufficient = n > 0;
    return out;
  }
  const auto earliest = story.articles.front().published_at;
  const auto limit = earliest - std::chrono::days{cutoff_days};
  std::vector<Article> eligible;
  for (const auto& a : archive)
    if (a.published_at <= limit) eligible.push_back(a);
  // Most recent first; ties by id for a stable pick.
  std::sort(eligible.begin(), eligible.end(), [](const Article& x, const Article& y) {
    if (x.published_at != y.published_at) return x.published_at > y.published_at;
    return x.id < y.id;
  });
  if (eligible.size() > n) eligible.resize(n);
  out.insufficient = eligible.size() < n;
  out.articles = std::move(eligible);
  return out;
}

std::string registered_domain(std::string_view url) {
  auto scheme = url.find("://");
  std::string_view rest = scheme == std::string_view::npos ? url : url.substr(scheme + 3);
  auto stop = rest.find_first_of("/?#");
  std::string host = text::to_lower_ascii(rest.substr(0, stop));
  if (auto at = host.rfind('@'); at != std::string::npos) host = host.substr(at + 1);
  if (auto colon = host.find(':'); colon != std::string::npos) host.resize(colon);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) return {};
  for (char c : host)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') return {};

  std::vector<std::string> labels;
  std::stringstream ss(host);
  for (std::string label; std::getline(ss, label, '.');)
    if (!label.empty()) labels.push_back(label);
  if (labels.size() <= 2) {
    std::string out;
    for (const auto& l : labels) out += (out.empty() ? "" : ".") + l;
    return out;
  }
  // Two-letter country TLDs with a generic second level (co.uk, com.au).
  static const std::set<std::string> second_levels = {"co", "com", "net", "org", "gov",
                                                      "ac", "edu", "ne", "or"};
  std::size_t keep = 2;
  const auto& tld = labels.back();
  const auto& sld = labels[labels.size() - 2];
  if (tld.size() == 2 && second_levels.contains(sld)) keep = 3;
  std::string out;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i)
    out += (out.empty() ? "" : ".") + labels[i];
  return out;
}

}  // namespace discordq
