#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "discordq/config.hpp"
#include "discordq/errors.hpp"
#include "discordq/evalharness.hpp"
#include "discordq/feed.hpp"
#include "discordq/pipeline.hpp"
#include "discordq/remote.hpp"
#include "discordq/service.hpp"
#include "discordq/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace discordq;

namespace {

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw InputError("address must be host:port, got " + addr);
  return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

std::vector<Story> load_inputs(const fs::path& p) {
  if (fs::is_directory(p)) return load_story_catalog(p);
  std::vector<std::string> warnings;
  auto story = load_story_bundle(p, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}: {}", p.string(), w);
  return {std::move(story)};
}

int cmd_analyze(const std::string& input, const std::string& config_path, const std::string& out_dir,
                const std::string& store_dir) {
  auto config = config_or_default(config_path);
  auto providers = make_providers(config.providers);
  auto stories = load_inputs(input);
  std::optional<AnalysisStore> store;
  if (!store_dir.empty()) store.emplace(store_dir);
  for (const auto& story : stories) {
    providers.register_story(story);
    auto analysis = analyze_story(story, providers, config);
    for (const auto& w : analysis.warnings) spdlog::warn("{}: {}", story.id, w);
    std::string text = analysis_to_json(analysis).dump(2) + "\n";
    if (store) store->store(analysis);
    if (!out_dir.empty())
      write_text(fs::path(out_dir) / (story.id + ".json"), text);
    else if (!store)
      std::cout << text;
    std::size_t discord = 0;
    for (const auto& q : analysis.questions) discord += q.label.label == Category::Discord;
    spdlog::info("{}: {} questions, {} discord, {} selected", story.id, analysis.questions.size(), discord,
                 analysis.selected.size());
  }
  return 0;
}

int cmd_serve(const std::string& addr, const std::string& store_dir, const std::string& stories_dir,
              const std::string& config_path) {
  auto config = config_or_default(config_path);
  auto providers = make_providers(config.providers);
  std::vector<Story> catalog;
  if (!stories_dir.empty()) catalog = load_story_catalog(stories_dir);
  AnalysisService service(std::make_shared<AnalysisStore>(store_dir), std::move(catalog), std::move(providers),
                          std::move(config));
  auto [host, port] = parse_addr(addr);
  spdlog::info("serving on {}:{} (store {}, fingerprint {})", host, port, store_dir, service.fingerprint());
  service.listen(host, port);
  return 0;
}

// Feed config: {"recorded_root": dir, "out": dir, "stories"?: [refs],
// "keep_below_minimum"?: bool}
int cmd_fetch(const std::string& feed_config) {
  auto cfg = read_json(feed_config);
  fs::path base = fs::path(feed_config).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  RecordedFeedClient client(resolve(cfg.at("recorded_root").get<std::string>()));
  fs::path out = resolve(cfg.at("out").get<std::string>());
  bool keep_small = cfg.value("keep_below_minimum", false);

  std::vector<std::string> refs;
  if (cfg.contains("stories"))
    refs = cfg["stories"].get<std::vector<std::string>>();
  else
    for (const auto& r : client.list_recent_stories()) refs.push_back(r.ref);

  json reports = json::array();
  for (const auto& ref : refs) {
    try {
      auto result = fetch_story(client, ref);
      auto report = fetch_report_to_json(result.report);
      if (result.report.below_source_minimum && !keep_small) {
        spdlog::warn("{}: {} sources, below the minimum of {}; skipped", ref, result.report.distinct_sources,
                     kMinimumSources);
        report["written"] = false;
      } else {
        write_text(out / (result.story.id + ".json"), story_to_json(result.story).dump(2) + "\n");
        report["written"] = true;
      }
      reports.push_back(std::move(report));
    } catch (const StoryUnavailable& e) {
      spdlog::error("{}: {}", ref, e.what());
      reports.push_back({{"story_ref", ref}, {"error", e.what()}, {"written", false}});
    }
  }
  std::cout << reports.dump(2) << "\n";
  return 0;
}

int cmd_eval_pairs(const std::string& path, std::optional<double> threshold) {
  auto file = scored_pairs_from_json(read_json(path));
  std::vector<LabeledPair> gold_pairs;
  std::vector<double> xs, ys;
  for (const auto& row : file.rows) {
    if (row.has_gold) gold_pairs.push_back(row.pair);
    if (row.target) {
      xs.push_back(*row.pair.score);
      ys.push_back(*row.target);
    }
  }
  MetricReport report;
  report.n = file.rows.size();
  if (!gold_pairs.empty()) {
    double tau;
    if (threshold) {
      tau = *threshold;
    } else {
      std::vector<ScoredLabel> labels;
      for (const auto& p : gold_pairs) labels.push_back({*p.score, p.gold});
      tau = select_threshold(labels, path).tau;
    }
    report.threshold_used = tau;
    report.balanced_accuracy = balanced_accuracy(gold_pairs, tau);
  }
  if (xs.size() >= 2) report.pearson = pearson(xs, ys);
  std::cout << metric_report_to_json(report).dump(2) << "\n";
  return 0;
}

int cmd_eval_agreement(const std::string& path) {
  auto questions = nanco_from_json(read_json(path));
  json rows = json::array();
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& q : questions) {
    if (q.annotations.size() < 3) {
      spdlog::warn("{}: {} annotators, skipped", q.id, q.annotations.size());
      continue;
    }
    auto r = agreement_leave_one_out(q.id, q.annotations);
    json per = json::object();
    for (const auto& [a, v] : r.per_annotator) per[a] = v;
    rows.push_back({{"question_id", q.id}, {"mean_ari", r.mean}, {"per_annotator", per}});
    total += r.mean;
    ++n;
  }
  json out = {{"questions", rows}, {"n", n}};
  out["mean_ari"] = n ? json(total / static_cast<double>(n)) : json(nullptr);
  std::cout << out.dump(2) << "\n";
  return 0;
}

// Questions file: {"questions": [{"system", "story_id", "start_word", "label"}]}
std::vector<CategorizedQuestion> questions_from_file(const fs::path& path) {
  auto j = read_json(path);
  std::vector<CategorizedQuestion> qs;
  for (const auto& q : j.at("questions")) {
    auto sw = parse_start_word(q.at("start_word").get<std::string>());
    if (!sw) throw ParseError("bad start word " + q.at("start_word").dump());
    qs.push_back({q.at("system").get<std::string>(), q.at("story_id").get<std::string>(), *sw,
                  parse_category(q.at("label").get<std::string>())});
  }
  return qs;
}

// Run directory: every analysis below it, either as written by `analyze
// --out` or as a store record. The system defaults to the directory name.
std::vector<CategorizedQuestion> questions_from_run(const fs::path& dir, std::string system) {
  if (system.empty()) system = fs::absolute(dir).lexically_normal().filename().string();
  if (system.empty()) system = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CategorizedQuestion> qs;
  for (const auto& f : files) {
    auto j = read_json(f);
    auto analysis = j.contains("format") ? AnalysisStore::parse_record(j.dump()) : analysis_from_json(j);
    auto more = categorized_questions(analysis, system);
    qs.insert(qs.end(), more.begin(), more.end());
  }
  if (qs.empty()) throw InputError("no analyses under " + dir.string());
  return qs;
}

int cmd_eval_discord_rate(const std::string& path, const std::string& system, bool as_json,
                          const std::string& out_file) {
  auto qs = fs::is_directory(path) ? questions_from_run(path, system) : questions_from_file(path);
  auto card = discord_rate_report(qs);
  for (const auto& m : card.missing)
    spdlog::warn("{} has no {} questions for story {}", m.system, to_string(m.start_word), m.story_id);
  if (!out_file.empty()) write_text(out_file, scorecard_to_json(card).dump(2) + "\n");
  if (as_json)
    std::cout << scorecard_to_json(card).dump(2) << "\n";
  else
    std::cout << render_scorecard(card);
  return 0;
}

int cmd_backend(const std::string& addr, const std::string& config_path, const std::string& stories_dir) {
  auto config = config_or_default(config_path);
  config.providers.qg_url.reset();
  config.providers.qa_url.reset();
  config.providers.scorer_url.reset();
  auto providers = make_providers(config.providers);
  if (!stories_dir.empty())
    for (const auto& s : load_story_catalog(stories_dir)) providers.register_story(s);
  ProviderServer server(providers.qg, providers.qa, providers.scorer);
  auto [host, port] = parse_addr(addr);
  spdlog::info("provider backend on {}:{}", host, port);
  server.listen(host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discord question engine for multi-source news stories"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string input, config_path, out_dir, store_dir, addr = "127.0.0.1:8080", stories_dir;
  auto* analyze = app.add_subcommand("analyze", "Analyze a story bundle or a directory of bundles");
  analyze->add_option("input", input, "Bundle file or directory")->required();
  analyze->add_option("--config", config_path, "Run config JSON");
  analyze->add_option("--out", out_dir, "Write <story_id>.json analyses here");
  analyze->add_option("--store", store_dir, "Also persist into this analysis store");

  auto* serve = app.add_subcommand("serve", "Serve stored analyses over HTTP");
  serve->add_option("--addr", addr, "host:port");
  serve->add_option("--store", store_dir, "Analysis store directory")->required();
  serve->add_option("--stories", stories_dir, "Bundle directory for on-demand analysis");
  serve->add_option("--config", config_path, "Run config JSON");

  std::string feed_config;
  auto* fetch = app.add_subcommand("fetch", "Fetch stories from a feed into bundles");
  fetch->add_option("feed-config", feed_config, "Feed config JSON")->required();

  auto* eval = app.add_subcommand("eval", "Evaluation harness");
  eval->require_subcommand(1);
  std::string eval_input;
  std::optional<double> threshold;
  bool as_json = false;
  auto* pairs = eval->add_subcommand("pairs", "Balanced accuracy and correlation of scored pairs");
  pairs->add_option("file", eval_input, "Scored pairs JSON")->required();
  pairs->add_option("--threshold", threshold, "Fixed threshold; tuned on the file when omitted");
  auto* agreement = eval->add_subcommand("agreement", "Leave-one-out annotator agreement (ARI)");
  agreement->add_option("file", eval_input, "Annotated questions JSON")->required();
  auto* rate = eval->add_subcommand("discord-rate", "Discord-rate scorecard");
  std::string system, rate_out;
  rate->add_option("input", eval_input, "Run directory of analyses, or a categorized questions JSON")->required();
  rate->add_option("--system", system, "System name for a run directory (default: its name)");
  rate->add_option("--out", rate_out, "Also write the scorecard JSON here");
  rate->add_flag("--json", as_json, "JSON instead of a table");

  auto* backend = app.add_subcommand("backend", "Serve the reference providers over the wire protocol");
  backend->add_option("--addr", addr, "host:port");
  backend->add_option("--config", config_path, "Run config JSON");
  backend->add_option("--stories", stories_dir, "Bundles whose stored questions the generator serves");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("discordq"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*analyze) return cmd_analyze(input, config_path, out_dir, store_dir);
    if (*serve) return cmd_serve(addr, store_dir, stories_dir, config_path);
    if (*fetch) return cmd_fetch(feed_config);
    if (*pairs) return cmd_eval_pairs(eval_input, threshold);
    if (*agreement) return cmd_eval_agreement(eval_input);
    if (*rate) return cmd_eval_discord_rate(eval_input, system, as_json, rate_out);
    if (*backend) return cmd_backend(addr, config_path, stories_dir);
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
