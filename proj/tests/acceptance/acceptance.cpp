// Acceptance criteria. Each criterion prints one PASS/FAIL line; an optional
// argument restricts the run to one criterion.

#include <httplib.h>

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "discordq/categorize.hpp"
#include "discordq/consolidation.hpp"
#include "discordq/evalharness.hpp"
#include "discordq/louvain.hpp"
#include "discordq/pipeline.hpp"
#include "support/api.hpp"
#include "support/golden.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

using namespace discordq;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (!pass) detail << "; ";
    pass = false;
    detail << what;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Grouping grouping_from_labels(const std::vector<int>& labels, const std::string& qid = "q") {
  std::map<int, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "a%03zu", i);
    groups[labels[i]].push_back(buf);
  }
  std::vector<std::vector<std::string>> v;
  for (auto& [_, m] : groups) v.push_back(m);
  return make_grouping(qid, v, GroupingMethod::Annotated);
}

// ---- criteria -----------------------------------------------------------

Outcome pair_expansion() {
  Outcome o;
  auto t0 = Clock::now();
  auto fixture = testdata::read_json("pair_counts.json");
  std::size_t total = 0;
  for (const auto& q : fixture["questions"]) {
    std::size_t n = q["answers"], k = q["clusters"], want = q["pairs"];
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
    auto pairs = pairs_from_grouping(grouping_from_labels(labels, q["id"]));
    total += pairs.size();
    if (pairs.size() != want)
      o.fail(q["id"].get<std::string>() + ": " + std::to_string(n) + " answers give " + std::to_string(pairs.size()) +
             " pairs, expected " + std::to_string(want));
  }
  std::size_t want_total = fixture["total_pairs"];
  if (total != want_total) o.fail("total " + std::to_string(total) + ", expected " + std::to_string(want_total));
  double secs = seconds_since(t0);
  if (secs >= 1.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail << "8 questions, " << total << " pairs";
  return o;
}

Outcome categorization_boundary() {
  Outcome o;
  CategoryConfig cfg;
  std::size_t checked = 0;
  auto expect = [&](double cov, double share, double spec) {
    // rules as stated, boundaries inclusive
    if (cov < 0.30) return Category::Peripheral;
    if (share >= 0.70) return Category::Consensus;
    if (spec <= 2.0) return Category::Vague;
    return Category::Discord;
  };
  const double covs[] = {0.29, 0.30, 0.31}, shares[] = {0.69, 0.70, 0.71}, specs[] = {1.999, 2.0, 2.001};
  // exact measures
  for (double c : covs)
    for (double s : shares)
      for (double p : specs) {
        auto got = classify({c, s, p, true}, cfg).label;
        ++checked;
        if (got != expect(c, s, p)) {
          std::ostringstream m;
          m << "measures (" << c << ", " << s << ", " << p << ") -> " << to_string(got);
          o.fail(m.str());
        }
      }
  // the same grid as counts: 100 sources, 4000 answers
  const std::size_t answering[] = {29, 30, 31}, largest[] = {2760, 2800, 2840};
  // 3998/2000.001 ~ 1.999, 4000/2000.001 just under 2, 4002/2000.001 ~ 2.001
  const std::size_t n_answers[] = {3998, 4000, 4002};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        QuestionStats st{100, answering[i], n_answers[k], largest[j] * n_answers[k] / 4000, 2000};
        auto m = measure(st, cfg);
        auto got = categorize_question(st, cfg).label;
        ++checked;
        if (got != expect(m.coverage, m.largest_share, m.specificity)) {
          std::ostringstream msg;
          msg << "stats (" << answering[i] << "/100, " << st.largest_group_size << "/" << n_answers[k]
              << ", dis 2000) -> " << to_string(got);
          o.fail(msg.str());
        }
      }
  // the stated boundary points themselves
  if (categorize_question({10, 3, 3, 1, 0}, cfg).label == Category::Peripheral) o.fail("coverage 0.30 is peripheral");
  if (categorize_question({10, 10, 10, 7, 0}, cfg).label != Category::Consensus) o.fail("share 0.70 is not consensus");
  if (classify({1.0, 0.5, 2.0, true}, cfg).label != Category::Vague) o.fail("spec 2.0 is not vague");
  if (categorize_question({10, 0, 0, 0, 0}, cfg).label != Category::Peripheral) o.fail("no answers not peripheral");
  checked += 4;
  if (o.pass) o.detail << checked << " cases";
  return o;
}

Outcome louvain_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 1.0;
  int graphs = 0;
  for (int t = 0; t < 150; ++t) {
    std::size_t n = 3 + t % 6;  // 3..8 nodes
    double density = 0.15 + 0.1 * (t % 7);
    auto inst = testgraphs::random_connected(rng, n, density);
    auto labels = louvain(inst.graph);
    double got = oracle::modularity(inst.adjacency, labels);
    double best = oracle::best_modularity(inst.adjacency);
    ++graphs;
    if (best > 1e-12) worst = std::min(worst, got / best);
    if (got < 0.95 * best - 1e-12) {
      std::ostringstream m;
      m << "graph " << t << " (n=" << n << "): " << got << " < 0.95 * " << best;
      o.fail(m.str());
    }
  }
  int cliques = 0;
  const std::vector<std::vector<std::size_t>> shapes{{3, 3}, {2, 2, 2, 2}, {4, 4}, {5, 3}, {2, 3, 3}, {4, 2, 2}, {8}, {1, 3, 4}};
  for (int rep = 0; rep < 5; ++rep)
    for (const auto& sizes : shapes) {
      auto [inst, truth] = testgraphs::disjoint_cliques(rng, sizes);
      auto labels = louvain(inst.graph);
      ++cliques;
      if (!testgraphs::same_partition(labels, truth)) o.fail("clique instance not recovered");
    }
  double secs = seconds_since(t0);
  if (secs >= 60.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail << graphs << " graphs, worst ratio " << worst << ", " << cliques << " clique instances";
  return o;
}

Outcome threshold_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 4 + t % 30;
    std::vector<ScoredLabel> xs;
    std::vector<oracle::Scored> ox;
    std::uniform_int_distribution<int> grid(0, 20);  // coarse scores force ties
    std::uniform_real_distribution<double> fine(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = t % 2 ? grid(rng) / 20.0 : fine(rng);
      bool gold = i < 2 ? i == 0 : fine(rng) < 0.3 + 0.4 * s;
      xs.push_back({s, gold});
      ox.push_back({s, gold});
    }
    auto th = select_threshold(xs);
    double best = oracle::best_balanced_accuracy(ox);
    double at_tau = oracle::balanced_accuracy(ox, th.tau);
    if (at_tau != best) {
      std::ostringstream m;
      m << "set " << t << ": tau " << th.tau << " gives " << at_tau << ", sweep max " << best;
      o.fail(m.str());
    }
    if (th.achieved_balanced_accuracy != best) o.fail("set " + std::to_string(t) + ": reported accuracy differs");
  }
  if (o.pass) o.detail << "50 score sets";
  return o;
}

Outcome metric_correctness() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double max_err = 0.0;
  auto check = [&](double got, double want, const std::string& what) {
    double err = std::abs(got - want);
    max_err = std::max(max_err, err);
    if (!(err <= 1e-9)) {
      std::ostringstream m;
      m << what << ": " << got << " vs " << want;
      o.fail(m.str());
    }
  };
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 5 + t % 40;
    // balanced accuracy
    std::vector<LabeledPair> pairs;
    std::vector<oracle::Scored> ox;
    for (std::size_t i = 0; i < n; ++i) {
      double s = u(rng);
      bool g = i == 0 ? true : (i == 1 ? false : u(rng) < 0.4);
      pairs.push_back({"q", "a" + std::to_string(i), "b" + std::to_string(i), g, s});
      ox.push_back({s, g});
    }
    double tau = u(rng);
    check(balanced_accuracy(pairs, tau), oracle::balanced_accuracy(ox, tau), "balanced accuracy #" + std::to_string(t));
    // pearson
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(u(rng) * 10 - 5);
      ys.push_back(0.3 * xs.back() + u(rng));
    }
    check(pearson(xs, ys), oracle::pearson(xs, ys), "pearson #" + std::to_string(t));
    // ari
    std::vector<int> a(n), b(n);
    int ka = 1 + t % 6, kb = 1 + (t / 6) % 6;
    for (auto& v : a) v = std::uniform_int_distribution<int>(0, ka - 1)(rng);
    for (auto& v : b) v = std::uniform_int_distribution<int>(0, kb - 1)(rng);
    check(adjusted_rand_index(grouping_from_labels(a), grouping_from_labels(b)), oracle::ari(a, b),
          "ari #" + std::to_string(t));
  }
  auto g1 = make_grouping("q", {{"a", "b"}, {"c", "d"}}, GroupingMethod::Annotated);
  auto g2 = make_grouping("q", {{"a", "c"}, {"b", "d"}}, GroupingMethod::Annotated);
  check(adjusted_rand_index(g1, g2), -0.5, "ari({ab}{cd}, {ac}{bd})");
  if (o.pass) o.detail << "150 comparisons, max error " << max_err;
  return o;
}

Outcome scorecard_arithmetic() {
  Outcome o;
  std::vector<CategorizedQuestion> qs;
  const std::pair<StartWord, int> rates[] = {{StartWord::How, 49}, {StartWord::Why, 64}, {StartWord::What, 65}, {StartWord::Who, 14}};
  for (auto [w, pct] : rates)
    for (int i = 0; i < 100; ++i) qs.push_back({"T5-Discord", "story-" + std::to_string(i % 4), w, i < pct ? Category::Discord : Category::Peripheral});
  auto card = discord_rate_report(qs);
  if (card.rows.size() != 1) {
    o.fail("expected one row");
    return o;
  }
  const auto& row = card.rows[0];
  for (auto [w, pct] : rates)
    if (row.cells.at(w).percent_discord != pct) o.fail(std::string(to_string(w)) + " column differs");
  if (row.average != 48.0) o.fail("average " + std::to_string(row.average));
  auto text = render_scorecard(card);
  if (text.find("48.0") == std::string::npos) o.fail("rendered table lacks 48.0");
  if (o.pass) o.detail << "Avg. " << row.average;
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  auto t0 = Clock::now();
  RunConfig config;
  auto providers = testdata::reference_providers(config);
  std::mt19937 rng(31337);
  int runs = 0;
  for (const auto& id : testdata::corpus_ids()) {
    auto golden = testdata::read(testdata::path("golden/analysis/" + id + ".json"));
    auto bundle = testdata::read_json("corpus/" + id + ".json");
    for (int run = 0; run < 3; ++run) {
      auto bytes = analysis_to_json(analyze_story(story_from_json(bundle), providers, config)).dump(2) + "\n";
      ++runs;
      if (bytes != golden) o.fail(id + ": run " + std::to_string(run + 1) + " differs from golden");
    }
    for (int perm = 0; perm < 3; ++perm) {
      auto shuffled = bundle;
      for (auto key : {"articles", "sources", "distractors"}) {
        if (!shuffled.contains(key)) continue;
        std::vector<json> v(shuffled[key].begin(), shuffled[key].end());
        std::shuffle(v.begin(), v.end(), rng);
        shuffled[key] = v;
      }
      auto bytes = analysis_to_json(analyze_story(story_from_json(shuffled), providers, config)).dump(2) + "\n";
      ++runs;
      if (bytes != golden) o.fail(id + ": permutation " + std::to_string(perm + 1) + " differs from golden");
    }
  }
  double secs = seconds_since(t0);
  if (secs >= 30.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail << runs << " runs over 3 stories in " << secs << " s";
  return o;
}

struct ApiStep {
  std::string method, path;
  bool wait_before = false;
};

struct ApiCase {
  std::string name;
  bool with_store;
  std::vector<ApiStep> steps;
};

std::vector<ApiCase> api_cases() {
  std::vector<ApiCase> cases{
      {"list_stories", true, {{"GET", "/stories"}}},
      {"health", true, {{"GET", "/healthz"}}},
      {"analyze_existing", true, {{"POST", "/stories/harbor-bridge/analyze"}}},
      {"analyze_unknown", true, {{"POST", "/stories/atlantis/analyze"}}},
      {"analysis_unknown", true, {{"GET", "/stories/atlantis/analysis"}}},
      {"analyze_on_demand",
       false,
       {{"GET", "/stories"},
        {"GET", "/stories/orchard-frost/analysis"},
        {"POST", "/stories/orchard-frost/analyze"},
        {"GET", "/stories/orchard-frost/analysis", true},
        {"POST", "/stories/orchard-frost/analyze"},
        {"GET", "/stories"}}}};
  for (const auto& id : testdata::corpus_ids()) cases.push_back({"analysis_" + id, true, {{"GET", "/stories/" + id + "/analysis"}}});
  return cases;
}

Outcome api_contract() {
  Outcome o;
  int steps = 0;
  for (const auto& c : api_cases()) {
    testdata::ApiFixture api(c.with_store);
    int port = api.service->start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);
    json transcript = json::array();
    for (const auto& s : c.steps) {
      if (s.wait_before) api.service->wait_idle();
      auto res = s.method == "GET" ? cli.Get(s.path) : cli.Post(s.path, "", "application/json");
      if (!res) {
        o.fail(c.name + ": no response for " + s.method + " " + s.path);
        break;
      }
      transcript.push_back({{"request", {{"method", s.method}, {"path", s.path}}},
                            {"response", {{"status", res->status}, {"body", json::parse(res->body)}}}});
      ++steps;
    }
    api.service->wait_idle();
    api.service->stop();
    auto actual = transcript.dump(2) + "\n";
    auto expected = testdata::golden("golden/api/" + c.name + ".json", actual);
    if (actual != expected) o.fail(c.name + " differs from golden");
  }
  if (o.pass) o.detail << steps << " request/response pairs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pair_expansion", pair_expansion},
      {"categorization_boundary", categorization_boundary},
      {"louvain_oracle", louvain_oracle},
      {"threshold_oracle", threshold_oracle},
      {"metric_correctness", metric_correctness},
      {"scorecard_arithmetic", scorecard_arithmetic},
      {"end_to_end_determinism", end_to_end_determinism},
      {"api_contract", api_contract},
  };
  std::string only = argc > 1 ? argv[1] : "";
  bool all_pass = true, ran = false;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    ran = true;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!ran) {
    std::cerr << "unknown criterion " << only << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
