#include <doctest.h>

#include <random>

#include "discordq/errors.hpp"
#include "discordq/evalharness.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"
#include "support/test_data.hpp"

using namespace discordq;

namespace {

Grouping grouping_of(const std::vector<int>& labels, const std::string& prefix = "a") {
  std::map<int, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(prefix + std::to_string(100 + i));
  std::vector<std::vector<std::string>> v;
  for (auto& [_, m] : groups) v.push_back(m);
  return make_grouping("q", v, GroupingMethod::Annotated);
}

std::vector<LabeledPair> scored(const std::vector<double>& scores, const std::vector<bool>& gold) {
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    out.push_back({"q", "a" + std::to_string(i), "b" + std::to_string(i), gold[i], scores[i]});
  return out;
}

}  // namespace

TEST_SUITE("evalharness") {
  TEST_CASE("pair expansion") {
    for (std::size_t n : {0u, 1u, 2u, 29u, 39u}) {
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 5);
      auto pairs = pairs_from_grouping(grouping_of(labels));
      CHECK(pairs.size() == n * (n - (n > 0)) / 2);
      for (const auto& p : pairs) CHECK(p.answer_a < p.answer_b);
    }
    auto pairs = pairs_from_grouping(grouping_of({0, 0, 1}));
    std::size_t pos = 0;
    for (const auto& p : pairs) pos += p.gold;
    CHECK(pos == 1);
  }

  TEST_CASE("balanced accuracy examples") {
    CHECK(balanced_accuracy(scored({1, 1, 0, 0}, {true, true, false, false}), 0.5) == 1.0);
    CHECK(balanced_accuracy(scored({1, 1, 1, 1}, {true, true, false, false}), 0.5) == 0.5);
    CHECK(balanced_accuracy(scored({1, 1, 1, 0}, {true, true, false, false}), 0.5) == 0.75);
    CHECK_THROWS_AS(balanced_accuracy(scored({1, 0}, {true, true}), 0.5), OneClassOnly);
    // ties count as positive unless flipped
    CHECK(balanced_accuracy(scored({0.5, 0.2}, {true, false}), 0.5) == 1.0);
    CHECK(balanced_accuracy(scored({0.5, 0.2}, {true, false}), 0.5, false) == 0.5);
  }

  TEST_CASE("balanced accuracy symmetry under class and score inversion") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> s;
      std::vector<bool> g;
      for (int i = 0; i < 15; ++i) {
        s.push_back(u(rng));
        g.push_back(i % 3 == 0);
      }
      double tau = u(rng);
      std::vector<double> inv;
      std::vector<bool> flipped;
      for (std::size_t i = 0; i < s.size(); ++i) {
        inv.push_back(-s[i]);
        flipped.push_back(!g[i]);
      }
      // score >= tau positive  <=>  -score > -tau negative
      CHECK(balanced_accuracy(scored(s, g), tau) ==
            doctest::Approx(balanced_accuracy(scored(inv, flipped), -tau, false)));
    }
  }

  TEST_CASE("pearson") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0));
    std::vector<double> a{0.12, 0.55, 0.31, 0.98, 0.44, 0.67, 0.05, 0.73, 0.29, 0.81};
    std::vector<double> b{1.5, 3.2, 2.1, 4.9, 2.2, 3.8, 1.1, 4.1, 2.9, 4.0};
    CHECK(pearson(a, b) == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-12));
    std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(pearson(x, flat), ZeroVariance);
    std::vector<double> one{1};
    CHECK_THROWS_AS(pearson(one, one), InputError);
    CHECK_THROWS_AS(pearson(x, a), InputError);
  }

  TEST_CASE("ari") {
    auto g1 = make_grouping("q", {{"a", "b"}, {"c", "d"}}, GroupingMethod::Annotated);
    auto g2 = make_grouping("q", {{"a", "c"}, {"b", "d"}}, GroupingMethod::Annotated);
    CHECK(adjusted_rand_index(g1, g2) == doctest::Approx(-0.5));
    CHECK(adjusted_rand_index(g1, g1) == 1.0);
    auto singles = make_grouping("q", {{"a"}, {"b"}, {"c"}, {"d"}}, GroupingMethod::Annotated);
    CHECK(adjusted_rand_index(singles, singles) == 1.0);
    auto g3 = make_grouping("q", {{"a", "b"}, {"c"}}, GroupingMethod::Annotated);
    CHECK_THROWS_AS(adjusted_rand_index(g1, g3), MismatchedAnswerSets);
  }

  TEST_CASE("ari against the pair-counting oracle, symmetric") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 50; ++t) {
      std::size_t n = 2 + t % 12;
      std::vector<int> x(n), y(n);
      for (auto& v : x) v = std::uniform_int_distribution<int>(0, 3)(rng);
      for (auto& v : y) v = std::uniform_int_distribution<int>(0, 3)(rng);
      auto gx = grouping_of(x), gy = grouping_of(y);
      CHECK(adjusted_rand_index(gx, gy) == doctest::Approx(oracle::ari(x, y)).epsilon(1e-9));
      CHECK(adjusted_rand_index(gx, gy) == doctest::Approx(adjusted_rand_index(gy, gx)).epsilon(1e-12));
    }
  }

  TEST_CASE("ari of structure against random relabelings is near zero") {
    std::mt19937_64 rng(4);
    std::vector<int> structured;
    for (int c = 0; c < 5; ++c)
      for (int k = 0; k < 8; ++k) structured.push_back(c);
    auto g = grouping_of(structured);
    double total = 0;
    for (int t = 0; t < 100; ++t) {
      auto perm = structured;
      std::shuffle(perm.begin(), perm.end(), rng);
      total += adjusted_rand_index(g, grouping_of(perm));
    }
    CHECK(std::abs(total / 100) < 0.1);
  }

  TEST_CASE("leave-one-out agreement") {
    Annotation a{"x", {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}}};
    std::vector<Annotation> three{a, {"y", a.labels}, {"z", a.labels}};
    auto r = agreement_leave_one_out("q", three);
    CHECK(r.mean == 1.0);
    REQUIRE(r.per_annotator.size() == 3);
    for (auto& [_, v] : r.per_annotator) CHECK(v == 1.0);
    std::vector<Annotation> two{a, {"y", a.labels}};
    CHECK_THROWS_AS(agreement_leave_one_out("q", two), InputError);
  }

  TEST_CASE("per-question agreement on the annotated fixture") {
    // With two remaining annotators and no invalid marks, the aggregate is the
    // intersection of their partitions; Louvain recovers those cliques.
    auto qs = nanco_from_json(testdata::read_json("nanco_shaped.json"));
    REQUIRE(qs.size() == 8);
    for (const auto& q : qs) {
      auto r = agreement_leave_one_out(q.id, q.annotations);
      std::vector<std::string> ids;
      for (const auto& a : q.answers) ids.push_back(a.id);
      std::sort(ids.begin(), ids.end());
      double sum = 0;
      for (std::size_t k = 0; k < q.annotations.size(); ++k) {
        std::vector<int> held(ids.size()), inter(ids.size());
        std::map<std::pair<int, int>, int> cell;
        std::vector<const Annotation*> rest;
        for (std::size_t j = 0; j < q.annotations.size(); ++j)
          if (j != k) rest.push_back(&q.annotations[j]);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          held[i] = q.annotations[k].labels.at(ids[i]);
          auto key = std::pair(rest[0]->labels.at(ids[i]), rest[1]->labels.at(ids[i]));
          inter[i] = cell.emplace(key, static_cast<int>(cell.size())).first->second;
        }
        double expect = oracle::ari(held, inter);
        CHECK(r.per_annotator[k].first == q.annotations[k].annotator);
        CHECK(r.per_annotator[k].second == doctest::Approx(expect).epsilon(1e-9));
        sum += expect;
      }
      CHECK(r.mean == doctest::Approx(sum / 3).epsilon(1e-9));
    }
    // the noiseless question agrees perfectly
    CHECK(agreement_leave_one_out(qs[1].id, qs[1].annotations).mean == 1.0);
  }

  TEST_CASE("scorecard") {
    std::vector<CategorizedQuestion> qs;
    auto add = [&](std::string sys, StartWord w, int discord, int total) {
      for (int i = 0; i < total; ++i)
        qs.push_back({sys, "story" + std::to_string(i % 2), w, i < discord ? Category::Discord : Category::Vague});
    };
    add("T5", StartWord::How, 49, 100);
    add("T5", StartWord::Why, 64, 100);
    add("T5", StartWord::What, 65, 100);
    add("T5", StartWord::Who, 14, 100);
    add("all", StartWord::How, 4, 4);
    add("all", StartWord::Why, 4, 4);
    add("all", StartWord::What, 4, 4);
    add("all", StartWord::Who, 4, 4);
    auto card = discord_rate_report(qs);
    REQUIRE(card.rows.size() == 2);
    CHECK(card.rows[0].system == "T5");
    CHECK(card.rows[0].average == 48.0);
    CHECK(card.rows[1].average == 100.0);
    CHECK(card.rows[0].n_stories == 2);
    CHECK(card.missing.empty());
    const auto& cell = card.rows[0].cells.at(StartWord::Why);
    CHECK(cell.percent_discord == 64.0);
    std::size_t sum = 0;
    for (auto& [_, n] : cell.counts) sum += n;
    CHECK(sum == cell.n_questions);
    auto text = render_scorecard(card);
    CHECK(text.find("48.0") != std::string::npos);
    CHECK(text.find("How") < text.find("Why"));
    CHECK(scorecard_to_json(card)["rows"][0]["average"] == 48.0);
  }

  TEST_CASE("scorecard keeps full precision and reports missing cells") {
    std::vector<CategorizedQuestion> qs;
    auto add = [&](std::string story, StartWord w, int discord, int total) {
      for (int i = 0; i < total; ++i) qs.push_back({"Human", story, w, i < discord ? Category::Discord : Category::Consensus});
    };
    add("s1", StartWord::How, 73, 100);
    add("s1", StartWord::Why, 87, 100);
    add("s1", StartWord::What, 66, 100);
    add("s1", StartWord::Who, 27, 100);
    add("s2", StartWord::How, 0, 0);
    add("s2", StartWord::Why, 1, 1);
    auto card = discord_rate_report(qs);
    // s2 contributes to How only via missing; percentages per column
    CHECK(card.missing.size() == 3);
    auto only_s1 = qs;
    std::erase_if(only_s1, [](const CategorizedQuestion& q) { return q.story_id == "s2"; });
    auto c1 = discord_rate_report(only_s1);
    CHECK(c1.rows[0].average == doctest::Approx(63.25));
  }

  TEST_CASE("scored pairs file") {
    auto j = nlohmann::json::parse(R"({"scale": "mocha", "pairs": [
      {"question_id": "q", "answer_a": "b", "answer_b": "a", "score": 5, "gold": true, "target": 0.9},
      {"question_id": "q", "answer_a": "a", "answer_b": "c", "score": 1}]})");
    auto f = scored_pairs_from_json(j);
    REQUIRE(f.rows.size() == 2);
    CHECK(f.rows[0].pair.answer_a == "a");
    CHECK(*f.rows[0].pair.score == 1.0);
    CHECK(*f.rows[1].pair.score == 0.0);
    CHECK(f.rows[0].has_gold);
    CHECK_FALSE(f.rows[1].has_gold);
  }
}
