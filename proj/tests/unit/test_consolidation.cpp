#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "discordq/consolidation.hpp"
#include "discordq/errors.hpp"
#include "discordq/evalharness.hpp"
#include "support/oracles.hpp"
#include "support/test_data.hpp"

using namespace discordq;

namespace {

Answer answer(std::string id, std::string text) {
  Answer a;
  a.id = std::move(id);
  a.question_id = "q";
  a.source_id = "s-" + a.id;
  a.article_id = a.id;
  a.text = std::move(text);
  a.char_end = a.text.size();
  a.confidence = 1.0;
  return a;
}

// Returns fixed scores by ordered answer-text pair.
class TableScorer final : public PairScorer {
 public:
  std::map<std::pair<std::string, std::string>, PairScore> table;
  std::set<std::pair<std::string, std::string>> failing;
  PairScore score(std::string_view, std::string_view a, std::string_view b) override {
    std::pair key{std::string(a), std::string(b)};
    if (failing.contains(key)) throw ProviderUnavailable("down");
    auto it = table.find(key);
    return it == table.end() ? PairScore{0.0, Scale::Unit} : it->second;
  }
  std::string id() const override { return "table"; }
};

SimilarityMatrix matrix(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& s) {
  SimilarityMatrix m("q", ids);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) m.set(i, j, s[i][j]);
  return m;
}

std::vector<std::vector<std::string>> members(const Grouping& g) {
  std::vector<std::vector<std::string>> out;
  for (const auto& grp : g.groups) out.push_back(grp.member_ids);
  return out;
}

bool covers_exactly(const Grouping& g, std::vector<std::string> ids) {
  std::vector<std::string> seen;
  for (const auto& grp : g.groups) {
    if (grp.member_ids.empty()) return false;
    if (std::find(grp.member_ids.begin(), grp.member_ids.end(), grp.representative_id) == grp.member_ids.end())
      return false;
    seen.insert(seen.end(), grp.member_ids.begin(), grp.member_ids.end());
  }
  std::sort(seen.begin(), seen.end());
  std::sort(ids.begin(), ids.end());
  return seen == ids;
}

}  // namespace

TEST_SUITE("consolidation") {
  TEST_CASE("matrix for one answer") {
    TokenF1Scorer s;
    std::vector<Answer> as{answer("a", "x")};
    auto m = build_similarity_matrix("q", as, s).matrix;
    REQUIRE(m.size() == 1);
    CHECK(m.at(0, 0) == 1.0);
    CHECK_THROWS_AS(build_similarity_matrix("q", std::vector<Answer>{}, s), InputError);
  }

  TEST_CASE("two identical and one disjoint") {
    TokenF1Scorer s;
    std::vector<Answer> as{answer("a", "red car"), answer("b", "red car"), answer("c", "blue sky")};
    auto m = build_similarity_matrix("q", as, s).matrix;
    CHECK(m.at(0, 1) == 1.0);
    CHECK(m.at(0, 2) == 0.0);
    CHECK(m.at(1, 2) == 0.0);
    CHECK(m.at(2, 1) == 0.0);
  }

  TEST_CASE("asymmetric scores are averaged, scales adapted") {
    TableScorer s;
    s.table[{"x", "y"}] = {0.4, Scale::Unit};
    s.table[{"y", "x"}] = {0.6, Scale::Unit};
    s.table[{"x", "z"}] = {5.0, Scale::Mocha};
    s.table[{"z", "x"}] = {3.0, Scale::Mocha};
    std::vector<Answer> as{answer("a", "x"), answer("b", "y"), answer("c", "z")};
    auto m = build_similarity_matrix("q", as, s, 2).matrix;
    CHECK(m.at(0, 1) == doctest::Approx(0.5));
    CHECK(m.at(1, 0) == doctest::Approx(0.5));
    CHECK(m.at(0, 2) == doctest::Approx(0.75));
  }

  TEST_CASE("failed pairs are imputed as zero and reported") {
    TableScorer s;
    s.table[{"x", "y"}] = {0.9, Scale::Unit};
    s.table[{"y", "x"}] = {0.9, Scale::Unit};
    s.failing.insert({"x", "y"});
    std::vector<Answer> as{answer("a", "x"), answer("b", "y")};
    auto built = build_similarity_matrix("q", as, s);
    CHECK(built.matrix.at(0, 1) == 0.0);
    CHECK(built.warnings.size() == 1);
  }

  TEST_CASE("matrix rejects out-of-range values") {
    SimilarityMatrix m("q", {"a", "b"});
    CHECK_THROWS(m.set(0, 1, 1.5));
    CHECK_THROWS(m.set(0, 1, -0.1));
  }

  TEST_CASE("two 3-cliques joined by one edge") {
    std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
    std::vector<std::vector<double>> s(6, std::vector<double>(6, 0.0));
    auto link = [&](int i, int j) { s[i][j] = s[j][i] = 0.9; };
    link(0, 1), link(0, 2), link(1, 2), link(3, 4), link(3, 5), link(4, 5), link(2, 3);
    auto g = louvain_cluster(matrix(ids, s), 0.5);
    CHECK(members(g) == std::vector<std::vector<std::string>>{{"a", "b", "c"}, {"d", "e", "f"}});
    CHECK(g.method == GroupingMethod::Louvain);
  }

  TEST_CASE("all below tau gives singletons") {
    std::vector<std::string> ids{"c", "a", "b"};
    std::vector<std::vector<double>> s(3, std::vector<double>(3, 0.49));
    auto g = louvain_cluster(matrix(ids, s), 0.5);
    CHECK(members(g) == std::vector<std::vector<std::string>>{{"a"}, {"b"}, {"c"}});
  }

  TEST_CASE("edge exactly at tau is kept") {
    std::vector<std::string> ids{"a", "b"};
    std::vector<std::vector<double>> s(2, std::vector<double>(2, 0.5));
    CHECK(louvain_cluster(matrix(ids, s), 0.5).groups.size() == 1);
  }

  TEST_CASE("raising tau never merges components") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::string> ids;
      for (int i = 0; i < 8; ++i) ids.push_back("a" + std::to_string(i));
      std::vector<std::vector<double>> s(8, std::vector<double>(8, 0.0));
      for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) s[i][j] = s[j][i] = u(rng);
      auto m = matrix(ids, s);
      // connected components at tau, by union-find
      auto components = [&](double tau) {
        std::vector<int> p(8);
        std::iota(p.begin(), p.end(), 0);
        std::function<int(int)> find = [&](int x) { return p[x] == x ? x : p[x] = find(p[x]); };
        for (int i = 0; i < 8; ++i)
          for (int j = i + 1; j < 8; ++j)
            if (s[i][j] >= tau) p[find(i)] = find(j);
        std::vector<int> c(8);
        for (int i = 0; i < 8; ++i) c[i] = find(i);
        return c;
      };
      auto lo = components(0.4), hi = components(0.7);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          if (hi[i] == hi[j]) CHECK(lo[i] == lo[j]);
      // and the clustering never joins answers from different components
      auto g = louvain_cluster(m, 0.7);
      auto assign = g.assignment();
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          if (assign[ids[i]] == assign[ids[j]]) CHECK(hi[i] == hi[j]);
    }
  }

  TEST_CASE("representatives") {
    std::vector<std::string> ids{"a", "b", "c"};
    std::vector<std::vector<double>> s(3, std::vector<double>(3, 0.0));
    s[0][1] = s[1][0] = 0.9;
    s[0][2] = s[2][0] = 0.9;
    s[1][2] = s[2][1] = 0.2;
    auto m = matrix(ids, s);
    std::map<std::string, std::string> texts{{"a", "x"}, {"b", "xx"}, {"c", "xxx"}};
    CHECK(select_representative({{"a", "b", "c"}, "", {}}, m, texts) == "a");
    CHECK(select_representative({{"b"}, "", {}}, m, texts) == "b");

    std::vector<std::vector<double>> tri(3, std::vector<double>(3, 0.6));
    auto mt = matrix(ids, tri);
    CHECK(select_representative({{"a", "b", "c"}, "", {}}, mt, texts) == "c");
    std::map<std::string, std::string> same{{"a", "xy"}, {"b", "xy"}, {"c", "x"}};
    CHECK(select_representative({{"a", "b", "c"}, "", {}}, mt, same) == "a");
    // code points, not bytes
    std::map<std::string, std::string> uni{{"a", "\xc3\xa9\xc3\xa9"}, {"b", "abc"}, {"c", "x"}};
    CHECK(select_representative({{"a", "b", "c"}, "", {}}, mt, uni) == "b");
  }

  TEST_CASE("consolidate: empty, ordering, permutation stability") {
    TokenF1Scorer s;
    auto empty = consolidate("q", "Why?", std::vector<Answer>{}, s);
    CHECK(empty.grouping.groups.empty());

    std::vector<Answer> as{answer("a1", "the bridge cables were cracked"), answer("a2", "cracked bridge cables"),
                           answer("a3", "a vote on light rail"), answer("a4", "forcing a vote on light rail"),
                           answer("a5", "budget cuts before the election"), answer("a6", "the bridge cables cracked")};
    auto ref = consolidate("q", "Why?", as, s);
    CHECK(covers_exactly(ref.grouping, {"a1", "a2", "a3", "a4", "a5", "a6"}));
    std::mt19937 rng(1);
    for (int i = 0; i < 20; ++i) {
      std::shuffle(as.begin(), as.end(), rng);
      CHECK(consolidate("q", "Why?", as, s).grouping == ref.grouping);
    }
    // groups by size desc then smallest id
    for (std::size_t i = 1; i < ref.grouping.groups.size(); ++i) {
      const auto& p = ref.grouping.groups[i - 1].member_ids;
      const auto& c = ref.grouping.groups[i].member_ids;
      CHECK((p.size() > c.size() || (p.size() == c.size() && p.front() < c.front())));
    }
    auto dup = as;
    dup.push_back(as.front());
    CHECK_THROWS_AS(consolidate("q", "Why?", dup, s), ValidationError);
  }

  TEST_CASE("consolidate a 29-answer question") {
    auto qs = nanco_from_json(testdata::read_json("nanco_shaped.json"));
    REQUIRE(qs.front().answers.size() == 29);
    std::vector<Answer> as;
    std::vector<std::string> ids;
    for (const auto& a : qs.front().answers) {
      as.push_back(answer(a.id, a.text));
      ids.push_back(a.id);
    }
    TokenF1Scorer s;
    auto c = consolidate(qs.front().id, qs.front().text, as, s, {.tau = 0.3});
    CHECK(covers_exactly(c.grouping, ids));
  }

  TEST_CASE("threshold selection") {
    std::vector<ScoredLabel> sep{{0.8, true}, {0.9, true}, {0.1, false}, {0.2, false}};
    auto t = select_threshold(sep, "val");
    CHECK(t.tau == doctest::Approx(0.5));
    CHECK(t.achieved_balanced_accuracy == 1.0);
    CHECK(t.tuned_on == "val");

    std::vector<ScoredLabel> flat{{0.4, true}, {0.4, false}, {0.4, true}};
    auto f = select_threshold(flat);
    CHECK(f.tau == 0.4);
    CHECK(f.achieved_balanced_accuracy == 0.5);

    std::vector<ScoredLabel> one{{0.4, true}, {0.5, true}};
    CHECK_THROWS_AS(select_threshold(one), OneClassOnly);
  }

  TEST_CASE("interleaved threshold fixture matches the sweep oracle") {
    std::vector<ScoredLabel> xs{{0.05, false}, {0.15, true}, {0.22, false}, {0.31, false}, {0.40, true},
                                {0.47, false}, {0.55, true}, {0.61, true}, {0.74, false}, {0.90, true}};
    std::vector<oracle::Scored> ox;
    for (auto x : xs) ox.push_back({x.score, x.gold});
    auto t = select_threshold(xs);
    CHECK(oracle::balanced_accuracy(ox, t.tau) == oracle::best_balanced_accuracy(ox));
    CHECK(t.achieved_balanced_accuracy == doctest::Approx(oracle::best_balanced_accuracy(ox)));
  }

  TEST_CASE("aggregation: unanimity and majority") {
    Annotation a1{"x", {{"a", 0}, {"b", 0}, {"c", 1}}};
    std::vector<Annotation> same{a1, {"y", a1.labels}, {"z", a1.labels}};
    auto g = aggregate_annotations("q", same);
    CHECK(members(g) == std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}});
    CHECK(g.method == GroupingMethod::Aggregated);

    std::vector<Annotation> maj{a1, {"y", {{"a", 5}, {"b", 5}, {"c", 5}}}, {"z", {{"a", 0}, {"b", 1}, {"c", 2}}}};
    auto m = aggregate_annotations("q", maj);
    CHECK(m.assignment().at("a") == m.assignment().at("b"));
    CHECK(m.assignment().at("a") != m.assignment().at("c"));
  }

  TEST_CASE("aggregation with an invalid mark") {
    // x marked invalid by one annotator; the other two keep x with y
    std::vector<Annotation> anns{{"p", {{"x", kInvalidAnswer}, {"y", 0}, {"z", 1}}},
                                 {"q", {{"x", 0}, {"y", 0}, {"z", 1}}},
                                 {"r", {{"x", 0}, {"y", 0}, {"z", 0}}}};
    auto g = aggregate_annotations("q1", anns);
    auto as = g.assignment();
    CHECK(as.at("x") == as.at("y"));
    CHECK(as.at("y") != as.at("z"));

    // x invalid for two of three: the one remaining rater is a strict majority
    std::vector<Annotation> anns2{{"p", {{"x", kInvalidAnswer}, {"y", 0}}},
                                  {"q", {{"x", kInvalidAnswer}, {"y", 0}}},
                                  {"r", {{"x", 0}, {"y", 0}}}};
    auto g2 = aggregate_annotations("q2", anns2);
    CHECK(g2.groups.size() == 1);

    std::vector<Annotation> all_invalid{{"p", {{"x", kInvalidAnswer}, {"y", 0}}},
                                        {"q", {{"x", kInvalidAnswer}, {"y", 0}}}};
    auto g3 = aggregate_annotations("q3", all_invalid);
    CHECK(members(g3) == std::vector<std::vector<std::string>>{{"x"}, {"y"}});
  }

  TEST_CASE("aggregation errors") {
    std::vector<Annotation> mismatch{{"p", {{"x", 0}}}, {"q", {{"y", 0}}}};
    CHECK_THROWS_AS(aggregate_annotations("q", mismatch), MismatchedAnswerSets);
    std::vector<Annotation> lone{{"p", {{"x", 0}}}};
    CHECK_THROWS_AS(aggregate_annotations("q", lone), InputError);
  }

  TEST_CASE("annotation as grouping") {
    Annotation a{"p", {{"x", kInvalidAnswer}, {"y", 3}, {"z", 3}, {"w", kInvalidAnswer}}};
    auto g = annotation_to_grouping("q", a);
    CHECK(members(g) == std::vector<std::vector<std::string>>{{"y", "z"}, {"w"}, {"x"}});
    CHECK(g.method == GroupingMethod::Annotated);
  }

  TEST_CASE("grouping json round trip") {
    auto g = make_grouping("q", {{"b", "a"}, {"c"}}, GroupingMethod::Annotated);
    g.groups[0].label = "cables";
    CHECK(grouping_from_json(grouping_to_json(g)) == g);
    CHECK_THROWS_AS(make_grouping("q", {{"a"}, {"a"}}, GroupingMethod::Louvain), ValidationError);
  }
}
