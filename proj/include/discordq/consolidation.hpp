#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/louvain.hpp"
#include "discordq/providers.hpp"

namespace discordq {

// Symmetric unit-scale similarities between the answers of one question,
// indexed in answer_ids order. The diagonal is 1.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::string question_id, std::vector<std::string> answer_ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& answer_ids() const { return ids_; }
  const std::string& question_id() const { return question_id_; }
  double at(std::size_t i, std::size_t j) const { return scores_[i * ids_.size() + j]; }
  /// Sets both (i, j) and (j, i); value must lie in [0, 1].
  void set(std::size_t i, std::size_t j, double value);
  std::optional<std::size_t> index_of(std::string_view answer_id) const;

  bool operator==(const SimilarityMatrix&) const = default;

 private:
  std::string question_id_;
  std::vector<std::string> ids_;
  std::vector<double> scores_;
};

enum class GroupingMethod { Louvain, Annotated, Aggregated };
std::string_view to_string(GroupingMethod m);
GroupingMethod parse_grouping_method(std::string_view s);

struct AnswerGroup {
  std::vector<std::string> member_ids;  // sorted
  std::string representative_id;
  std::optional<std::string> label;

  bool operator==(const AnswerGroup&) const = default;
};

// Partition of a question's answer ids. Groups are ordered by size
// (descending), then by smallest member id.
struct Grouping {
  std::string question_id;
  std::vector<AnswerGroup> groups;
  GroupingMethod method = GroupingMethod::Louvain;

  std::size_t answer_count() const;
  std::size_t largest_group_size() const;
  /// Group index of every answer id.
  std::map<std::string, std::size_t> assignment() const;

  bool operator==(const Grouping&) const = default;
};

/// Builds a Grouping from groups of ids: sorts members and groups, drops
/// empty groups, and defaults each representative to the first member.
/// Throws ValidationError if an id appears twice.
Grouping make_grouping(std::string question_id, std::vector<std::vector<std::string>> groups,
                       GroupingMethod method);

struct Threshold {
  double tau = 0.5;
  std::string tuned_on;
  double achieved_balanced_accuracy = 0.0;
};

struct ConsolidationOptions {
  double tau = 0.5;
  double resolution = 1.0;
  bool weighted = true;  // false: every kept edge has weight 1
  std::size_t workers = 1;  // concurrent pair scoring
};

struct MatrixBuild {
  SimilarityMatrix matrix;
  std::vector<std::string> warnings;  // one per pair whose scoring failed
};

/// entry(i, j) = mean of score(q, ai, aj) and score(q, aj, ai), each mapped
/// to unit scale. A pair whose scoring throws ProviderUnavailable is set
/// to 0 and reported. Throws InputError for an empty answer list.
MatrixBuild build_similarity_matrix(std::string_view question, std::span<const Answer> answers,
                                    PairScorer& scorer, std::size_t workers = 1);

/// Threshold graph (edge iff score >= tau) clustered with Louvain. Every
/// representative defaults to the first member; see consolidate().
Grouping louvain_cluster(const SimilarityMatrix& m, double tau,
                         const ConsolidationOptions& opts = {});

/// Group medoid: the member with the highest mean similarity to the other
/// members. Ties go to the longest answer text, then the smallest id.
std::string select_representative(const AnswerGroup& group, const SimilarityMatrix& m,
                                  const std::map<std::string, std::string>& texts);

struct Consolidation {
  Grouping grouping;
  SimilarityMatrix matrix;
  std::vector<std::string> warnings;
};

/// Sorts answers by id, builds the matrix, clusters, attaches
/// representatives. An empty answer list yields an empty Grouping.
Consolidation consolidate(std::string_view question_id, std::string_view question,
                          std::span<const Answer> answers, PairScorer& scorer,
                          const ConsolidationOptions& opts = {});

struct ScoredLabel {
  double score = 0.0;
  bool gold = false;
};

/// Exhaustive sweep over midpoints of consecutive distinct scores; the
/// midpoint with the best balanced accuracy (prediction: score >= tau)
/// wins, ties to the smallest. With a single distinct score, tau is that
/// score. Throws OneClassOnly.
Threshold select_threshold(std::span<const ScoredLabel> pairs, std::string tuned_on = {});

// One annotator's cluster label per answer id; -1 marks an invalid answer.
struct Annotation {
  std::string annotator;
  std::map<std::string, int> labels;
};

inline constexpr int kInvalidAnswer = -1;

/// Edge (i, j) iff strictly more than half of the annotators who marked
/// both i and j valid put them in the same cluster; Louvain on the
/// resulting unweighted graph. Answers invalid for everyone end up as
/// singletons. Throws MismatchedAnswerSets, InputError (< 2 annotators).
Grouping aggregate_annotations(std::string question_id, std::span<const Annotation> annotations,
                               double resolution = 1.0);

/// An annotator's labels as a Grouping; each invalid answer becomes its own
/// singleton.
Grouping annotation_to_grouping(std::string question_id, const Annotation& a);

nlohmann::json grouping_to_json(const Grouping& g);
Grouping grouping_from_json(const nlohmann::json& j);

}  // namespace discordq
