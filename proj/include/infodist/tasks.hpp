#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "infodist/codelen.hpp"
#include "infodist/distance.hpp"
#include "infodist/entropy_model.hpp"

namespace infodist {

// --- records and loaders ----------------------------------------------------

struct StsRecord {
  std::string sentence_a;
  std::string sentence_b;
  double gold = 0.0;  // in [0, 5]
};

struct ClassifyRecord {
  std::string text;
  int label = 0;
};

/// Records plus the exemplars (one-shot) or label descriptions (zero-shot)
/// they are compared against. All records share the exemplar classes.
struct ClassifyDataset {
  std::map<int, std::vector<std::string>> exemplars;
  std::vector<ClassifyRecord> records;
};

struct RerankCandidate {
  std::string docid;
  std::string text;
  double bm25 = 0.0;
};

struct RerankRecord {
  std::string qid;
  std::string query;
  std::vector<RerankCandidate> candidates;
  std::map<std::string, int> qrels;  // docid -> graded relevance
};

/// Throws InvalidArgument on a record breaking its invariants.
void validate(const StsRecord& r);
void validate(const ClassifyDataset& d);
void validate(const RerankRecord& r);

// JSONL loaders. Malformed lines throw ParseError naming the line.
std::vector<StsRecord> load_sts(std::string_view jsonl);
ClassifyDataset load_classify(std::string_view records_jsonl, std::string_view exemplars_jsonl);
/// Candidates keep file order within each query; queries keep file order.
std::vector<RerankRecord> load_rerank(std::string_view queries_jsonl,
                                      std::string_view candidates_jsonl,
                                      std::string_view qrels_tsv);

// --- pure scoring -----------------------------------------------------------

/// Average ranks, 1-based; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rho as the Pearson correlation of average ranks. Throws
/// UndefinedCorrelation if either side is constant, InvalidArgument on
/// fewer than two points or mismatched sizes.
double spearman(std::span<const double> a, std::span<const double> b);

/// Index of the smallest value, ties to the smaller index.
std::size_t argmin_index(std::span<const double> values);

/// sum over the first k of rel_i / log2(i + 1), i 1-based.
double dcg_at_k(std::span<const int> relevances, std::size_t k);

/// DCG of `ranked` over DCG of `ideal` sorted descending. Returns nullopt
/// when the ideal DCG is zero (nothing relevant).
std::optional<double> ndcg_at_k(std::span<const int> ranked, std::span<const int> ideal,
                                std::size_t k);

struct RpredPoint {
  double ratio = 0.0;
  bool correct = false;
};

struct RpredBucket {
  double mean_ratio = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Distance to the predicted class over the mean distance across classes.
/// A record whose class distances are all zero gets ratio 1.
double rpred_ratio(std::span<const double> class_distances);

/// Sorts points ascending by ratio (stable) and splits them into `groups`
/// contiguous buckets whose sizes differ by at most one. Throws
/// GroupingError when there are fewer points than groups.
std::vector<RpredBucket> rpred_buckets(std::vector<RpredPoint> points, std::size_t groups);

// --- model-driven evaluation ------------------------------------------------

enum class Shot { Zero, One };
std::string_view to_string(Shot s) noexcept;
Shot parse_shot(std::string_view s);

struct EvalOptions {
  Metric metric = Metric::Mean;
  Variant variant = Variant::LogProb;
  JointMode mode = JointMode::Conditional;
  Tokens separator;
  bool symmetrize_joint = true;
  unsigned jobs = 1;

  // Classification.
  Shot shot = Shot::One;
  /// Compare text as x and exemplar as y instead of the default direction.
  bool swap_xy = false;
  /// Several exemplars per class: take the minimum distance over all of
  /// them. Off means only each class's first exemplar is used.
  bool multi_exemplar_min = false;

  // Reranking.
  std::size_t k = 10;
  /// Build the ideal ranking from every judged doc of the query rather than
  /// only the judged docs among its candidates.
  bool ideal_from_all_qrels = false;

  JointOptions joint() const { return {mode, variant, separator, symmetrize_joint}; }
};

struct StsResult {
  double spearman = 0.0;  // rho * 100
  std::vector<double> distances;
  std::vector<LengthQuintuple> lengths;
  nlohmann::ordered_json to_json(std::span<const StsRecord> records) const;
};

struct ClassifyResult {
  double accuracy = 0.0;
  std::vector<int> predictions;
  /// distances[r][c]: record r against the c-th class in ascending id order.
  std::vector<std::vector<double>> distances;
  nlohmann::ordered_json to_json(const ClassifyDataset& data) const;
};

struct RerankResult {
  double ndcg = 0.0;  // mean over queries
  std::vector<double> per_query;
  /// Queries with no judged-relevant document; they count as 0.
  std::vector<std::size_t> flagged;
  std::vector<std::vector<std::string>> rankings;
  nlohmann::ordered_json to_json(std::span<const RerankRecord> records) const;
};

StsResult eval_sts(const EntropyModel& model, std::span<const StsRecord> records,
                   const EvalOptions& options = {});
ClassifyResult eval_classify(const EntropyModel& model, const ClassifyDataset& data,
                             const EvalOptions& options = {});
RerankResult eval_rerank(const EntropyModel& model, std::span<const RerankRecord> records,
                         const EvalOptions& options = {});

enum class TaskKind { Sts, Classify, Rerank };
std::string_view to_string(TaskKind t) noexcept;

struct GridCell {
  Metric metric = Metric::Mean;
  Variant variant = Variant::LogProb;
  std::optional<double> score;
  std::string error;  // set when score is empty
  std::size_t record_count = 0;
};

struct MetricGrid {
  TaskKind task = TaskKind::Sts;
  std::vector<GridCell> cells;  // variant-major, metrics in max, min, mean order
  const GridCell& at(Metric m, Variant v) const;
  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

/// Six (metric, variant) cells. Lengths are computed once per variant and
/// shared by the three metrics. Failures land in the cell, not the caller.
/// `options.metric` and `options.variant` are ignored.
MetricGrid metric_grid(const EntropyModel& model, std::span<const StsRecord> records,
                       const EvalOptions& options = {});
MetricGrid metric_grid(const EntropyModel& model, const ClassifyDataset& data,
                       const EvalOptions& options = {});
MetricGrid metric_grid(const EntropyModel& model, std::span<const RerankRecord> records,
                       const EvalOptions& options = {});

struct RpredResult {
  std::vector<RpredPoint> points;  // record order
  std::vector<RpredBucket> buckets;
  nlohmann::ordered_json to_json() const;
};

/// Classifies every record, computes its R_pred and buckets the records.
/// Needs at least two classes.
RpredResult rpred_analysis(const EntropyModel& model, const ClassifyDataset& data,
                           const EvalOptions& options = {}, std::size_t groups = 10);
/// Same from precomputed distances, one row per record.
RpredResult rpred_analysis(std::span<const std::vector<double>> class_distances,
                           std::span<const std::size_t> labels, std::size_t groups = 10);

}  // namespace infodist
