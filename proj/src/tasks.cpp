#include "infodist/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "infodist/error.hpp"
#include "infodist/parallel.hpp"

namespace infodist {

using nlohmann::json;
using nlohmann::ordered_json;

// --- records and loaders ----------------------------------------------------

void validate(const StsRecord& r) {
  if (r.sentence_a.empty() || r.sentence_b.empty()) {
    throw Error(Errc::InvalidArgument, "STS sentences must be nonempty");
  }
  if (!(r.gold >= 0.0 && r.gold <= 5.0)) {
    throw Error(Errc::InvalidArgument, "STS gold score outside [0, 5]");
  }
}

void validate(const ClassifyDataset& d) {
  if (d.exemplars.empty()) throw Error(Errc::InvalidArgument, "no exemplar classes");
  for (const auto& [c, texts] : d.exemplars) {
    if (texts.empty()) {
      throw Error(Errc::InvalidArgument, "class " + std::to_string(c) + " has no exemplar");
    }
    for (const auto& t : texts) {
      if (t.empty()) {
        throw Error(Errc::InvalidArgument, "class " + std::to_string(c) + " has an empty exemplar");
      }
    }
  }
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    if (!d.exemplars.contains(d.records[i].label)) {
      throw Error(Errc::InvalidArgument, "record " + std::to_string(i) + ": label " +
                                             std::to_string(d.records[i].label) +
                                             " has no exemplar");
    }
  }
}

void validate(const RerankRecord& r) {
  if (r.candidates.empty()) {
    throw Error(Errc::InvalidArgument, "query '" + r.qid + "' has no candidates");
  }
  std::vector<std::string_view> ids;
  for (const auto& c : r.candidates) ids.push_back(c.docid);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(Errc::InvalidArgument, "query '" + r.qid + "' repeats a candidate id");
  }
  for (const auto& [doc, rel] : r.qrels) {
    if (rel < 0) throw Error(Errc::InvalidArgument, "negative relevance for '" + doc + "'");
  }
}

namespace {

template <class Fn>
void for_each_jsonl(std::string_view text, std::string_view what, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError,
                  std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<StsRecord> load_sts(std::string_view jsonl) {
  std::vector<StsRecord> out;
  for_each_jsonl(jsonl, "sts", [&](const json& j) {
    out.push_back({j.at("a").get<std::string>(), j.at("b").get<std::string>(),
                   j.at("score").get<double>()});
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      validate(out[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

ClassifyDataset load_classify(std::string_view records_jsonl, std::string_view exemplars_jsonl) {
  ClassifyDataset d;
  for_each_jsonl(exemplars_jsonl, "exemplars", [&](const json& j) {
    d.exemplars[j.at("class").get<int>()].push_back(j.at("text").get<std::string>());
  });
  for_each_jsonl(records_jsonl, "classify", [&](const json& j) {
    d.records.push_back({j.at("text").get<std::string>(), j.at("label").get<int>()});
  });
  validate(d);
  return d;
}

std::vector<RerankRecord> load_rerank(std::string_view queries_jsonl,
                                      std::string_view candidates_jsonl,
                                      std::string_view qrels_tsv) {
  std::vector<RerankRecord> out;
  std::unordered_map<std::string, std::size_t> index;
  for_each_jsonl(queries_jsonl, "queries", [&](const json& j) {
    RerankRecord r;
    r.qid = j.at("qid").get<std::string>();
    r.query = j.at("text").get<std::string>();
    if (!index.emplace(r.qid, out.size()).second) {
      throw Error(Errc::ParseError, "duplicate query id '" + r.qid + "'");
    }
    out.push_back(std::move(r));
  });
  for_each_jsonl(candidates_jsonl, "candidates", [&](const json& j) {
    const auto qid = j.at("qid").get<std::string>();
    auto it = index.find(qid);
    if (it == index.end()) throw Error(Errc::ParseError, "candidate for unknown query '" + qid + "'");
    out[it->second].candidates.push_back(
        {j.at("docid").get<std::string>(), j.at("text").get<std::string>(),
         j.value("bm25", 0.0)});
  });
  std::istringstream in{std::string(qrels_tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string qid, docid, rel;
    if (!std::getline(fields, qid, '\t') || !std::getline(fields, docid, '\t') ||
        !std::getline(fields, rel)) {
      throw Error(Errc::ParseError, "qrels line " + std::to_string(line_no) + ": need 3 fields");
    }
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(rel, &used);
      if (used != rel.size()) throw std::invalid_argument(rel);
    } catch (const std::exception&) {
      // A header row such as "query-id corpus-id score" is skipped.
      if (line_no == 1) continue;
      throw Error(Errc::ParseError, "qrels line " + std::to_string(line_no) + ": bad relevance");
    }
    auto it = index.find(qid);
    if (it != index.end()) out[it->second].qrels[docid] = value;
  }
  for (const auto& r : out) validate(r);
  return out;
}

// --- pure scoring -----------------------------------------------------------

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::InvalidArgument, "spearman: size mismatch");
  if (a.size() < 2) throw Error(Errc::InvalidArgument, "spearman needs at least two points");
  for (double v : a) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "spearman: non-finite value");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(Errc::UndefinedCorrelation, "spearman: one side is constant");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::size_t argmin_index(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::InvalidArgument, "argmin of nothing");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

double dcg_at_k(std::span<const int> relevances, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, relevances.size());
  for (std::size_t i = 0; i < n; ++i) {
    dcg += relevances[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

std::optional<double> ndcg_at_k(std::span<const int> ranked, std::span<const int> ideal,
                                std::size_t k) {
  std::vector<int> best(ideal.begin(), ideal.end());
  std::sort(best.begin(), best.end(), std::greater<>());
  const double idcg = dcg_at_k(best, k);
  if (idcg <= 0.0) return std::nullopt;
  return std::min(1.0, dcg_at_k(ranked, k) / idcg);
}

double rpred_ratio(std::span<const double> class_distances) {
  const double best = class_distances[argmin_index(class_distances)];
  const double mean = std::accumulate(class_distances.begin(), class_distances.end(), 0.0) /
                      static_cast<double>(class_distances.size());
  return mean == 0.0 ? 1.0 : best / mean;
}

std::vector<RpredBucket> rpred_buckets(std::vector<RpredPoint> points, std::size_t groups) {
  if (groups == 0) throw Error(Errc::GroupingError, "group count must be positive");
  if (points.size() < groups) {
    throw Error(Errc::GroupingError, std::to_string(points.size()) + " records cannot fill " +
                                         std::to_string(groups) + " groups");
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const RpredPoint& a, const RpredPoint& b) { return a.ratio < b.ratio; });
  std::vector<RpredBucket> out(groups);
  const std::size_t n = points.size();
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * n / groups;
    const std::size_t hi = (g + 1) * n / groups;
    double ratio = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      ratio += points[i].ratio;
      correct += points[i].correct;
    }
    const double count = static_cast<double>(hi - lo);
    out[g] = {ratio / count, static_cast<double>(correct) / count, hi - lo};
  }
  return out;
}

// --- model-driven evaluation ------------------------------------------------

std::string_view to_string(Shot s) noexcept { return s == Shot::Zero ? "zero" : "one"; }

Shot parse_shot(std::string_view s) {
  if (s == "zero" || s == "0") return Shot::Zero;
  if (s == "one" || s == "1") return Shot::One;
  throw Error(Errc::InvalidArgument, "unknown shot '" + std::string(s) + "', expected zero or one");
}

std::string_view to_string(TaskKind t) noexcept {
  switch (t) {
    case TaskKind::Sts: return "sts";
    case TaskKind::Classify: return "classify";
    case TaskKind::Rerank: return "rerank";
  }
  return "?";
}

namespace {

struct PairSpec {
  std::string_view x;
  std::string_view y;
  std::size_t record;
};

[[noreturn]] void rethrow_for_record(const Error& e, std::size_t record) {
  throw Error(e.code(), "record " + std::to_string(record) + ": " + e.what());
}

// Tokenizes each distinct text once, then computes every pair's quintuple.
std::vector<LengthQuintuple> pair_lengths(const EntropyModel& model,
                                          const std::vector<PairSpec>& pairs,
                                          const JointOptions& joint, unsigned jobs) {
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::string_view> texts;
  std::vector<std::size_t> first_record;
  for (const auto& p : pairs) {
    for (auto t : {p.x, p.y}) {
      if (slot.emplace(t, texts.size()).second) {
        texts.push_back(t);
        first_record.push_back(p.record);
      }
    }
  }
  std::vector<Tokens> tokens(texts.size());
  parallel_for(texts.size(), jobs, [&](std::size_t i) {
    try {
      tokens[i] = model.tokenize(texts[i]);
    } catch (const Error& e) {
      rethrow_for_record(e, first_record[i]);
    }
  });

  std::vector<LengthQuintuple> out(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = joint_codelen(model, tokens[slot.at(pairs[i].x)], tokens[slot.at(pairs[i].y)],
                             joint);
    } catch (const Error& e) {
      rethrow_for_record(e, pairs[i].record);
    }
  });
  return out;
}

double pair_distance(const std::vector<LengthQuintuple>& lengths,
                     const std::vector<PairSpec>& pairs, std::size_t i, Metric metric) {
  try {
    return metric_value(lengths[i], metric);
  } catch (const Error& e) {
    rethrow_for_record(e, pairs[i].record);
  }
}

// STS

std::vector<PairSpec> sts_pairs(std::span<const StsRecord> records) {
  if (records.size() < 2) throw Error(Errc::InvalidArgument, "STS needs at least two records");
  std::vector<PairSpec> pairs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate(records[i]);
    } catch (const Error& e) {
      rethrow_for_record(e, i);
    }
    pairs.push_back({records[i].sentence_a, records[i].sentence_b, i});
  }
  return pairs;
}

StsResult sts_score(std::span<const StsRecord> records, const std::vector<PairSpec>& pairs,
                    const std::vector<LengthQuintuple>& lengths, Metric metric) {
  StsResult r;
  r.lengths = lengths;
  std::vector<double> similarity, gold;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    r.distances.push_back(pair_distance(lengths, pairs, i, metric));
    similarity.push_back(-r.distances.back());
    gold.push_back(records[i].gold);
  }
  r.spearman = 100.0 * spearman(similarity, gold);
  return r;
}

// Classification

struct ClassifyLayout {
  std::vector<int> classes;
  std::vector<PairSpec> pairs;
  // Pair range of record r, class c: [offset[r][c], offset[r][c + 1]).
  std::vector<std::vector<std::size_t>> offsets;
};

ClassifyLayout classify_pairs(const ClassifyDataset& d, const EvalOptions& o) {
  validate(d);
  if (d.records.empty()) throw Error(Errc::InvalidArgument, "no records to classify");
  ClassifyLayout lay;
  for (const auto& [c, _] : d.exemplars) lay.classes.push_back(c);
  for (std::size_t r = 0; r < d.records.size(); ++r) {
    std::vector<std::size_t> off{lay.pairs.size()};
    for (const auto& [c, texts] : d.exemplars) {
      const std::size_t used = o.multi_exemplar_min ? texts.size() : 1;
      for (std::size_t e = 0; e < used; ++e) {
        std::string_view ex = texts[e], text = d.records[r].text;
        lay.pairs.push_back(o.swap_xy ? PairSpec{text, ex, r} : PairSpec{ex, text, r});
      }
      off.push_back(lay.pairs.size());
    }
    lay.offsets.push_back(std::move(off));
  }
  return lay;
}

std::vector<std::vector<double>> class_distances(const ClassifyLayout& lay,
                                                 const std::vector<LengthQuintuple>& lengths,
                                                 Metric metric) {
  std::vector<std::vector<double>> out(lay.offsets.size());
  for (std::size_t r = 0; r < lay.offsets.size(); ++r) {
    const auto& off = lay.offsets[r];
    for (std::size_t c = 0; c + 1 < off.size(); ++c) {
      double best = pair_distance(lengths, lay.pairs, off[c], metric);
      for (std::size_t i = off[c] + 1; i < off[c + 1]; ++i) {
        best = std::min(best, pair_distance(lengths, lay.pairs, i, metric));
      }
      out[r].push_back(best);
    }
  }
  return out;
}

ClassifyResult classify_score(const ClassifyDataset& d, const ClassifyLayout& lay,
                              const std::vector<LengthQuintuple>& lengths, Metric metric) {
  ClassifyResult r;
  r.distances = class_distances(lay, lengths, metric);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const int pred = lay.classes[argmin_index(r.distances[i])];
    r.predictions.push_back(pred);
    correct += pred == d.records[i].label;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(d.records.size());
  return r;
}

// Reranking

struct RerankLayout {
  std::vector<PairSpec> pairs;
  std::vector<std::size_t> offsets;  // record r: [offsets[r], offsets[r + 1])
};

RerankLayout rerank_pairs(std::span<const RerankRecord> records) {
  if (records.empty()) throw Error(Errc::InvalidArgument, "no queries to rerank");
  RerankLayout lay;
  lay.offsets.push_back(0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    try {
      validate(records[r]);
    } catch (const Error& e) {
      rethrow_for_record(e, r);
    }
    for (const auto& c : records[r].candidates) {
      lay.pairs.push_back({c.text, records[r].query, r});
    }
    lay.offsets.push_back(lay.pairs.size());
  }
  return lay;
}

RerankResult rerank_score(std::span<const RerankRecord> records, const RerankLayout& lay,
                          const std::vector<LengthQuintuple>& lengths, Metric metric,
                          const EvalOptions& o) {
  RerankResult res;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    std::vector<double> d;
    for (std::size_t i = lay.offsets[r]; i < lay.offsets[r + 1]; ++i) {
      d.push_back(pair_distance(lengths, lay.pairs, i, metric));
    }
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    auto rel = [&](const std::string& doc) {
      auto it = rec.qrels.find(doc);
      return it == rec.qrels.end() ? 0 : it->second;
    };
    std::vector<int> ranked;
    std::vector<std::string> ids;
    for (std::size_t i : order) {
      ranked.push_back(rel(rec.candidates[i].docid));
      ids.push_back(rec.candidates[i].docid);
    }
    std::vector<int> ideal;
    if (o.ideal_from_all_qrels) {
      for (const auto& [_, v] : rec.qrels) ideal.push_back(v);
    } else {
      for (const auto& c : rec.candidates) {
        if (rec.qrels.contains(c.docid)) ideal.push_back(rel(c.docid));
      }
    }
    const auto ndcg = ndcg_at_k(ranked, ideal, o.k);
    if (!ndcg) res.flagged.push_back(r);
    res.per_query.push_back(ndcg.value_or(0.0));
    res.rankings.push_back(std::move(ids));
  }
  res.ndcg = std::accumulate(res.per_query.begin(), res.per_query.end(), 0.0) /
             static_cast<double>(res.per_query.size());
  return res;
}

ordered_json quintuple_json(const LengthQuintuple& q) {
  return {{"c_x", q.c_x}, {"c_y", q.c_y}, {"c_x_given_y", q.c_x_given_y},
          {"c_y_given_x", q.c_y_given_x}, {"c_xy", q.c_xy}};
}

constexpr Metric kMetrics[] = {Metric::Max, Metric::Min, Metric::Mean};
constexpr Variant kVariants[] = {Variant::LogProb, Variant::LogRank};

// Runs the six cells given per-variant pair layouts and a scorer.
template <class Lengths, class Score>
MetricGrid run_grid(TaskKind task, std::size_t records, Lengths&& lengths_for, Score&& score) {
  MetricGrid g;
  g.task = task;
  for (Variant v : kVariants) {
    std::optional<std::vector<LengthQuintuple>> lengths;
    std::string error;
    try {
      lengths = lengths_for(v);
    } catch (const Error& e) {
      error = std::string(errc_name(e.code())) + ": " + e.what();
    }
    for (Metric m : kMetrics) {
      GridCell cell{m, v, std::nullopt, error, records};
      if (lengths) {
        try {
          cell.score = score(*lengths, m);
        } catch (const Error& e) {
          cell.error = std::string(errc_name(e.code())) + ": " + e.what();
        }
      }
      g.cells.push_back(std::move(cell));
    }
  }
  return g;
}

EvalOptions with_variant(EvalOptions o, Variant v) {
  o.variant = v;
  return o;
}

}  // namespace

StsResult eval_sts(const EntropyModel& model, std::span<const StsRecord> records,
                   const EvalOptions& options) {
  const auto pairs = sts_pairs(records);
  return sts_score(records, pairs, pair_lengths(model, pairs, options.joint(), options.jobs),
                   options.metric);
}

ClassifyResult eval_classify(const EntropyModel& model, const ClassifyDataset& data,
                             const EvalOptions& options) {
  const auto lay = classify_pairs(data, options);
  return classify_score(data, lay, pair_lengths(model, lay.pairs, options.joint(), options.jobs),
                        options.metric);
}

RerankResult eval_rerank(const EntropyModel& model, std::span<const RerankRecord> records,
                         const EvalOptions& options) {
  const auto lay = rerank_pairs(records);
  return rerank_score(records, lay,
                      pair_lengths(model, lay.pairs, options.joint(), options.jobs),
                      options.metric, options);
}

MetricGrid metric_grid(const EntropyModel& model, std::span<const StsRecord> records,
                       const EvalOptions& options) {
  const auto pairs = sts_pairs(records);
  return run_grid(
      TaskKind::Sts, records.size(),
      [&](Variant v) {
        return pair_lengths(model, pairs, with_variant(options, v).joint(), options.jobs);
      },
      [&](const std::vector<LengthQuintuple>& l, Metric m) {
        return sts_score(records, pairs, l, m).spearman;
      });
}

MetricGrid metric_grid(const EntropyModel& model, const ClassifyDataset& data,
                       const EvalOptions& options) {
  const auto lay = classify_pairs(data, options);
  return run_grid(
      TaskKind::Classify, data.records.size(),
      [&](Variant v) {
        return pair_lengths(model, lay.pairs, with_variant(options, v).joint(), options.jobs);
      },
      [&](const std::vector<LengthQuintuple>& l, Metric m) {
        return classify_score(data, lay, l, m).accuracy;
      });
}

MetricGrid metric_grid(const EntropyModel& model, std::span<const RerankRecord> records,
                       const EvalOptions& options) {
  const auto lay = rerank_pairs(records);
  return run_grid(
      TaskKind::Rerank, records.size(),
      [&](Variant v) {
        return pair_lengths(model, lay.pairs, with_variant(options, v).joint(), options.jobs);
      },
      [&](const std::vector<LengthQuintuple>& l, Metric m) {
        return rerank_score(records, lay, l, m, options).ndcg;
      });
}

RpredResult rpred_analysis(std::span<const std::vector<double>> class_distances,
                           std::span<const std::size_t> labels, std::size_t groups) {
  if (class_distances.size() != labels.size()) {
    throw Error(Errc::InvalidArgument, "one label per record is required");
  }
  RpredResult out;
  for (std::size_t r = 0; r < class_distances.size(); ++r) {
    const auto& d = class_distances[r];
    if (d.size() < 2) throw Error(Errc::InvalidArgument, "R_pred needs at least two classes");
    out.points.push_back({rpred_ratio(d), argmin_index(d) == labels[r]});
  }
  out.buckets = rpred_buckets(out.points, groups);
  return out;
}

RpredResult rpred_analysis(const EntropyModel& model, const ClassifyDataset& data,
                           const EvalOptions& options, std::size_t groups) {
  if (data.exemplars.size() < 2) {
    throw Error(Errc::InvalidArgument, "R_pred needs at least two classes");
  }
  if (data.records.size() < groups) {
    throw Error(Errc::GroupingError, std::to_string(data.records.size()) +
                                         " records cannot fill " + std::to_string(groups) +
                                         " groups");
  }
  const auto result = eval_classify(model, data, options);
  std::vector<std::size_t> labels;
  for (const auto& r : data.records) {
    labels.push_back(static_cast<std::size_t>(
        std::distance(data.exemplars.begin(), data.exemplars.find(r.label))));
  }
  return rpred_analysis(result.distances, labels, groups);
}

// --- reports ----------------------------------------------------------------

ordered_json StsResult::to_json(std::span<const StsRecord> records) const {
  ordered_json per = ordered_json::array();
  for (std::size_t i = 0; i < distances.size(); ++i) {
    ordered_json rec{{"index", i}, {"gold", records[i].gold}, {"distance", distances[i]}};
    if (i < lengths.size()) rec["lengths"] = quintuple_json(lengths[i]);
    per.push_back(std::move(rec));
  }
  return {{"task", "sts"}, {"spearman", spearman}, {"records", std::move(per)}};
}

ordered_json ClassifyResult::to_json(const ClassifyDataset& data) const {
  ordered_json classes = ordered_json::array();
  for (const auto& [c, _] : data.exemplars) classes.push_back(c);
  ordered_json per = ordered_json::array();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    per.push_back({{"index", i},
                   {"label", data.records[i].label},
                   {"prediction", predictions[i]},
                   {"distances", distances[i]}});
  }
  return {{"task", "classify"},
          {"accuracy", accuracy},
          {"classes", std::move(classes)},
          {"records", std::move(per)}};
}

ordered_json RerankResult::to_json(std::span<const RerankRecord> records) const {
  ordered_json per = ordered_json::array();
  for (std::size_t i = 0; i < per_query.size(); ++i) {
    per.push_back({{"qid", records[i].qid},
                   {"ndcg", per_query[i]},
                   {"flagged", std::find(flagged.begin(), flagged.end(), i) != flagged.end()},
                   {"ranking", rankings[i]}});
  }
  return {{"task", "rerank"},
          {"ndcg", ndcg},
          {"gain", "linear"},
          {"flagged_queries", flagged.size()},
          {"queries", std::move(per)}};
}

const GridCell& MetricGrid::at(Metric m, Variant v) const {
  for (const auto& c : cells) {
    if (c.metric == m && c.variant == v) return c;
  }
  throw Error(Errc::InvalidArgument, "grid cell missing");
}

ordered_json MetricGrid::to_json() const {
  ordered_json out = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json j{{"metric", to_string(c.metric)},
                   {"variant", to_string(c.variant)},
                   {"records", c.record_count}};
    if (c.score) {
      j["score"] = *c.score;
    } else {
      j["score"] = nullptr;
      j["error"] = c.error;
    }
    out.push_back(std::move(j));
  }
  return {{"task", to_string(task)}, {"grid", std::move(out)}};
}

std::string MetricGrid::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(8) << "metric" << std::setw(12) << "logprob" << "logrank\n";
  for (Metric m : kMetrics) {
    os << std::setw(8) << to_string(m);
    for (Variant v : kVariants) {
      const auto& c = at(m, v);
      std::ostringstream cell;
      if (c.score) {
        cell << std::fixed << std::setprecision(4) << *c.score;
      } else {
        cell << "error";
      }
      if (v == kVariants[0]) {
        os << std::setw(12) << cell.str();
      } else {
        os << cell.str();
      }
    }
    os << '\n';
  }
  return os.str();
}

ordered_json RpredResult::to_json() const {
  ordered_json b = ordered_json::array();
  for (const auto& x : buckets) {
    b.push_back({{"mean_ratio", x.mean_ratio}, {"accuracy", x.accuracy}, {"count", x.count}});
  }
  return {{"analysis", "rpred"}, {"buckets", std::move(b)}};
}

}  // namespace infodist
