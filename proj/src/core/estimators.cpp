#include "ereval/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "json.hpp"

#include "ereval/error.hpp"
#include "ereval/text.hpp"

namespace ereval {

Estimate ratio_estimate(std::span<const double> f, std::span<const double> g, std::string metric) {
  if (f.size() != g.size()) fail(ErrorKind::kInvalidInput, "ratio_estimate: f and g differ in length");
  const std::size_t k = f.size();
  if (k < 2) fail(ErrorKind::kDegenerate, "insufficient sample: ratio estimation needs at least 2 draws");

  double f_sum = 0.0, g_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    f_sum += f[i];
    g_sum += g[i];
  }
  const double kd = static_cast<double>(k);
  const double f_bar = f_sum / kd;
  const double g_bar = g_sum / kd;
  if (g_bar == 0.0) fail(ErrorKind::kDegenerate, metric + ": denominator mean is zero");

  Estimate est;
  est.metric = std::move(metric);
  est.k = k;
  if (f_bar == 0.0) {
    // f_i / f̄ := 0, so the variance collapses together with the ratio.
    est.point = 0.0;
    est.std = 0.0;
    est.flags.push_back("zero_numerator");
    return est;
  }

  double adjustment = 0.0, dispersion = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double gi = g[i] / g_bar;
    const double fi = f[i] / f_bar;
    adjustment += gi * (fi - gi);
    dispersion += (gi - fi) * (gi - fi);
  }
  const double norm = 1.0 / (kd * (kd - 1.0));
  const double ratio = f_bar / g_bar;
  est.point = ratio * (1.0 + norm * adjustment);
  est.std = std::sqrt(ratio * ratio * norm * dispersion);
  return est;
}

Estimate ratio_estimate(const ErrorTable& rows, const RatioTarget& target) {
  std::vector<double> f, g;
  f.reserve(rows.size());
  g.reserve(rows.size());
  for (const auto& row : rows) {
    f.push_back(target.f(row));
    g.push_back(target.g(row));
  }
  Estimate est = ratio_estimate(f, g, target.name);
  if (target.complement) est.point = 1.0 - est.point;
  return est;
}

namespace {

double size_of(const ClusterErrors& c) { return static_cast<double>(c.size); }

}  // namespace

RatioTarget pairwise_precision_target() {
  return {"pairwise_precision",
          [](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0 - c.uce) / c.p_c; },
          [](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0 + c.sde) / c.p_c; }};
}

RatioTarget pairwise_recall_target() {
  return {"pairwise_recall",
          [](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0 - c.uce) / c.p_c; },
          [](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0) / c.p_c; }};
}

RatioTarget pairwise_f_target(double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::kInvalidInput, "beta must be positive");
  const double shrink = 1.0 / (1.0 + beta * beta);
  return {"pairwise_f",
          [](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0 - c.uce) / c.p_c; },
          [shrink](const ClusterErrors& c) { return size_of(c) * (size_of(c) - 1.0 + shrink * c.sde) / c.p_c; }};
}

// Cluster metrics count exactly recovered true clusters: the indicator is
// 1 - EI(c), since EI flags clusters with any error.
RatioTarget cluster_precision_target(const PredictionGlobals& globals) {
  const double n = static_cast<double>(globals.universe_size);
  const double n_pred = static_cast<double>(globals.num_pred_clusters);
  return {"cluster_precision", [n](const ClusterErrors& c) { return n * (1.0 - c.ei) / c.p_c; },
          [n_pred](const ClusterErrors& c) { return n_pred * size_of(c) / c.p_c; }};
}

RatioTarget cluster_recall_target() {
  return {"cluster_recall", [](const ClusterErrors& c) { return (1.0 - c.ei) / c.p_c; },
          [](const ClusterErrors& c) { return 1.0 / c.p_c; }};
}

RatioTarget cluster_f_target(double beta, const PredictionGlobals& globals) {
  if (!(beta > 0.0)) fail(ErrorKind::kInvalidInput, "beta must be positive");
  const double n = static_cast<double>(globals.universe_size);
  const double n_pred = static_cast<double>(globals.num_pred_clusters);
  const double b2 = beta * beta;
  return {"cluster_f", [n, b2](const ClusterErrors& c) { return n * (1.0 + b2) * (1.0 - c.ei) / c.p_c; },
          [n, n_pred, b2](const ClusterErrors& c) { return (n * b2 + n_pred * size_of(c)) / c.p_c; }};
}

RatioTarget bcubed_precision_target() {
  return {"bcubed_precision", [](const ClusterErrors& c) { return (1.0 - c.roce) / c.p_c; },
          [](const ClusterErrors& c) { return 1.0 / c.p_c; }};
}

RatioTarget bcubed_recall_target() {
  return {"bcubed_recall", [](const ClusterErrors& c) { return (1.0 - c.ruce) / c.p_c; },
          [](const ClusterErrors& c) { return 1.0 / c.p_c; }};
}

RatioTarget homogeneity_target(std::size_t universe_size) {
  if (universe_size == 0) fail(ErrorKind::kInvalidInput, "homogeneity needs the universe size N");
  const double n = static_cast<double>(universe_size);
  return {"homogeneity", [](const ClusterErrors& c) { return size_of(c) * c.h / c.p_c; },
          [n](const ClusterErrors& c) { return size_of(c) * std::log(size_of(c) / n) / c.p_c; }, true};
}

Estimate pairwise_precision(const ErrorTable& rows) { return ratio_estimate(rows, pairwise_precision_target()); }
Estimate pairwise_recall(const ErrorTable& rows) { return ratio_estimate(rows, pairwise_recall_target()); }
Estimate pairwise_f(const ErrorTable& rows, double beta) { return ratio_estimate(rows, pairwise_f_target(beta)); }
Estimate cluster_precision(const ErrorTable& rows, const PredictionGlobals& globals) {
  return ratio_estimate(rows, cluster_precision_target(globals));
}
Estimate cluster_recall(const ErrorTable& rows) { return ratio_estimate(rows, cluster_recall_target()); }
Estimate cluster_f(const ErrorTable& rows, double beta, const PredictionGlobals& globals) {
  return ratio_estimate(rows, cluster_f_target(beta, globals));
}
Estimate bcubed_precision(const ErrorTable& rows) { return ratio_estimate(rows, bcubed_precision_target()); }
Estimate bcubed_recall(const ErrorTable& rows) { return ratio_estimate(rows, bcubed_recall_target()); }

Estimate homogeneity(const ErrorTable& rows, std::size_t universe_size) {
  try {
    return ratio_estimate(rows, homogeneity_target(universe_size));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDegenerate && rows.size() >= 2)
      fail(ErrorKind::kDegenerate, "homogeneity undefined: every sampled true cluster spans the whole universe");
    throw;
  }
}

Estimate subgroup_estimate(const ErrorTable& rows, const std::function<bool(const ClusterErrors&)>& keep,
                           const RatioTarget& target) {
  ErrorTable kept;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(kept), keep);
  if (kept.size() < 2)
    fail(ErrorKind::kDegenerate, "subgroup has " + std::to_string(kept.size()) + " draws; at least 2 are needed");
  return ratio_estimate(kept, target);
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> metrics{
      Metric::kPairwisePrecision, Metric::kPairwiseRecall, Metric::kPairwiseF,
      Metric::kClusterPrecision,  Metric::kClusterRecall,  Metric::kClusterF,
      Metric::kBcubedPrecision,   Metric::kBcubedRecall,   Metric::kHomogeneity};
  return metrics;
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::kPairwisePrecision: return "pairwise_precision";
    case Metric::kPairwiseRecall: return "pairwise_recall";
    case Metric::kPairwiseF: return "pairwise_f";
    case Metric::kClusterPrecision: return "cluster_precision";
    case Metric::kClusterRecall: return "cluster_recall";
    case Metric::kClusterF: return "cluster_f";
    case Metric::kBcubedPrecision: return "bcubed_precision";
    case Metric::kBcubedRecall: return "bcubed_recall";
    case Metric::kHomogeneity: return "homogeneity";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : all_metrics())
    if (to_string(m) == name) return m;
  fail(ErrorKind::kInvalidInput, "unknown metric: " + name);
}

std::vector<Metric> parse_metric_list(const std::string& list) {
  std::vector<Metric> out;
  for (const auto& name : text::split(list, ',')) {
    if (name == "all") {
      out.insert(out.end(), all_metrics().begin(), all_metrics().end());
      continue;
    }
    out.push_back(parse_metric(name));
  }
  if (out.empty()) fail(ErrorKind::kInvalidInput, "no metrics requested");
  return out;
}

bool needs_prediction_globals(Metric metric) {
  return metric == Metric::kClusterPrecision || metric == Metric::kClusterF || metric == Metric::kHomogeneity;
}

RatioTarget make_target(Metric metric, const EstimateOptions& options) {
  auto globals = [&]() -> const PredictionGlobals& {
    if (!options.globals || options.globals->universe_size == 0)
      fail(ErrorKind::kInvalidInput, to_string(metric) + " needs the prediction's N and cluster count");
    return *options.globals;
  };
  switch (metric) {
    case Metric::kPairwisePrecision: return pairwise_precision_target();
    case Metric::kPairwiseRecall: return pairwise_recall_target();
    case Metric::kPairwiseF: return pairwise_f_target(options.beta);
    case Metric::kClusterPrecision: return cluster_precision_target(globals());
    case Metric::kClusterRecall: return cluster_recall_target();
    case Metric::kClusterF: return cluster_f_target(options.beta, globals());
    case Metric::kBcubedPrecision: return bcubed_precision_target();
    case Metric::kBcubedRecall: return bcubed_recall_target();
    case Metric::kHomogeneity: return homogeneity_target(globals().universe_size);
  }
  fail(ErrorKind::kInvalidInput, "unknown metric");
}

Estimate estimate_metric(const ErrorTable& rows, Metric metric, const EstimateOptions& options) {
  Estimate est = metric == Metric::kHomogeneity
                     ? homogeneity(rows, options.globals ? options.globals->universe_size : 0)
                     : ratio_estimate(rows, make_target(metric, options));
  est.design = options.design;
  if (options.clamp && (est.point < 0.0 || est.point > 1.0)) {
    est.point = std::clamp(est.point, 0.0, 1.0);
    est.flags.push_back("clamped");
  }
  return est;
}

std::vector<Estimate> estimate_metrics(const ErrorTable& rows, const std::vector<Metric>& metrics,
                                       const EstimateOptions& options) {
  std::vector<Estimate> out;
  out.reserve(metrics.size());
  for (Metric m : metrics) out.push_back(estimate_metric(rows, m, options));
  return out;
}

std::vector<Estimate> estimate_sample(const ClusterSample& sample, const Clustering& prediction,
                                      const std::vector<Metric>& metrics, double beta, bool clamp) {
  const ErrorTable rows = error_table(sample, prediction);
  EstimateOptions options;
  options.beta = beta;
  options.clamp = clamp;
  options.globals = PredictionGlobals{prediction.universe_size(), prediction.num_clusters()};
  options.design = to_string(sample.design);
  return estimate_metrics(rows, metrics, options);
}

std::string estimates_to_json(const std::vector<Estimate>& estimates) {
  nlohmann::ordered_json doc;
  doc["v"] = 1;
  doc["estimates"] = nlohmann::ordered_json::array();
  for (const auto& e : estimates) {
    nlohmann::ordered_json item;
    item["metric"] = e.metric;
    item["point"] = e.point;
    if (std::isfinite(e.std)) {
      item["std"] = e.std;
      item["lower"] = e.lower();
      item["upper"] = e.upper();
    } else {
      item["std"] = nullptr;
      item["lower"] = nullptr;
      item["upper"] = nullptr;
    }
    item["k"] = e.k;
    item["design"] = e.design;
    item["flags"] = e.flags;
    doc["estimates"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

double OracleMetrics::get(Metric metric) const {
  switch (metric) {
    case Metric::kPairwisePrecision: return pairwise_precision;
    case Metric::kPairwiseRecall: return pairwise_recall;
    case Metric::kPairwiseF: return pairwise_f;
    case Metric::kClusterPrecision: return cluster_precision;
    case Metric::kClusterRecall: return cluster_recall;
    case Metric::kClusterF: return cluster_f;
    case Metric::kBcubedPrecision: return bcubed_precision;
    case Metric::kBcubedRecall: return bcubed_recall;
    case Metric::kHomogeneity: return homogeneity;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

OracleMetrics oracle_metrics(const Clustering& truth, const Clustering& prediction, double beta) {
  if (truth.universe_size() != prediction.universe_size())
    fail(ErrorKind::kInvalidInput, "oracle: truth and prediction cover different record universes");
  if (truth.empty()) fail(ErrorKind::kInvalidInput, "oracle: empty clustering");
  const std::size_t n = truth.universe_size();

  // Contingency table |c ∩ ĉ| keyed by (true cluster, predicted cluster).
  std::unordered_map<std::uint64_t, std::size_t> cells;
  for (RecordIndex r = 0; r < n; ++r) {
    const auto p = prediction.find_record(truth.record_id(r));
    if (!p) fail(ErrorKind::kInvalidInput, "oracle: record absent from prediction: " + truth.record_id(r));
    const std::uint64_t key = (std::uint64_t{truth.cluster_of(r)} << 32) | prediction.cluster_of(*p);
    ++cells[key];
  }

  auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
  double true_pairs = 0.0, pred_pairs = 0.0, both_pairs = 0.0;
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c) true_pairs += pairs(static_cast<double>(truth.cluster_size(c)));
  for (ClusterIndex c = 0; c < prediction.num_clusters(); ++c)
    pred_pairs += pairs(static_cast<double>(prediction.cluster_size(c)));

  const double nd = static_cast<double>(n);
  std::size_t exact = 0;
  std::vector<double> b3_precision(truth.num_clusters(), 0.0), b3_recall(truth.num_clusters(), 0.0);
  double cond_entropy = 0.0;
  for (const auto& [key, count] : cells) {
    const auto c = static_cast<ClusterIndex>(key >> 32);
    const auto pc = static_cast<ClusterIndex>(key & 0xffffffffu);
    const double m = static_cast<double>(count);
    const double true_size = static_cast<double>(truth.cluster_size(c));
    const double pred_size = static_cast<double>(prediction.cluster_size(pc));
    both_pairs += pairs(m);
    if (count == truth.cluster_size(c) && count == prediction.cluster_size(pc)) ++exact;
    b3_precision[c] += m * m / pred_size;
    b3_recall[c] += m * m / true_size;
    cond_entropy -= m / nd * std::log(m / pred_size);
  }

  double entropy = 0.0, b3p = 0.0, b3r = 0.0;
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c) {
    const double s = static_cast<double>(truth.cluster_size(c));
    entropy -= s / nd * std::log(s / nd);
    b3p += b3_precision[c] / s;
    b3r += b3_recall[c] / s;
  }

  const double b2 = beta * beta;
  const double n_true = static_cast<double>(truth.num_clusters());
  const double n_pred = static_cast<double>(prediction.num_clusters());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double x = static_cast<double>(exact);

  OracleMetrics out;
  out.pairwise_precision = pred_pairs > 0 ? both_pairs / pred_pairs : nan;
  out.pairwise_recall = true_pairs > 0 ? both_pairs / true_pairs : nan;
  out.pairwise_f = (pred_pairs + b2 * true_pairs) > 0 ? (1.0 + b2) * both_pairs / (pred_pairs + b2 * true_pairs) : nan;
  out.cluster_precision = x / n_pred;
  out.cluster_recall = x / n_true;
  out.cluster_f = (1.0 + b2) * x / (n_pred + b2 * n_true);
  out.bcubed_precision = b3p / n_true;
  out.bcubed_recall = b3r / n_true;
  out.homogeneity = entropy > 0.0 ? 1.0 - cond_entropy / entropy : nan;
  return out;
}

}  // namespace ereval
