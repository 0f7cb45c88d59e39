#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ereval/core_model.hpp"
#include "ereval/error_metrics.hpp"

namespace ereval {

struct Estimate {
  std::string metric;
  double point = 0.0;
  double std = 0.0;  // NaN when undefined (single-draw summary estimates)
  std::size_t k = 0;
  std::string design;
  // "zero_numerator": f̄ = 0, unadjusted 0 reported; "single_draw"; "clamped".
  std::vector<std::string> flags;

  double lower() const { return point - 2.0 * std; }
  double upper() const { return point + 2.0 * std; }
};

// θ = E[f(c)] / E[g(c)] over a cluster drawn with probability ∝ p_c.
// When `complement` is set the reported metric is 1 - θ (homogeneity).
struct RatioTarget {
  std::string name;
  std::function<double(const ClusterErrors&)> f;
  std::function<double(const ClusterErrors&)> g;
  bool complement = false;
};

// Bias-adjusted ratio estimator and its variance estimate over i.i.d.
// with-replacement draws. Requires k >= 2 and ḡ != 0. If f̄ = 0 the point is
// 0, the variance uses f_i / f̄ := 0 and the estimate is flagged.
Estimate ratio_estimate(std::span<const double> f, std::span<const double> g, std::string metric = "ratio");
Estimate ratio_estimate(const ErrorTable& rows, const RatioTarget& target);

// Globals of the predicted clustering needed by the cluster metrics.
struct PredictionGlobals {
  std::size_t universe_size = 0;     // N
  std::size_t num_pred_clusters = 0; // |Ĉ|
};

RatioTarget pairwise_precision_target();
RatioTarget pairwise_recall_target();
RatioTarget pairwise_f_target(double beta);
RatioTarget cluster_precision_target(const PredictionGlobals& globals);
RatioTarget cluster_recall_target();
RatioTarget cluster_f_target(double beta, const PredictionGlobals& globals);
RatioTarget bcubed_precision_target();
RatioTarget bcubed_recall_target();
RatioTarget homogeneity_target(std::size_t universe_size);

Estimate pairwise_precision(const ErrorTable& rows);
Estimate pairwise_recall(const ErrorTable& rows);
Estimate pairwise_f(const ErrorTable& rows, double beta);
Estimate cluster_precision(const ErrorTable& rows, const PredictionGlobals& globals);
Estimate cluster_recall(const ErrorTable& rows);
Estimate cluster_f(const ErrorTable& rows, double beta, const PredictionGlobals& globals);
Estimate bcubed_precision(const ErrorTable& rows);
Estimate bcubed_recall(const ErrorTable& rows);
Estimate homogeneity(const ErrorTable& rows, std::size_t universe_size);

// Ratio estimate restricted to true clusters accepted by `keep`.
Estimate subgroup_estimate(const ErrorTable& rows, const std::function<bool(const ClusterErrors&)>& keep,
                           const RatioTarget& target);

enum class Metric {
  kPairwisePrecision,
  kPairwiseRecall,
  kPairwiseF,
  kClusterPrecision,
  kClusterRecall,
  kClusterF,
  kBcubedPrecision,
  kBcubedRecall,
  kHomogeneity,
};

const std::vector<Metric>& all_metrics();
std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);
// Comma-separated list; "all" expands to every metric.
std::vector<Metric> parse_metric_list(const std::string& list);
bool needs_prediction_globals(Metric metric);

struct EstimateOptions {
  double beta = 1.0;
  std::optional<PredictionGlobals> globals;
  bool clamp = false;  // clamp reported points into [0, 1]
  std::string design;
};

RatioTarget make_target(Metric metric, const EstimateOptions& options);
Estimate estimate_metric(const ErrorTable& rows, Metric metric, const EstimateOptions& options);
std::vector<Estimate> estimate_metrics(const ErrorTable& rows, const std::vector<Metric>& metrics,
                                       const EstimateOptions& options);

// The one estimate pipeline behind the CLI, C API and service: ErrorTable
// of `sample` against `prediction`, prediction globals filled in, design
// taken from the sample.
std::vector<Estimate> estimate_sample(const ClusterSample& sample, const Clustering& prediction,
                                      const std::vector<Metric>& metrics, double beta = 1.0, bool clamp = false);

// Canonical JSON for a list of estimates ({"v":1,"estimates":[...]}). Shared
// by the CLI, the C API and the HTTP service so outputs are byte-identical.
std::string estimates_to_json(const std::vector<Estimate>& estimates);

// Exact metric values from a fully known truth clustering, by direct
// definition (contingency counts and double sums). Both clusterings must
// cover the same records.
struct OracleMetrics {
  double pairwise_precision = 0.0;
  double pairwise_recall = 0.0;
  double pairwise_f = 0.0;
  double cluster_precision = 0.0;
  double cluster_recall = 0.0;
  double cluster_f = 0.0;
  double bcubed_precision = 0.0;
  double bcubed_recall = 0.0;
  double homogeneity = 0.0;

  double get(Metric metric) const;
};

OracleMetrics oracle_metrics(const Clustering& truth, const Clustering& prediction, double beta = 1.0);

}  // namespace ereval
