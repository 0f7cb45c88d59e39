#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ereval/core_model.hpp"
#include "ereval/estimators.hpp"
#include "ereval/sampling.hpp"

namespace ereval {

// Distinguished order for the q -> infinity limit.
inline constexpr double kHillInfinity = std::numeric_limits<double>::infinity();

struct HillPoint {
  double q;
  double value;
};

struct SummaryReport {
  std::size_t universe_size = 0;
  std::size_t num_clusters = 0;
  double avg_cluster_size = 0.0;
  double matching_rate = 0.0;
  std::optional<double> homonymy_rate;
  std::optional<double> name_variation_rate;
  std::vector<HillPoint> hill;
};

// q in {0, 0.25, ..., 2} and infinity.
std::vector<double> default_hill_grid();

double avg_cluster_size(const Clustering& clustering);
double matching_rate(const Clustering& clustering);

// Hill number of order q of the cluster-size distribution. q = 0 counts
// distinct sizes, q = 1 is exp(Shannon entropy), q = kHillInfinity gives
// 1 / max_i P(|c| = i).
double hill_number(const Clustering& clustering, double q);

// Per-cluster indicators; both require a label for every record.
bool cluster_has_homonym(const std::vector<std::string>& members, const NameIndex& names);
bool cluster_has_name_variation(const std::vector<std::string>& members, const NameIndex& names);

double homonymy_rate(const Clustering& clustering, const NameIndex& names);
double name_variation_rate(const Clustering& clustering, const NameIndex& names);

SummaryReport summarize(const Clustering& clustering, const NameIndex* names,
                        const std::vector<double>& hill_grid);

// {"v":1,"universe_size",...,"hill":[{"q","value"}]}; q = infinity is "inf".
std::string summary_report_json(const SummaryReport& report);

enum class SummaryStatistic { kAvgSize, kMatchingRate, kHomonymyRate, kNameVariationRate };

SummaryStatistic parse_summary_statistic(const std::string& name);
std::string to_string(SummaryStatistic which);

// Ratio-of-expectations estimate of a ground-truth summary statistic from a
// weighted cluster sample. Homonymy and name variation need the name index
// over the full record universe. A single-draw sample yields the plain ratio
// with an undefined (NaN) standard deviation, flagged.
Estimate estimate_summary(const ClusterSample& sample, SummaryStatistic which, const NameIndex* names = nullptr);

}  // namespace ereval
