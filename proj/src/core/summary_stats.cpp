#include "ereval/summary_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "ereval/error.hpp"

namespace ereval {
namespace {

void require_nonempty(const Clustering& clustering) {
  if (clustering.empty()) fail(ErrorKind::kInvalidInput, "summary statistics need a non-empty clustering");
}

// P(|c| = i) for every size i with nonzero probability, in increasing i.
std::vector<double> size_distribution(const Clustering& clustering) {
  std::map<std::size_t, std::size_t> counts;
  for (ClusterIndex c = 0; c < clustering.num_clusters(); ++c) ++counts[clustering.cluster_size(c)];
  std::vector<double> out;
  out.reserve(counts.size());
  const double total = static_cast<double>(clustering.num_clusters());
  for (const auto& [size, count] : counts) out.push_back(static_cast<double>(count) / total);
  return out;
}

}  // namespace

std::vector<double> default_hill_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(0.25 * i);
  grid.push_back(kHillInfinity);
  return grid;
}

double avg_cluster_size(const Clustering& clustering) {
  require_nonempty(clustering);
  return static_cast<double>(clustering.universe_size()) / static_cast<double>(clustering.num_clusters());
}

double matching_rate(const Clustering& clustering) {
  require_nonempty(clustering);
  std::size_t matched = 0;
  for (ClusterIndex c = 0; c < clustering.num_clusters(); ++c)
    if (clustering.cluster_size(c) > 1) matched += clustering.cluster_size(c);
  return static_cast<double>(matched) / static_cast<double>(clustering.universe_size());
}

double hill_number(const Clustering& clustering, double q) {
  require_nonempty(clustering);
  if (std::isnan(q) || q < 0.0) fail(ErrorKind::kInvalidInput, "Hill number order must be >= 0");
  const auto probs = size_distribution(clustering);
  if (std::isinf(q)) return 1.0 / *std::max_element(probs.begin(), probs.end());
  if (q == 0.0) return static_cast<double>(probs.size());
  if (q == 1.0) {
    double entropy = 0.0;
    for (double p : probs) entropy -= p * std::log(p);
    return std::exp(entropy);
  }
  // exp(log(Σ p^q) / (1 - q)), summed in log space for large q.
  double max_log = -std::numeric_limits<double>::infinity();
  for (double p : probs) max_log = std::max(max_log, q * std::log(p));
  double scaled = 0.0;
  for (double p : probs) scaled += std::exp(q * std::log(p) - max_log);
  return std::exp((max_log + std::log(scaled)) / (1.0 - q));
}

bool cluster_has_homonym(const std::vector<std::string>& members, const NameIndex& names) {
  std::unordered_map<std::string, std::size_t> inside;
  for (const auto& r : members) ++inside[names.label_of(r)];
  for (const auto& [label, count] : inside)
    if (names.label_count(label) > count) return true;
  return false;
}

bool cluster_has_name_variation(const std::vector<std::string>& members, const NameIndex& names) {
  if (members.empty()) return false;
  const std::string& first = names.label_of(members.front());
  for (const auto& r : members)
    if (names.label_of(r) != first) return true;
  return false;
}

double homonymy_rate(const Clustering& clustering, const NameIndex& names) {
  require_nonempty(clustering);
  std::size_t hits = 0;
  for (ClusterIndex c = 0; c < clustering.num_clusters(); ++c)
    hits += cluster_has_homonym(clustering.member_ids(c), names) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(clustering.num_clusters());
}

double name_variation_rate(const Clustering& clustering, const NameIndex& names) {
  require_nonempty(clustering);
  std::size_t hits = 0;
  for (ClusterIndex c = 0; c < clustering.num_clusters(); ++c)
    hits += cluster_has_name_variation(clustering.member_ids(c), names) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(clustering.num_clusters());
}

SummaryReport summarize(const Clustering& clustering, const NameIndex* names, const std::vector<double>& hill_grid) {
  require_nonempty(clustering);
  SummaryReport report;
  report.universe_size = clustering.universe_size();
  report.num_clusters = clustering.num_clusters();
  report.avg_cluster_size = avg_cluster_size(clustering);
  report.matching_rate = matching_rate(clustering);
  if (names) {
    report.homonymy_rate = homonymy_rate(clustering, *names);
    report.name_variation_rate = name_variation_rate(clustering, *names);
  }
  for (double q : hill_grid) report.hill.push_back({q, hill_number(clustering, q)});
  return report;
}

std::string summary_report_json(const SummaryReport& report) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["universe_size"] = report.universe_size;
  j["num_clusters"] = report.num_clusters;
  j["avg_cluster_size"] = report.avg_cluster_size;
  j["matching_rate"] = report.matching_rate;
  j["homonymy_rate"] = report.homonymy_rate ? nlohmann::ordered_json(*report.homonymy_rate) : nullptr;
  j["name_variation_rate"] =
      report.name_variation_rate ? nlohmann::ordered_json(*report.name_variation_rate) : nullptr;
  auto hill = nlohmann::ordered_json::array();
  for (const auto& p : report.hill) {
    nlohmann::ordered_json point;
    point["q"] = std::isinf(p.q) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(p.q);
    point["value"] = p.value;
    hill.push_back(std::move(point));
  }
  j["hill"] = std::move(hill);
  return j.dump(2) + "\n";
}

SummaryStatistic parse_summary_statistic(const std::string& name) {
  if (name == "avg_size" || name == "avg_cluster_size") return SummaryStatistic::kAvgSize;
  if (name == "matching_rate") return SummaryStatistic::kMatchingRate;
  if (name == "homonymy_rate") return SummaryStatistic::kHomonymyRate;
  if (name == "name_variation_rate") return SummaryStatistic::kNameVariationRate;
  fail(ErrorKind::kInvalidInput, "unknown summary statistic: " + name);
}

std::string to_string(SummaryStatistic which) {
  switch (which) {
    case SummaryStatistic::kAvgSize: return "avg_cluster_size";
    case SummaryStatistic::kMatchingRate: return "matching_rate";
    case SummaryStatistic::kHomonymyRate: return "homonymy_rate";
    case SummaryStatistic::kNameVariationRate: return "name_variation_rate";
  }
  return "unknown";
}

Estimate estimate_summary(const ClusterSample& sample, SummaryStatistic which, const NameIndex* names) {
  if (sample.draws.empty()) fail(ErrorKind::kInvalidInput, "empty sample");
  const bool needs_labels = which == SummaryStatistic::kHomonymyRate || which == SummaryStatistic::kNameVariationRate;
  if (needs_labels && !names)
    fail(ErrorKind::kInvalidInput, to_string(which) + " estimation needs the record attribute table");

  std::vector<double> f, g;
  f.reserve(sample.size());
  g.reserve(sample.size());
  for (const auto& d : sample.draws) {
    if (!(d.p_c > 0.0)) fail(ErrorKind::kInvalidInput, "nonpositive sampling weight for cluster " + d.cluster_id);
    const double size = static_cast<double>(d.members.size());
    const double inv_p = 1.0 / d.p_c;
    switch (which) {
      case SummaryStatistic::kAvgSize:
        f.push_back(size * inv_p);
        g.push_back(inv_p);
        break;
      case SummaryStatistic::kMatchingRate:
        f.push_back(size > 1 ? size * inv_p : 0.0);
        g.push_back(size * inv_p);
        break;
      case SummaryStatistic::kHomonymyRate:
        f.push_back(cluster_has_homonym(d.members, *names) ? inv_p : 0.0);
        g.push_back(inv_p);
        break;
      case SummaryStatistic::kNameVariationRate:
        f.push_back(cluster_has_name_variation(d.members, *names) ? inv_p : 0.0);
        g.push_back(inv_p);
        break;
    }
  }

  Estimate est;
  if (sample.size() == 1) {
    est.metric = to_string(which);
    est.point = f[0] / g[0];
    est.std = std::numeric_limits<double>::quiet_NaN();
    est.k = 1;
    est.flags.push_back("single_draw");
  } else {
    est = ratio_estimate(f, g, to_string(which));
  }
  est.design = to_string(sample.design);
  return est;
}

}  // namespace ereval
