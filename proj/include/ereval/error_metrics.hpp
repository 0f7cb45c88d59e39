#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ereval/core_model.hpp"
#include "ereval/sampling.hpp"

namespace ereval {

struct RecordErrors {
  std::string record;
  int ei = 0;            // 1 iff the predicted cluster differs from the true one
  long sde = 0;          // |ĉ(r)| - |c(r)|
  std::size_t oce = 0;   // |ĉ(r) \ c(r)|
  std::size_t uce = 0;   // |c(r) \ ĉ(r)|
  double roce = 0.0;     // oce / |ĉ(r)|
  double ruce = 0.0;     // uce / |c(r)|
  double h = 0.0;        // ln(|c(r) ∩ ĉ(r)| / |ĉ(r)|)
};

// One ErrorTable row: record-wise metrics averaged over a true cluster.
struct ClusterErrors {
  std::string cluster_id;
  std::size_t size = 0;
  double p_c = 1.0;
  double ei = 0.0;
  double sde = 0.0;
  double oce = 0.0;
  double uce = 0.0;
  double roce = 0.0;
  double ruce = 0.0;
  double h = 0.0;
};

using ErrorTable = std::vector<ClusterErrors>;

// Record-wise errors for every member of a true cluster. Every member must
// exist in the prediction; a missing record is an error naming it.
std::vector<RecordErrors> record_errors(const std::vector<std::string>& truth_cluster, const Clustering& prediction);

ClusterErrors cluster_errors(const std::vector<std::string>& truth_cluster, const Clustering& prediction,
                             std::string cluster_id = {}, double p_c = 1.0);

// One row per draw (duplicates kept), sorted by cluster id then draw order.
ErrorTable error_table(const ClusterSample& sample, const Clustering& prediction);

// Rows for every cluster of a fully known truth clustering, in cluster order.
// Uses index arithmetic instead of id lookups when both clusterings share
// the same record universe.
ErrorTable census_error_table(const Clustering& truth, const Clustering& prediction, Design design);

void write_error_table(std::ostream& out, const ErrorTable& table);
ErrorTable read_error_table(std::istream& in);
void save_error_table(const ErrorTable& table, const std::string& path);
ErrorTable load_error_table(const std::string& path);

}  // namespace ereval
