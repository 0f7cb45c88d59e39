#include "ereval/error_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "ereval/csv.hpp"
#include "ereval/error.hpp"

namespace ereval {
namespace {

// Members of one true cluster resolved to prediction indices.
std::vector<RecordIndex> resolve(const std::vector<std::string>& truth_cluster, const Clustering& prediction) {
  if (truth_cluster.empty()) fail(ErrorKind::kInvalidInput, "empty true cluster");
  std::vector<RecordIndex> out;
  out.reserve(truth_cluster.size());
  for (const auto& id : truth_cluster) {
    auto r = prediction.find_record(id);
    if (!r) fail(ErrorKind::kInvalidInput, "record absent from prediction: " + id);
    out.push_back(*r);
  }
  std::vector<RecordIndex> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) fail(ErrorKind::kInvalidInput, "duplicate record in true cluster: " + prediction.record_id(*dup));
  return out;
}

// |c ∩ ĉ| for every predicted cluster ĉ touched by c, keyed by ĉ.
std::unordered_map<ClusterIndex, std::size_t> overlaps(std::span<const RecordIndex> members, const Clustering& prediction) {
  std::unordered_map<ClusterIndex, std::size_t> counts;
  for (RecordIndex r : members) ++counts[prediction.cluster_of(r)];
  return counts;
}

ClusterErrors accumulate(std::span<const RecordIndex> members, const Clustering& prediction, std::string cluster_id,
                         double p_c) {
  const auto counts = overlaps(members, prediction);
  const double size = static_cast<double>(members.size());
  ClusterErrors row;
  row.cluster_id = std::move(cluster_id);
  row.size = members.size();
  row.p_c = p_c;
  for (RecordIndex r : members) {
    const ClusterIndex pc = prediction.cluster_of(r);
    const double pred_size = static_cast<double>(prediction.cluster_size(pc));
    const double inter = static_cast<double>(counts.at(pc));
    const double oce = pred_size - inter;
    const double uce = size - inter;
    row.ei += (oce > 0 || uce > 0) ? 1.0 : 0.0;
    row.sde += pred_size - size;
    row.oce += oce;
    row.uce += uce;
    row.roce += oce / pred_size;
    row.ruce += uce / size;
    row.h += std::log(inter / pred_size);
  }
  row.ei /= size;
  row.sde /= size;
  row.oce /= size;
  row.uce /= size;
  row.roce /= size;
  row.ruce /= size;
  row.h /= size;
  return row;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::kInvalidInput, "error table line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

const std::vector<std::string> kColumns{"cluster_id", "size", "p_c", "EI", "SDE", "OCE", "UCE", "ROCE", "RUCE", "H"};

}  // namespace

std::vector<RecordErrors> record_errors(const std::vector<std::string>& truth_cluster, const Clustering& prediction) {
  const auto members = resolve(truth_cluster, prediction);
  const auto counts = overlaps(members, prediction);
  const std::size_t size = members.size();
  std::vector<RecordErrors> out;
  out.reserve(size);
  for (RecordIndex r : members) {
    const ClusterIndex pc = prediction.cluster_of(r);
    const std::size_t pred_size = prediction.cluster_size(pc);
    const std::size_t inter = counts.at(pc);
    RecordErrors e;
    e.record = prediction.record_id(r);
    e.oce = pred_size - inter;
    e.uce = size - inter;
    e.sde = static_cast<long>(pred_size) - static_cast<long>(size);
    e.ei = (e.oce > 0 || e.uce > 0) ? 1 : 0;
    e.roce = static_cast<double>(e.oce) / static_cast<double>(pred_size);
    e.ruce = static_cast<double>(e.uce) / static_cast<double>(size);
    e.h = std::log(static_cast<double>(inter) / static_cast<double>(pred_size));
    out.push_back(std::move(e));
  }
  return out;
}

ClusterErrors cluster_errors(const std::vector<std::string>& truth_cluster, const Clustering& prediction,
                             std::string cluster_id, double p_c) {
  const auto members = resolve(truth_cluster, prediction);
  return accumulate(members, prediction, std::move(cluster_id), p_c);
}

ErrorTable error_table(const ClusterSample& sample, const Clustering& prediction) {
  std::vector<std::size_t> order(sample.draws.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.draws[a].cluster_id < sample.draws[b].cluster_id;
  });
  ErrorTable table;
  table.reserve(order.size());
  for (std::size_t i : order) {
    const Draw& d = sample.draws[i];
    if (!(d.p_c > 0.0) || !std::isfinite(d.p_c))
      fail(ErrorKind::kInvalidInput, "nonpositive sampling weight for cluster " + d.cluster_id);
    table.push_back(cluster_errors(d.members, prediction, d.cluster_id, d.p_c));
  }
  return table;
}

ErrorTable census_error_table(const Clustering& truth, const Clustering& prediction, Design design) {
  if (truth.universe_size() != prediction.universe_size())
    fail(ErrorKind::kInvalidInput, "truth and prediction cover different record universes");
  std::vector<RecordIndex> to_pred(truth.universe_size());
  for (RecordIndex r = 0; r < truth.universe_size(); ++r) {
    auto p = prediction.find_record(truth.record_id(r));
    if (!p) fail(ErrorKind::kInvalidInput, "record absent from prediction: " + truth.record_id(r));
    to_pred[r] = *p;
  }
  const double n = static_cast<double>(truth.universe_size());
  ErrorTable table;
  table.reserve(truth.num_clusters());
  std::vector<RecordIndex> members;
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c) {
    members.clear();
    for (RecordIndex r : truth.members(c)) members.push_back(to_pred[r]);
    const double p = design == Design::kPpsRecord ? static_cast<double>(members.size()) / n : 1.0;
    table.push_back(accumulate(members, prediction, truth.cluster_id(c), p));
  }
  return table;
}

void write_error_table(std::ostream& out, const ErrorTable& table) {
  csv::write_row(out, kColumns);
  for (const auto& row : table) {
    csv::write_row(out, {row.cluster_id, std::to_string(row.size), format_double(row.p_c), format_double(row.ei),
                         format_double(row.sde), format_double(row.oce), format_double(row.uce),
                         format_double(row.roce), format_double(row.ruce), format_double(row.h)});
  }
}

ErrorTable read_error_table(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields != kColumns)
    fail(ErrorKind::kInvalidInput, "error table header must be cluster_id,size,p_c,EI,SDE,OCE,UCE,ROCE,RUCE,H");
  ErrorTable table;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    const std::size_t line = reader.line();
    if (fields.size() != kColumns.size())
      fail(ErrorKind::kInvalidInput, "error table line " + std::to_string(line) + ": expected 10 fields");
    ClusterErrors row;
    row.cluster_id = fields[0];
    const double size = parse_double(fields[1], line);
    if (!(size >= 1.0) || size != std::floor(size))
      fail(ErrorKind::kInvalidInput, "error table line " + std::to_string(line) + ": bad cluster size");
    row.size = static_cast<std::size_t>(size);
    row.p_c = parse_double(fields[2], line);
    if (!(row.p_c > 0.0)) fail(ErrorKind::kInvalidInput, "error table line " + std::to_string(line) + ": nonpositive p_c");
    row.ei = parse_double(fields[3], line);
    row.sde = parse_double(fields[4], line);
    row.oce = parse_double(fields[5], line);
    row.uce = parse_double(fields[6], line);
    row.roce = parse_double(fields[7], line);
    row.ruce = parse_double(fields[8], line);
    row.h = parse_double(fields[9], line);
    table.push_back(std::move(row));
  }
  return table;
}

void save_error_table(const ErrorTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  write_error_table(out, table);
}

ErrorTable load_error_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  return read_error_table(in);
}

}  // namespace ereval
