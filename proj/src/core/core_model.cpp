#include "ereval/core_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ereval/csv.hpp"
#include "ereval/error.hpp"
#include "ereval/text.hpp"

namespace ereval {

Clustering Clustering::from_pairs(const std::vector<std::pair<std::string, std::string>>& rows) {
  Clustering out;
  out.records_.reserve(rows.size());
  out.membership_.reserve(rows.size());
  out.record_lookup_.reserve(rows.size());
  for (const auto& [record, cluster] : rows) {
    if (record.empty()) fail(ErrorKind::kInvalidInput, "empty record id");
    if (cluster.empty()) fail(ErrorKind::kInvalidInput, "empty cluster id for record " + record);
    auto [it, inserted] = out.record_lookup_.emplace(record, static_cast<RecordIndex>(out.records_.size()));
    if (!inserted) fail(ErrorKind::kInvalidInput, "duplicate record: " + record);
    auto [cit, cnew] = out.cluster_lookup_.emplace(cluster, static_cast<ClusterIndex>(out.cluster_ids_.size()));
    if (cnew) out.cluster_ids_.push_back(cluster);
    out.records_.push_back(record);
    out.membership_.push_back(cit->second);
  }
  out.build_index();
  return out;
}

Clustering Clustering::from_clusters(const std::vector<std::vector<std::string>>& clusters,
                                     std::vector<std::string> cluster_ids) {
  if (!cluster_ids.empty() && cluster_ids.size() != clusters.size())
    fail(ErrorKind::kInvalidInput, "cluster id count does not match cluster count");
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) fail(ErrorKind::kInvalidInput, "empty cluster");
    const std::string id = cluster_ids.empty() ? "c" + std::to_string(c) : cluster_ids[c];
    for (const auto& r : clusters[c]) rows.emplace_back(r, id);
  }
  return from_pairs(rows);
}

void Clustering::build_index() {
  std::vector<std::size_t> counts(cluster_ids_.size(), 0);
  for (ClusterIndex c : membership_) ++counts[c];
  offsets_.assign(cluster_ids_.size() + 1, 0);
  for (std::size_t c = 0; c < counts.size(); ++c) offsets_[c + 1] = offsets_[c] + counts[c];
  member_storage_.assign(records_.size(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (RecordIndex r = 0; r < membership_.size(); ++r) member_storage_[cursor[membership_[r]]++] = r;
}

std::optional<RecordIndex> Clustering::find_record(const std::string& id) const {
  auto it = record_lookup_.find(id);
  if (it == record_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<ClusterIndex> Clustering::find_cluster(const std::string& id) const {
  auto it = cluster_lookup_.find(id);
  if (it == cluster_lookup_.end()) return std::nullopt;
  return it->second;
}

RecordIndex Clustering::record_index(const std::string& id) const {
  auto r = find_record(id);
  if (!r) fail(ErrorKind::kNotFound, "unknown record: " + id);
  return *r;
}

ClusterIndex Clustering::cluster_index(const std::string& id) const {
  auto c = find_cluster(id);
  if (!c) fail(ErrorKind::kNotFound, "unknown cluster: " + id);
  return *c;
}

std::vector<std::string> Clustering::member_ids(ClusterIndex c) const {
  std::vector<std::string> out;
  out.reserve(cluster_size(c));
  for (RecordIndex r : members(c)) out.push_back(records_[r]);
  return out;
}

Clustering Clustering::restrict(const std::vector<std::string>& keep) const {
  std::vector<char> kept(records_.size(), 0);
  std::vector<std::string> unknown;
  for (const auto& id : keep) {
    auto r = find_record(id);
    if (!r) {
      unknown.push_back(id);
      continue;
    }
    kept[*r] = 1;
  }
  if (!unknown.empty()) {
    std::string msg = "restrict: unknown record ids:";
    for (const auto& id : unknown) msg += " " + id;
    fail(ErrorKind::kInvalidInput, msg);
  }
  std::vector<std::pair<std::string, std::string>> rows;
  for (RecordIndex r = 0; r < records_.size(); ++r)
    if (kept[r]) rows.emplace_back(records_[r], cluster_ids_[membership_[r]]);
  return from_pairs(rows);
}

bool operator==(const Clustering& a, const Clustering& b) {
  if (a.universe_size() != b.universe_size() || a.num_clusters() != b.num_clusters()) return false;
  for (RecordIndex r = 0; r < a.universe_size(); ++r) {
    auto other = b.find_record(a.record_id(r));
    if (!other) return false;
    if (a.cluster_id(a.cluster_of(r)) != b.cluster_id(b.cluster_of(*other))) return false;
  }
  return true;
}

void Clustering::write_csv(std::ostream& out) const {
  out << "record_id,cluster_id\n";
  for (RecordIndex r = 0; r < records_.size(); ++r)
    csv::write_row(out, {records_[r], cluster_ids_[membership_[r]]});
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  return out;
}

void strip_bom(std::string& s) {
  if (s.size() >= 3 && s.compare(0, 3, "\xEF\xBB\xBF") == 0) s.erase(0, 3);
}

}  // namespace

Clustering ingest_membership(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) fail(ErrorKind::kInvalidInput, "empty membership file");
  if (!fields.empty()) strip_bom(fields[0]);
  if (fields.size() != 2 || fields[0] != "record_id" || fields[1] != "cluster_id")
    fail(ErrorKind::kInvalidInput, "membership header must be `record_id,cluster_id`");
  std::vector<std::pair<std::string, std::string>> rows;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 2)
      fail(ErrorKind::kInvalidInput, "membership line " + std::to_string(reader.line()) + ": expected 2 fields");
    rows.emplace_back(std::move(fields[0]), std::move(fields[1]));
  }
  if (rows.empty()) fail(ErrorKind::kInvalidInput, "empty membership file");
  return Clustering::from_pairs(rows);
}

Clustering load_membership(const std::string& path) {
  auto in = open_input(path);
  return ingest_membership(in);
}

void save_membership(const Clustering& clustering, const std::string& path) {
  auto out = open_output(path);
  clustering.write_csv(out);
}

void AttributeTable::add(const std::string& record, std::string_view label, std::vector<std::string> values) {
  if (record.empty()) fail(ErrorKind::kInvalidInput, "empty record id in attribute table");
  if (values.size() > names_.size())
    fail(ErrorKind::kInvalidInput, "too many attribute values for record " + record);
  values.resize(names_.size());
  auto [it, inserted] = lookup_.emplace(record, records_.size());
  if (!inserted) fail(ErrorKind::kInvalidInput, "duplicate record: " + record);
  records_.push_back(record);
  labels_.push_back(text::normalize_label(label));
  values_.push_back(std::move(values));
}

const std::string* AttributeTable::find_label(const std::string& record) const {
  auto it = lookup_.find(record);
  return it == lookup_.end() ? nullptr : &labels_[it->second];
}

const std::string& AttributeTable::label(const std::string& record) const {
  const std::string* l = find_label(record);
  if (!l) fail(ErrorKind::kInvalidInput, "missing label for record " + record);
  return *l;
}

std::string AttributeTable::attribute(const std::string& record, std::string_view name) const {
  auto it = lookup_.find(record);
  if (it == lookup_.end()) return {};
  if (name == "label") return labels_[it->second];
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return values_[it->second][i];
  return {};
}

std::vector<std::pair<std::string, std::string>> AttributeTable::row(const std::string& record) const {
  std::vector<std::pair<std::string, std::string>> out;
  auto it = lookup_.find(record);
  if (it == lookup_.end()) return out;
  out.emplace_back("label", labels_[it->second]);
  for (std::size_t i = 0; i < names_.size(); ++i) out.emplace_back(names_[i], values_[it->second][i]);
  return out;
}

AttributeTable ingest_attributes(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) fail(ErrorKind::kInvalidInput, "empty attribute file");
  if (!fields.empty()) strip_bom(fields[0]);
  if (fields.size() < 2 || fields[0] != "record_id" || fields[1] != "label")
    fail(ErrorKind::kInvalidInput, "attribute header must start with `record_id,label`");
  AttributeTable table(std::vector<std::string>(fields.begin() + 2, fields.end()));
  const std::size_t arity = fields.size();
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != arity)
      fail(ErrorKind::kInvalidInput, "attribute line " + std::to_string(reader.line()) + ": expected " +
                                         std::to_string(arity) + " fields");
    std::string record = std::move(fields[0]);
    std::string label = std::move(fields[1]);
    table.add(record, label, std::vector<std::string>(fields.begin() + 2, fields.end()));
  }
  return table;
}

AttributeTable load_attributes(const std::string& path) {
  auto in = open_input(path);
  return ingest_attributes(in);
}

void save_attributes(const AttributeTable& attrs, const std::string& path) {
  auto out = open_output(path);
  std::vector<std::string> header{"record_id", "label"};
  header.insert(header.end(), attrs.attribute_names().begin(), attrs.attribute_names().end());
  csv::write_row(out, header);
  for (const auto& r : attrs.records()) {
    std::vector<std::string> fields{r};
    for (auto& [name, value] : attrs.row(r)) fields.push_back(value);
    csv::write_row(out, fields);
  }
}

NameIndex::NameIndex(const AttributeTable& attrs) {
  label_of_.reserve(attrs.size());
  for (const auto& r : attrs.records()) {
    const std::string& l = attrs.label(r);
    groups_[l].push_back(r);
    label_of_.emplace(r, l);
  }
}

const std::string& NameIndex::label_of(const std::string& record) const {
  auto it = label_of_.find(record);
  if (it == label_of_.end()) fail(ErrorKind::kInvalidInput, "missing label for record " + record);
  return it->second;
}

const std::vector<std::string>& NameIndex::same_label(const std::string& record) const {
  return groups_.at(label_of(record));
}

std::size_t NameIndex::label_count(const std::string& label) const {
  auto it = groups_.find(label);
  return it == groups_.end() ? 0 : it->second.size();
}

NameIndex name_index(const AttributeTable& attrs) { return NameIndex(attrs); }

}  // namespace ereval
