#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ereval {

using RecordIndex = std::uint32_t;
using ClusterIndex = std::uint32_t;

// A partition of a record universe. Records and clusters are interned into
// dense indices; ids remain opaque strings. Immutable after construction.
//
// Records keep their input order. Clusters are ordered by first appearance
// of any of their members, and members of a cluster keep record order.
class Clustering {
 public:
  Clustering() = default;

  // Builds from (record_id, cluster_id) pairs. Throws on empty record ids
  // and on duplicate record ids (the duplicate id is named in the message).
  static Clustering from_pairs(const std::vector<std::pair<std::string, std::string>>& rows);

  // Builds from explicit clusters; cluster ids are supplied in parallel.
  static Clustering from_clusters(const std::vector<std::vector<std::string>>& clusters,
                                  std::vector<std::string> cluster_ids = {});

  std::size_t universe_size() const { return records_.size(); }
  std::size_t num_clusters() const { return cluster_ids_.size(); }
  bool empty() const { return records_.empty(); }

  const std::string& record_id(RecordIndex r) const { return records_[r]; }
  const std::string& cluster_id(ClusterIndex c) const { return cluster_ids_[c]; }
  ClusterIndex cluster_of(RecordIndex r) const { return membership_[r]; }
  std::span<const RecordIndex> members(ClusterIndex c) const {
    return {member_storage_.data() + offsets_[c], offsets_[c + 1] - offsets_[c]};
  }
  std::size_t cluster_size(ClusterIndex c) const { return offsets_[c + 1] - offsets_[c]; }

  std::optional<RecordIndex> find_record(const std::string& id) const;
  std::optional<ClusterIndex> find_cluster(const std::string& id) const;

  // Same as find_* but throws kNotFound naming the id.
  RecordIndex record_index(const std::string& id) const;
  ClusterIndex cluster_index(const std::string& id) const;

  std::vector<std::string> member_ids(ClusterIndex c) const;

  // Intersects every cluster with `keep`, dropping empty intersections.
  // Unknown ids are rejected, all of them listed in the message.
  Clustering restrict(const std::vector<std::string>& keep) const;

  // Same partition over the same record ids, with the same cluster labels.
  friend bool operator==(const Clustering& a, const Clustering& b);

  void write_csv(std::ostream& out) const;

 private:
  void build_index();

  std::vector<std::string> records_;
  std::vector<ClusterIndex> membership_;
  std::vector<std::string> cluster_ids_;
  std::vector<std::size_t> offsets_{0};
  std::vector<RecordIndex> member_storage_;
  std::unordered_map<std::string, RecordIndex> record_lookup_;
  std::unordered_map<std::string, ClusterIndex> cluster_lookup_;
};

// Reads a membership CSV with header `record_id,cluster_id`.
Clustering ingest_membership(std::istream& in);
Clustering load_membership(const std::string& path);
void save_membership(const Clustering& clustering, const std::string& path);

// Per-record label plus arbitrary named attributes. Labels are stored in
// canonical form (NFC, trimmed).
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<std::string> attribute_names)
      : names_(std::move(attribute_names)) {}

  // Throws on duplicate record id or arity mismatch.
  void add(const std::string& record, std::string_view label, std::vector<std::string> values = {});

  std::size_t size() const { return records_.size(); }
  bool contains(const std::string& record) const { return lookup_.count(record) != 0; }

  const std::string& label(const std::string& record) const;
  const std::string* find_label(const std::string& record) const;

  // Attribute names, excluding record_id and label.
  const std::vector<std::string>& attribute_names() const { return names_; }
  // Value of `name` for `record`; empty when absent.
  std::string attribute(const std::string& record, std::string_view name) const;
  // All (name, value) pairs including "label" first.
  std::vector<std::pair<std::string, std::string>> row(const std::string& record) const;

  const std::vector<std::string>& records() const { return records_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::string> records_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::string>> values_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Reads `record_id,label,<attr>...`.
AttributeTable ingest_attributes(std::istream& in);
AttributeTable load_attributes(const std::string& path);
void save_attributes(const AttributeTable& attrs, const std::string& path);

// Exact-equality grouping of records by canonical label: n(r) lookups in O(1).
class NameIndex {
 public:
  NameIndex() = default;
  explicit NameIndex(const AttributeTable& attrs);

  std::size_t num_labels() const { return groups_.size(); }
  // Records sharing `record`'s label (including itself). Throws if the
  // record has no label.
  const std::vector<std::string>& same_label(const std::string& record) const;
  // |n(r)| for the label string itself; 0 when unknown.
  std::size_t label_count(const std::string& label) const;
  const std::string& label_of(const std::string& record) const;

  const std::unordered_map<std::string, std::vector<std::string>>& groups() const { return groups_; }

 private:
  std::unordered_map<std::string, std::vector<std::string>> groups_;
  std::unordered_map<std::string, std::string> label_of_;
};

NameIndex name_index(const AttributeTable& attrs);

}  // namespace ereval
