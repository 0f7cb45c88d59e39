#include <algorithm>

#include "doctest.h"
#include "ereval/error.hpp"
#include "ereval/labeling.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace ereval;
using doctest::Approx;

namespace {

// Session over the canonical prediction with seeds r1, r3, r4.
LabelingSession scripted_session() {
  nlohmann::json ev{{"type", "session_created"}, {"v", 1},       {"session_id", "s"},
                    {"design", "pps_record"},    {"k", 3},       {"seed", 0},
                    {"universe_size", 5},        {"snapshot", clustering_fingerprint(fixtures::canonical_prediction())},
                    {"labeler", "ann"},          {"at", 100}};
  ev["tasks"] = nlohmann::json::array({
      {{"id", "s-t1"}, {"seed_record", "r1"}, {"predicted_cluster", {"r1", "r2"}}},
      {{"id", "s-t2"}, {"seed_record", "r3"}, {"predicted_cluster", {"r3", "r4", "r5"}}},
      {{"id", "s-t3"}, {"seed_record", "r4"}, {"predicted_cluster", {"r3", "r4", "r5"}}},
  });
  return LabelingSession::replay({ev.dump()});
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ereval::Error");
  return ErrorKind::kIo;
}

AttributeTable person_labels() {
  AttributeTable a;
  a.add("r1", "Lutgard De Jonghe");
  a.add("r2", "Bo Smith");
  a.add("r3", "L. C. De Jonghe");
  a.add("r4", "Ann Lee");
  a.add("r5", "Ann Lee");
  return a;
}

// Resolves every task of the scripted session to the canonical truth.
void resolve_all(LabelingSession& s) {
  const auto pred = fixtures::canonical_prediction();
  s.begin_task("s-t1", "ann", 200);
  s.apply_edit("s-t1", LabelingSession::EditOp::kAdd, "r3", "ann", 201, &pred);
  s.finalize("s-t1", "ann", 202);
  s.begin_task("s-t2", "ann", 300);
  s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r4", "ann", 301, &pred);
  s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r5", "ann", 302, &pred);
  s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r1", "ann", 303, &pred);
  s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r2", "ann", 304, &pred);
  s.finalize("s-t2", "ann", 305);
  s.begin_task("s-t3", "bob", 400);
  s.apply_edit("s-t3", LabelingSession::EditOp::kRemove, "r3", "bob", 401, &pred);
  s.finalize("s-t3", "bob", 402);
}

}  // namespace

TEST_CASE("create_session freezes predicted clusters of sampled seeds") {
  const auto pred = fixtures::canonical_prediction();
  SessionParams p;
  p.id = "demo";
  p.k = 12;
  p.rng_seed = 5;
  auto [s, ev] = LabelingSession::create(pred, p);
  REQUIRE(s.tasks().size() == 12);
  CHECK(s.tasks()[0].id == "demo-t01");
  for (const auto& t : s.tasks()) {
    const auto expected = pred.member_ids(pred.cluster_of(pred.record_index(t.seed_record)));
    CHECK(t.predicted_cluster == expected);
    CHECK(t.status == TaskStatus::kPending);
  }
  auto [again, ev2] = LabelingSession::create(pred, p);
  CHECK(ev == ev2);
  p.k = 0;
  CHECK(kind_of([&] { LabelingSession::create(pred, p); }) == ErrorKind::kInvalidInput);
  p.k = 2;
  p.design = Design::kUniformCluster;
  CHECK(kind_of([&] { LabelingSession::create(pred, p); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("scripted seeds give the expected predicted clusters") {
  const auto s = scripted_session();
  CHECK(s.task("s-t1").predicted_cluster == std::vector<std::string>{"r1", "r2"});
  CHECK(s.task("s-t2").predicted_cluster == std::vector<std::string>{"r3", "r4", "r5"});
  CHECK(s.task("s-t3").predicted_cluster == std::vector<std::string>{"r3", "r4", "r5"});
}

TEST_CASE("edits on the task seeded at r3") {
  auto s = scripted_session();
  const auto pred = fixtures::canonical_prediction();
  CHECK(kind_of([&] { s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r4", "ann", 1, &pred); }) ==
        ErrorKind::kConflict);  // no lease yet
  s.begin_task("s-t2", "ann", 10);
  CHECK(s.task("s-t2").status == TaskStatus::kInProgress);
  s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r4", "ann", 11, &pred);
  CHECK(s.task("s-t2").removed == std::set<std::string>{"r4"});
  s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r1", "ann", 12, &pred);
  CHECK(s.task("s-t2").added == std::set<std::string>{"r1"});
  s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r1", "ann", 13, &pred);  // idempotent
  CHECK(s.task("s-t2").added.size() == 1);
  try {
    s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r3", "ann", 14, &pred);
    FAIL("seed removed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kQualityControl);
    CHECK(std::string(e.what()) == "seed record is immovable");
  }
  CHECK(kind_of([&] { s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r5", "ann", 15, &pred); }) ==
        ErrorKind::kQualityControl);
  CHECK(kind_of([&] { s.apply_edit("s-t2", LabelingSession::EditOp::kRemove, "r1", "ann", 15, &pred); }) ==
        ErrorKind::kQualityControl);
  CHECK(kind_of([&] { s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "zz", "ann", 15, &pred); }) ==
        ErrorKind::kNotFound);
  s.apply_edit("s-t2", LabelingSession::EditOp::kRetract, "r1", "ann", 16, &pred);
  s.apply_edit("s-t2", LabelingSession::EditOp::kRestore, "r4", "ann", 17, &pred);
  CHECK(s.task("s-t2").added.empty());
  CHECK(s.task("s-t2").removed.empty());
}

TEST_CASE("leases block other labelers until they expire") {
  auto s = scripted_session();
  CHECK(s.next_task(0) == std::optional<std::string>("s-t1"));
  s.begin_task("s-t1", "ann", 100, 60);
  CHECK(s.next_task(120) == std::optional<std::string>("s-t2"));
  CHECK(kind_of([&] { s.begin_task("s-t1", "bob", 120); }) == ErrorKind::kConflict);
  CHECK(s.next_task(161) == std::optional<std::string>("s-t1"));
  s.begin_task("s-t1", "bob", 161);
  CHECK(s.task("s-t1").lease->holder == "bob");
  CHECK(kind_of([&] { s.release_task("s-t1", "ann", 162); }) == ErrorKind::kConflict);
  s.release_task("s-t1", "bob", 162);
  CHECK(!s.task("s-t1").lease);
  CHECK(kind_of([&] { s.finalize("s-t1", "bob", 163); }) == ErrorKind::kConflict);
  CHECK(kind_of([&] { s.task("nope"); }) == ErrorKind::kNotFound);
}

TEST_CASE("finalize, resolve and export the canonical truth") {
  auto s = scripted_session();
  CHECK(kind_of([&] { s.export_benchmark(); }) == ErrorKind::kConflict);
  resolve_all(s);
  const auto& t2 = s.task("s-t2");
  std::vector<std::string> resolved = t2.resolved();
  std::sort(resolved.begin(), resolved.end());
  CHECK(resolved == std::vector<std::string>{"r1", "r2", "r3"});
  CHECK(t2.p_c == Approx(0.6));
  CHECK(s.task("s-t3").p_c == Approx(0.4));
  CHECK(!s.next_task(1000));
  CHECK(kind_of([&] { s.begin_task("s-t1", "ann", 1000); }) == ErrorKind::kConflict);

  const BenchmarkSet set = s.export_benchmark();
  REQUIRE(set.entries.size() == 2);
  CHECK(set.draws() == 3);
  CHECK(set.entries[0].members == std::vector<std::string>{"r1", "r2", "r3"});
  CHECK(set.entries[0].seed_records.size() == 2);
  CHECK(set.entries[1].members == std::vector<std::string>{"r4", "r5"});

  // Re-ingestion reproduces the ErrorTable rows.
  const auto sample = parse_benchmark_sample(benchmark_to_jsonl(set));
  CHECK(sample.size() == 3);
  CHECK(sample.design == Design::kPpsRecord);
  const auto pred = fixtures::canonical_prediction();
  const auto direct = error_table(set.to_sample(), pred);
  const auto again = error_table(sample, pred);
  REQUIRE(direct.size() == again.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(direct[i].cluster_id == again[i].cluster_id);
    CHECK(direct[i].p_c == again[i].p_c);
    CHECK(direct[i].uce == again[i].uce);
  }
  for (const auto& t : s.tasks()) {
    const auto r = t.resolved();
    CHECK(std::find(r.begin(), r.end(), t.seed_record) != r.end());
    for (const auto& x : t.removed) CHECK(t.added.count(x) == 0);
  }
}

TEST_CASE("overlapping resolved clusters fail export") {
  auto s = scripted_session();
  const auto pred = fixtures::canonical_prediction();
  s.begin_task("s-t1", "ann", 1);
  s.finalize("s-t1", "ann", 2);  // {r1,r2}
  s.begin_task("s-t2", "ann", 3);
  s.apply_edit("s-t2", LabelingSession::EditOp::kAdd, "r1", "ann", 4, &pred);
  s.finalize("s-t2", "ann", 5);  // {r1,r3,r4,r5}
  try {
    s.export_benchmark(true);
    FAIL("overlap accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConflict);
    CHECK(std::string(e.what()).find("s-t1") != std::string::npos);
  }
}

TEST_CASE("journal replay of returned events reproduces the state") {
  std::vector<LabelingSession::Event> events;
  auto base = scripted_session();
  const auto pred = fixtures::canonical_prediction();
  events.push_back(base.begin_task("s-t1", "ann", 1));
  events.push_back(base.apply_edit("s-t1", LabelingSession::EditOp::kAdd, "r3", "ann", 2, &pred));
  events.push_back(base.finalize("s-t1", "ann", 3));
  auto copy = scripted_session();
  for (const auto& e : events) copy.apply_event(e);
  CHECK(copy.state_json() == base.state_json());
  CHECK(LabelingSession::from_state_json(base.state_json()).state_json() == base.state_json());
}

TEST_CASE("QC flags") {
  const AttributeTable attrs = person_labels();
  LabelingTask t;
  t.id = "x";
  t.seed_record = "r3";
  t.predicted_cluster = {"r3", "r4", "r5"};
  t.added = {"r1"};
  auto flags = qc_check(t, &attrs);
  CHECK(flags.empty());  // shares "de" and "jonghe", same block
  t.added = {"r2"};
  flags = qc_check(t, &attrs);
  REQUIRE(flags.size() == 2);
  CHECK(flags[0].code == "no_shared_token");
  CHECK(flags[1].code == "different_block");
  CHECK(!has_hard_flags(flags));
  QcOptions quiet;
  quiet.token_overlap = false;
  quiet.blocking_key = nullptr;
  CHECK(qc_check(t, &attrs, quiet).empty());

  t.removed = {"r1"};
  t.added = {"r4"};
  flags = qc_check(t, nullptr);
  CHECK(has_hard_flags(flags));
  std::vector<std::string> codes;
  for (const auto& f : flags) codes.push_back(f.code);
  CHECK(std::find(codes.begin(), codes.end(), "removed_outside_prediction") != codes.end());
  CHECK(std::find(codes.begin(), codes.end(), "added_inside_prediction") != codes.end());
}

TEST_CASE("imported labels are checked against the prediction") {
  fixtures::TempDir dir("labels");
  fixtures::write_file(dir.file("l.jsonl"),
                       "{\"seed_record\":\"r3\",\"removed\":[\"r1\"],\"added\":[]}\n"
                       "{\"seed_record\":\"r1\",\"removed\":[],\"added\":[\"r3\"]}\n");
  const auto labels = load_imported_labels(dir.file("l.jsonl"));
  REQUIRE(labels.size() == 2);
  const auto flags = qc_imported(labels, fixtures::canonical_prediction(), nullptr);
  REQUIRE(flags.size() == 1);
  CHECK(flags[0].severity == QcSeverity::kHard);
  CHECK(flags[0].code == "removed_outside_prediction");
}

TEST_CASE("audit tags and weighted frequencies") {
  ClusterErrors over;
  over.cluster_id = "c1";
  over.oce = 1;
  over.p_c = 0.2;
  ClusterErrors clean = over;
  clean.oce = 0;
  CHECK_THROWS_AS(record_audit_tag(clean, Direction::kOverclustering, "same name"), Error);
  CHECK_THROWS_AS(record_audit_tag(over, Direction::kUnderclustering, "same name"), Error);
  const AuditTag a = record_audit_tag(over, Direction::kOverclustering, "same name");
  CHECK(a.p_c == 0.2);
  ClusterErrors over2 = over;
  over2.cluster_id = "c2";
  over2.p_c = 0.4;
  const AuditTag b = record_audit_tag(over2, Direction::kOverclustering, "nickname");
  const auto single = audit_frequencies({a});
  REQUIRE(single.size() == 1);
  CHECK(single[0].frequency == 1.0);
  const auto freqs = audit_frequencies({a, b});
  REQUIRE(freqs.size() == 2);
  double sum = 0;
  for (const auto& f : freqs) {
    sum += f.frequency;
    if (f.label == "same name") CHECK(f.frequency == Approx(2.0 / 3.0));
    if (f.label == "nickname") CHECK(f.frequency == Approx(1.0 / 3.0));
  }
  CHECK(sum == Approx(1.0));

  fixtures::TempDir dir("tags");
  save_audit_tags({a, b}, dir.file("t.csv"));
  const auto back = load_audit_tags(dir.file("t.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[1].label == "nickname");
  CHECK(back[1].p_c == 0.4);
  CHECK(std::find(default_audit_taxonomy().begin(), default_audit_taxonomy().end(), "same name") !=
        default_audit_taxonomy().end());
}

TEST_CASE("expected-error sessions weight clusters by record weights") {
  const auto pred = fixtures::canonical_prediction();
  SessionParams p;
  p.id = "ee";
  p.design = Design::kExpectedError;
  p.k = 4;
  p.rng_seed = 3;
  p.record_weights = {{"r1", 1.0}, {"r2", 1.0}, {"r3", 2.0}, {"r4", 0.0}, {"r5", 0.0}};
  auto [s, ev] = LabelingSession::create(pred, p);
  for (const auto& t : s.tasks()) CHECK(t.seed_record <= "r3");
  const std::string id = s.tasks()[0].id;
  s.begin_task(id, "ann", 1);
  s.finalize(id, "ann", 2);
  // Both predicted clusters carry half of the total weight.
  CHECK(s.task(id).p_c == Approx(0.5));
}

TEST_CASE("benchmark JSON lines keep explicit cluster ids") {
  const std::string jsonl =
      "{\"cluster_id\":\"t9\",\"seed_record\":\"r5\",\"members\":[\"r5\",\"r4\"],\"p_c\":0.4,\"design\":\"pps_record\"}\n"
      "{\"seed_record\":\"r1\",\"members\":[\"r3\",\"r1\",\"r2\"],\"p_c\":0.6,\"design\":\"pps_record\"}\n";
  const auto s = parse_benchmark_sample(jsonl);
  REQUIRE(s.size() == 2);
  CHECK(s.draws[0].cluster_id == "t9");
  CHECK(s.draws[0].members == std::vector<std::string>{"r4", "r5"});
  CHECK(s.draws[1].cluster_id == "r1");
  const auto back = parse_benchmark_sample(sample_to_jsonl(s));
  CHECK(back.draws[0].cluster_id == "t9");
  CHECK(back.draws[1].p_c == 0.6);
  CHECK_THROWS_AS(parse_benchmark_sample("{not json}\n"), Error);
}
