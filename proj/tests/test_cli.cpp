#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ereval/ereval.h"
#include "httplib.h"
#include "json.hpp"

using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

struct Workspace {
  std::filesystem::path path;
  Workspace() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("ereval-cli-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
    write("truth.csv", "record_id,cluster_id\nr1,t1\nr2,t1\nr3,t1\nr4,t2\nr5,t2\n");
    write("pred.csv", "record_id,cluster_id\nr1,p1\nr2,p1\nr3,p2\nr4,p2\nr5,p2\n");
    write("attrs.csv", "record_id,label\nr1,Lutgard De Jonghe\nr2,Lutgard Jonghe\nr3,L. C. De Jonghe\n"
                       "r4,Ann Lee\nr5,Ann Lee\n");
  }
  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& n) const { return (path / n).string(); }
  void write(const std::string& n, const std::string& content) const { std::ofstream(file(n)) << content; }
  std::string read(const std::string& n) const {
    std::ifstream in(file(n));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Result run(const std::string& args) const {
    const std::string err = file("stderr.txt");
    const std::string cmd = std::string(EREVAL_CLI_PATH) + " " + args + " 2>" + err;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, read("stderr.txt")};
  }
};

}  // namespace

TEST_CASE("stats on a membership file") {
  Workspace w;
  const Result r = w.run("stats --membership " + w.file("truth.csv") + " --attributes " + w.file("attrs.csv"));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json j = json::parse(r.out);
  CHECK(j["avg_cluster_size"] == 2.5);
  CHECK(j["matching_rate"] == 1.0);
  CHECK(j["hill"].size() == 10);
  const Result pretty = w.run("stats --membership " + w.file("truth.csv") + " --pretty");
  CHECK(pretty.code == 0);
  CHECK(pretty.out.find("avg") != std::string::npos);
  const Result grid = w.run("stats --membership " + w.file("truth.csv") + " --hill-grid 0,inf");
  CHECK(json::parse(grid.out)["hill"][1]["q"] == "inf");
}

TEST_CASE("exit codes") {
  Workspace w;
  CHECK(w.run("stats --bogus").code == 1);
  CHECK(w.run("").code == 1);
  CHECK(w.run("stats --membership " + w.file("missing.csv")).code == 2);
  w.write("dup.csv", "record_id,cluster_id\nr1,a\nr1,b\n");
  const Result dup = w.run("stats --membership " + w.file("dup.csv"));
  CHECK(dup.code == 1);
  CHECK(dup.err.find("duplicate record: r1") != std::string::npos);
  w.write("one.jsonl", "{\"seed_record\":\"r1\",\"members\":[\"r1\",\"r2\",\"r3\"],\"p_c\":0.6,\"design\":\"pps_record\"}\n");
  const Result degenerate = w.run("estimate --truth-sample " + w.file("one.jsonl") + " --prediction " + w.file("pred.csv"));
  CHECK(degenerate.code == 2);
  CHECK(degenerate.err.find("insufficient sample") != std::string::npos);
  CHECK(w.run("stats --truth-sample " + w.file("one.jsonl") + " --statistics hill").code == 1);
}

TEST_CASE("sample is deterministic given a seed and reports a drawn seed") {
  Workspace w;
  const std::string base = "sample --membership " + w.file("truth.csv") + " --k 20";
  const Result a = w.run(base + " --seed 5");
  const Result b = w.run(base + " --seed 5");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 20);
  const Result drawn = w.run(base);
  CHECK(drawn.code == 0);
  CHECK(drawn.err.rfind("seed: ", 0) == 0);
  const std::string seed = drawn.err.substr(6, drawn.err.find('\n') - 6);
  CHECK(w.run(base + " --seed " + seed).out == drawn.out);
}

TEST_CASE("estimate from a sample file and from an error table") {
  Workspace w;
  REQUIRE(w.run("sample --membership " + w.file("truth.csv") + " --k 50 --seed 3 --out " + w.file("s.jsonl")).code == 0);
  const Result est = w.run("estimate --truth-sample " + w.file("s.jsonl") + " --prediction " + w.file("pred.csv") +
                           " --error-table-out " + w.file("t.csv"));
  REQUIRE_MESSAGE(est.code == 0, est.err);
  const json j = json::parse(est.out);
  CHECK(j["estimates"].size() == 9);
  const Result from_table = w.run("estimate --error-table " + w.file("t.csv") + " --prediction " + w.file("pred.csv") +
                                  " --design pps_record");
  REQUIRE_MESSAGE(from_table.code == 0, from_table.err);
  CHECK(from_table.out == est.out);
  const Result pretty = w.run("estimate --truth-sample " + w.file("s.jsonl") + " --prediction " + w.file("pred.csv") +
                              " --metrics pairwise_precision --pretty");
  CHECK(pretty.out.find("pairwise_precision") != std::string::npos);
}

TEST_CASE("qc and audit-report") {
  Workspace w;
  w.write("labels.jsonl", "{\"seed_record\":\"r3\",\"removed\":[\"r1\"],\"added\":[]}\n");
  const Result hard = w.run("qc --labels " + w.file("labels.jsonl") + " --prediction " + w.file("pred.csv"));
  CHECK(hard.code == 1);
  CHECK(json::parse(hard.out)["hard"] == true);
  w.write("ok.jsonl", "{\"seed_record\":\"r3\",\"removed\":[\"r4\",\"r5\"],\"added\":[\"r1\",\"r2\"]}\n");
  const Result soft = w.run("qc --labels " + w.file("ok.jsonl") + " --prediction " + w.file("pred.csv") +
                            " --attributes " + w.file("attrs.csv"));
  CHECK(soft.code == 0);
  w.write("tags.csv", "cluster_id,direction,label,note,p_c\nc1,overclustering,same name,,0.2\n"
                      "c2,overclustering,nickname,,0.4\n");
  const Result audit = w.run("audit-report --tags " + w.file("tags.csv"));
  REQUIRE(audit.code == 0);
  const json freqs = json::parse(audit.out)["frequencies"];
  REQUIRE(freqs.size() == 2);
  CHECK(freqs[0]["frequency"].get<double>() + freqs[1]["frequency"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("simulate is reproducible") {
  Workspace w;
  const std::string args = "simulate --generate --pairs 30 --singletons 200 --sizes 20,40 --reps 30 --seed 2";
  REQUIRE(w.run(args + " --threads 2 --out " + w.file("a.json") + " --csv " + w.file("a.csv")).code == 0);
  REQUIRE(w.run(args + " --threads 1 --out " + w.file("b.json")).code == 0);
  CHECK(w.read("a.json") == w.read("b.json"));
  CHECK(json::parse(w.read("a.json"))["cells"].size() == 8);
  CHECK(w.read("a.csv").rfind("metric,design,k", 0) == 0);
}

TEST_CASE("CLI estimates are byte-identical to the service") {
  Workspace w;
  REQUIRE(w.run("sample --membership " + w.file("pred.csv") + " --k 5 --seed 11 --journal " + w.file("journal") +
                " --session s1 --labeler ann")
              .code == 0);
  const json cfg{{"prediction", w.file("pred.csv")}, {"journal", w.file("journal")}, {"port", 0}};
  ereval_service* svc = nullptr;
  int port = 0;
  REQUIRE(ereval_service_start(cfg.dump().c_str(), &svc, &port) == EREVAL_OK);
  httplib::Client c("127.0.0.1", port);
  // Every task resolves to the truth {{r1,r2,r3},{r4,r5}}.
  const std::map<std::string, std::vector<std::pair<std::string, std::string>>> edits{
      {"r1", {{"add", "r3"}}}, {"r2", {{"add", "r3"}}},
      {"r3", {{"remove", "r4"}, {"remove", "r5"}, {"add", "r1"}, {"add", "r2"}}},
      {"r4", {{"remove", "r3"}}}, {"r5", {{"remove", "r3"}}}};
  for (;;) {
    auto next = c.Get("/sessions/s1/tasks/next");
    REQUIRE(next);
    const json task = json::parse(next->body)["task"];
    if (task.is_null()) break;
    const std::string id = task["id"];
    REQUIRE(c.Post("/tasks/" + id + "/begin", R"({"labeler":"ann"})", "application/json")->status == 200);
    for (const auto& [op, rec] : edits.at(task["seed_record"])) {
      const json body{{"labeler", "ann"}, {"op", op}, {"record", rec}};
      REQUIRE(c.Post("/tasks/" + id + "/edits", body.dump(), "application/json")->status == 200);
    }
    REQUIRE(c.Post("/tasks/" + id + "/finalize", R"({"labeler":"ann"})", "application/json")->status == 200);
  }
  auto exported = c.Get("/sessions/s1/export");
  REQUIRE(exported);
  REQUIRE(exported->status == 200);
  w.write("bench.jsonl", exported->body);
  auto served = c.Get("/estimates?session=s1&metrics=all");
  REQUIRE(served);
  REQUIRE(served->status == 200);
  ereval_service_stop(svc);

  const Result cli = w.run("estimate --truth-sample " + w.file("bench.jsonl") + " --prediction " + w.file("pred.csv"));
  REQUIRE_MESSAGE(cli.code == 0, cli.err);
  CHECK(cli.out == served->body);

  const Result qc = w.run("qc --journal " + w.file("journal") + " --session s1");
  CHECK(qc.code == 0);
}
