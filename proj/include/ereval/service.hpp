#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ereval/core_model.hpp"
#include "ereval/error.hpp"
#include "ereval/journal.hpp"
#include "ereval/search.hpp"

namespace httplib {
class Server;
}

namespace ereval {

struct ServiceConfig {
  std::string prediction_path;     // membership CSV of the prediction under evaluation
  std::string attributes_path;     // optional record attributes (labels for search and QC)
  std::string truth_path;          // optional known truth for membership-matrix
  std::string match_probabilities; // optional record_a,record_b,p CSV for expected_error sessions
  std::string journal_dir = "journal";
  std::string static_dir;          // optional UI assets served at /
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;  // bearer token; empty disables auth
  std::int64_t lease_seconds = 900;
  std::function<std::int64_t()> clock;  // seconds; defaults to the system clock
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string authorization;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// JSON API over labeling sessions, search, estimates and audit data. Every
// state change is one journal event; GET handlers only read.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Transport-independent dispatch; the HTTP layer is a thin wrapper.
  HttpResponse handle(const HttpRequest& request);

  // Binds (port 0 picks a free port) and serves until stop().
  int bind();
  void listen_after_bind();
  void stop();

  SessionStore& store() { return *store_; }
  const Clustering& prediction() const { return prediction_; }

 private:
  HttpResponse route(const HttpRequest& request);
  std::int64_t now() const;

  HttpResponse list_sessions(const HttpRequest& req);
  HttpResponse create_session(const HttpRequest& req);
  HttpResponse get_session(const std::string& id);
  HttpResponse list_tasks(const std::string& id, const HttpRequest& req);
  HttpResponse next_task(const std::string& id);
  HttpResponse get_task(const std::string& task_id);
  HttpResponse begin_task(const std::string& task_id, const HttpRequest& req);
  HttpResponse release_task(const std::string& task_id, const HttpRequest& req);
  HttpResponse edit_task(const std::string& task_id, const HttpRequest& req);
  HttpResponse finalize_task(const std::string& task_id, const HttpRequest& req);
  HttpResponse export_session(const std::string& id);
  HttpResponse session_qc(const std::string& id);
  HttpResponse session_audit(const std::string& id);
  HttpResponse search(const HttpRequest& req);
  HttpResponse membership_matrix(const std::string& cluster_id, const HttpRequest& req);
  HttpResponse add_tag(const std::string& cluster_id, const HttpRequest& req);
  HttpResponse estimates(const HttpRequest& req);
  HttpResponse summary_stats();

  ServiceConfig config_;
  Clustering prediction_;
  std::optional<AttributeTable> attrs_;
  std::optional<Clustering> truth_;
  std::unordered_map<std::string, double> error_weights_;
  std::string summary_json_;
  TokenIndex index_;
  std::unique_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> server_;
};

// HTTP status for an error kind.
int http_status(ErrorKind kind);

}  // namespace ereval
