#pragma once

// Read-only HTTP/JSON service over loaded NRDF files.
//
//   GET  /api/files
//   GET  /api/reactors/{fid}
//   GET  /api/reactors/{fid}/{rname}/core?type=T
//   GET  /api/reactors/{fid}/{rname}/assembly/{type}/{row}/{col}
//        ?level=K&feature=F&norm=selected_level|whole_assembly|all_assemblies&time=t
//   GET  /api/reactors/{fid}/{rname}/rod/{arow}/{acol}/{prow}/{pcol}?type=T&time=t
//   GET  /api/tools
//   POST /api/tools/{name}
//   GET  /api/results
//   GET  /api/results/{id}
//
// Grid positions in paths are grid labels (row "B", column "2"). Every body
// is JSON with sorted keys and "schema_version": 1. Errors are
// {"error": {"code", "message"}} with 404 for unknown ids, 400 for bad
// parameters and 422 for analysis shape errors.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "corelens/analysis.hpp"
#include "corelens/model.hpp"

namespace corelens::server {

inline constexpr int kSchemaVersion = 1;

struct LoadedFile {
  std::string id;
  std::string path;
  std::vector<Reactor> reactors;
};

struct Request {
  std::string method = "GET";
  std::string path;  // percent-decoded, without the query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Loaded files plus the analysis results produced during the session.
/// `handle` may be called from several threads at once.
class Session {
 public:
  explicit Session(std::vector<LoadedFile> files,
                   ToolRegistry registry = make_default_registry());

  /// Loads each path as file "f0", "f1", ... Throws on unreadable files.
  static std::unique_ptr<Session> open(const std::vector<std::string>& paths);

  Response handle(const Request& request);

  const std::vector<LoadedFile>& files() const noexcept { return files_; }
  std::size_t result_count() const;

 private:
  struct StoredResult {
    std::string id;
    AnalysisResult result;
  };

  Response route(const Request& request);

  std::vector<LoadedFile> files_;
  ToolRegistry registry_;
  mutable std::mutex results_mutex_;
  std::map<std::string, StoredResult> results_;
  std::uint64_t next_result_ = 1;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;            // 0 picks a free port
  std::string static_dir;     // optional viewer assets, mounted at "/"
};

/// HTTP front end for a Session.
class HttpServer {
 public:
  HttpServer(Session& session, ServeOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; returns the bound port. Throws io-error on failure.
  int bind();
  /// Serves until stop(); call bind() first.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Origins allowed by CORS: http(s)://localhost and loopback addresses, any
/// port.
bool is_local_origin(const std::string& origin);

}  // namespace corelens::server
