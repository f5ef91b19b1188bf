#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "archviz/graph.hpp"
#include "archviz/ingest.hpp"
#include "archviz/pipeline.hpp"

namespace archviz {

struct Document {
  std::string id;
  std::string source;
  ModelFormat format = ModelFormat::kAuto;
  long revision = 1;
  ViewState view;
  AggregationState aggregations;
  StyleConfig style;

  RenderConfig config() const { return {view, aggregations, style, 0}; }
};

nlohmann::json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

/// One JSON file per document under a directory.
class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<Document> load(const std::string& id) const;
  /// Atomic replace (temporary file, then rename).
  void save(const Document& doc) const;
  bool remove(const std::string& id) const;
  static bool valid_id(const std::string& id);

 private:
  std::filesystem::path dir_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Routes the REST API. Safe to call from many threads: mutations of one
/// document are serialized, reads see a consistent snapshot.
class Service {
 public:
  explicit Service(std::filesystem::path data_dir, std::string cors_origin = "*");

  ApiResponse handle(const ApiRequest& request);

 private:
  struct Entry {
    std::shared_mutex lock;
    std::optional<Document> doc;
    std::optional<NetworkGraph> graph;
  };

  DocumentStore store_;
  std::string cors_origin_;
  std::mutex entries_lock_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;

  /// Cached entry for `id`, loaded from disk on first use; null if unknown.
  std::shared_ptr<Entry> entry(const std::string& id);
  std::string new_id();

  ApiResponse create(const ApiRequest& r);
  ApiResponse get(const std::string& id);
  ApiResponse render(const std::string& id, const ApiRequest& r);
  ApiResponse patch(const std::string& id, const ApiRequest& r);
  ApiResponse remove(const std::string& id);
  ApiResponse render_stateless(const ApiRequest& r);
};

/// ETag of a rendered document state.
std::string document_etag(const Document& doc, const std::string& output_format);

/// Warnings about a freshly ingested graph (unknown dims, pass-through types).
std::vector<std::string> ingest_warnings(const NetworkGraph& graph);

/// Blocks serving HTTP until the process is stopped.
int run_server(Service& service, const std::string& host, int port);

}  // namespace archviz
