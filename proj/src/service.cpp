#include "archviz/service.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "archviz/error.hpp"

namespace archviz {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_name(ModelFormat f) {
  switch (f) {
    case ModelFormat::kKeras: return "keras";
    case ModelFormat::kNeutral: return "neutral";
    default: return "auto";
  }
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump(2) + "\n";
  return r;
}

ApiResponse error_response(int status, const std::string& kind, const std::string& message) {
  return json_response(status, error_to_json(kind, message));
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("request body is not valid JSON: ") + e.what());
  }
}

json summary(const Document& doc, const NetworkGraph& graph) {
  json s = inspect_graph(graph);
  return {{"id", doc.id},
          {"revision", doc.revision},
          {"format", format_name(doc.format)},
          {"graph", {{"nodes", s["nodes"]}, {"edges", s["edges"]}, {"types", s["types"]}}},
          {"config", config_to_json(doc.config())}};
}

/// Splits "/api/documents/abc/render" into its non-empty segments.
std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/'))
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace

json document_to_json(const Document& doc) {
  return {{"id", doc.id},
          {"revision", doc.revision},
          {"format", format_name(doc.format)},
          {"source", doc.source},
          {"view", view_to_json(doc.view)},
          {"aggregations", aggregations_to_json(doc.aggregations)},
          {"style", style_to_json(doc.style)}};
}

Document document_from_json(const json& j) {
  Document d;
  d.id = j.at("id").get<std::string>();
  d.revision = j.at("revision").get<long>();
  d.format = parse_model_format(j.at("format").get<std::string>());
  d.source = j.at("source").get<std::string>();
  d.view = view_from_json(j.at("view"));
  d.aggregations = aggregations_from_json(j.at("aggregations"));
  d.style = style_from_json(j.at("style"));
  return d;
}

DocumentStore::DocumentStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

bool DocumentStore::valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  return true;
}

std::optional<Document> DocumentStore::load(const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  std::ifstream in(dir_ / (id + ".json"));
  if (!in) return std::nullopt;
  return document_from_json(json::parse(in));
}

void DocumentStore::save(const Document& doc) const {
  const fs::path final_path = dir_ / (doc.id + ".json");
  const fs::path tmp = dir_ / (doc.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << document_to_json(doc).dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

bool DocumentStore::remove(const std::string& id) const {
  return valid_id(id) && fs::remove(dir_ / (id + ".json"));
}

std::string document_etag(const Document& doc, const std::string& output_format) {
  const json state = {{"source", doc.source},
                      {"format", format_name(doc.format)},
                      {"view", view_to_json(doc.view)},
                      {"aggregations", aggregations_to_json(doc.aggregations)},
                      {"style", style_to_json(doc.style)},
                      {"output", output_format}};
  return "\"" + content_hash(state.dump()) + "\"";
}

std::vector<std::string> ingest_warnings(const NetworkGraph& graph) {
  std::vector<std::string> out;
  for (const auto& n : graph.nodes()) {
    if (!n.out_shape.fully_known())
      out.push_back(n.id + ": output has unknown spatial dims (" + n.out_shape.spatial_label() + ")");
    if (n.params.count("output_shape"))
      out.push_back(n.id + ": shape of '" + n.layer_type + "' taken from its declared output_shape");
  }
  return out;
}

Service::Service(fs::path data_dir, std::string cors_origin)
    : store_(std::move(data_dir)), cors_origin_(std::move(cors_origin)) {}

std::string Service::new_id() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  char buf[17];
  for (;;) {
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    if (!fs::exists(store_.dir() / (std::string(buf) + ".json"))) return buf;
  }
}

std::shared_ptr<Service::Entry> Service::entry(const std::string& id) {
  if (!DocumentStore::valid_id(id)) return nullptr;
  std::shared_ptr<Entry> e;
  {
    std::lock_guard guard(entries_lock_);
    auto& slot = entries_[id];
    if (!slot) slot = std::make_shared<Entry>();
    e = slot;
  }
  std::unique_lock lock(e->lock);
  if (!e->doc) {
    e->doc = store_.load(id);
    if (!e->doc) return nullptr;
    e->graph = parse_model(e->doc->source, e->doc->format);
  }
  return e;
}

ApiResponse Service::handle(const ApiRequest& request) {
  ApiResponse response;
  try {
    const auto seg = segments(request.path);
    const std::string& m = request.method;
    if (m == "OPTIONS") {
      response.status = 204;
      response.content_type.clear();
    } else if (seg.size() == 2 && seg[0] == "api" && seg[1] == "render" && m == "POST") {
      response = render_stateless(request);
    } else if (seg.size() == 2 && seg[0] == "api" && seg[1] == "documents" && m == "POST") {
      response = create(request);
    } else if (seg.size() == 3 && seg[0] == "api" && seg[1] == "documents") {
      if (m == "GET") {
        response = get(seg[2]);
      } else if (m == "PATCH") {
        response = patch(seg[2], request);
      } else if (m == "DELETE") {
        response = remove(seg[2]);
      } else {
        response = error_response(405, "MethodNotAllowed", m + " " + request.path);
      }
    } else if (seg.size() == 4 && seg[0] == "api" && seg[1] == "documents" && seg[3] == "render" &&
               m == "GET") {
      response = render(seg[2], request);
    } else if (seg.size() == 2 && seg[0] == "api" && seg[1] == "health" && m == "GET") {
      response = json_response(200, {{"status", "ok"}});
    } else {
      response = error_response(404, "NotFound", "no route for " + m + " " + request.path);
    }
  } catch (const Error& e) {
    response = error_response(422, e.kind(), e.what());
  } catch (const json::exception& e) {
    response = error_response(422, "SchemaError", e.what());
  } catch (const std::exception& e) {
    response = error_response(500, "InternalError", e.what());
  }
  response.headers["Access-Control-Allow-Origin"] = cors_origin_;
  response.headers["Access-Control-Allow-Methods"] = "GET, POST, PATCH, DELETE, OPTIONS";
  response.headers["Access-Control-Allow-Headers"] = "Content-Type, If-None-Match, If-Match";
  response.headers["Access-Control-Expose-Headers"] = "ETag";
  return response;
}

ApiResponse Service::create(const ApiRequest& r) {
  Document doc;
  auto fmt = r.query.find("format");
  doc.format = parse_model_format(fmt == r.query.end() ? "auto" : fmt->second);
  doc.source = r.body;
  NetworkGraph graph = parse_model(doc.source, doc.format);
  doc.id = new_id();
  store_.save(doc);

  auto e = std::make_shared<Entry>();
  e->doc = doc;
  e->graph = graph;
  {
    std::lock_guard guard(entries_lock_);
    entries_[doc.id] = e;
  }
  json body = summary(doc, graph);
  body["warnings"] = ingest_warnings(graph);
  return json_response(201, body);
}

ApiResponse Service::get(const std::string& id) {
  auto e = entry(id);
  if (!e) return error_response(404, "NotFound", "unknown document '" + id + "'");
  std::shared_lock lock(e->lock);
  return json_response(200, summary(*e->doc, *e->graph));
}

ApiResponse Service::render(const std::string& id, const ApiRequest& r) {
  auto e = entry(id);
  if (!e) return error_response(404, "NotFound", "unknown document '" + id + "'");
  auto fmt = r.query.find("format");
  const std::string output = fmt == r.query.end() ? "svg" : fmt->second;
  if (output != "svg" && output != "scene")
    return error_response(422, "SchemaError", "format must be svg or scene");

  Document doc;
  NetworkGraph graph;
  {
    std::shared_lock lock(e->lock);
    doc = *e->doc;
    graph = *e->graph;
  }
  ApiResponse out;
  const std::string etag = document_etag(doc, output);
  out.headers["ETag"] = etag;
  out.headers["X-Archviz-Revision"] = std::to_string(doc.revision);
  if (auto inm = r.headers.find("if-none-match"); inm != r.headers.end() && inm->second == etag) {
    out.status = 304;
    out.content_type.clear();
    return out;
  }
  const Scene scene = render_scene(graph, doc.config());
  if (output == "svg") {
    out.content_type = "image/svg+xml";
    out.body = emit_svg(scene);
  } else {
    out.body = scene_to_json(scene).dump() + "\n";
  }
  return out;
}

ApiResponse Service::patch(const std::string& id, const ApiRequest& r) {
  auto e = entry(id);
  if (!e) return error_response(404, "NotFound", "unknown document '" + id + "'");
  const json body = parse_body(r.body);
  if (!body.is_object()) throw SchemaError("patch body must be a JSON object");
  for (const auto& [key, value] : body.items())
    if (key != "revision" && key != "view" && key != "style" && key != "aggregations")
      throw SchemaError("unknown patch field '" + key + "'");

  std::unique_lock lock(e->lock);
  Document doc = *e->doc;
  std::optional<long> expected;
  if (body.contains("revision")) expected = body["revision"].get<long>();
  if (auto im = r.headers.find("if-match"); im != r.headers.end()) expected = std::stol(im->second);
  if (expected && *expected != doc.revision)
    return error_response(409, "RevisionConflict",
                          "document is at revision " + std::to_string(doc.revision) +
                              ", patch was based on " + std::to_string(*expected));

  if (body.contains("view")) doc.view = view_from_json(body["view"], doc.view);
  if (body.contains("style")) doc.style = style_from_json(body["style"], doc.style);
  if (body.contains("aggregations")) {
    const json& ops = body["aggregations"];
    if (!ops.is_array()) throw SchemaError("aggregations must be a list of operations");
    for (const auto& op : ops) {
      const std::string kind = op.at("op").get<std::string>();
      if (kind == "add") {
        doc.aggregations = doc.aggregations.add(aggregation_def_from_json(op.at("def")));
      } else if (kind == "activate" || kind == "deactivate") {
        doc.aggregations = doc.aggregations.set_active(op.at("id").get<std::string>(), kind == "activate");
      } else if (kind == "remove") {
        doc.aggregations = doc.aggregations.remove(op.at("id").get<std::string>());
      } else if (kind == "auto") {
        const int rounds = op.value("rounds", 1);
        doc.aggregations = auto_aggregate(apply_view(*e->graph, doc.view), doc.aggregations, rounds);
      } else if (kind == "replace") {
        doc.aggregations = aggregations_from_json(op.at("defs"));
      } else {
        throw SchemaError("unknown aggregation operation '" + kind + "'");
      }
    }
  }
  // Reject states that cannot be drawn before they are stored.
  apply_aggregations(apply_view(*e->graph, doc.view), doc.aggregations);

  if (doc.view == e->doc->view && doc.style == e->doc->style &&
      doc.aggregations == e->doc->aggregations)
    return json_response(200, summary(doc, *e->graph));
  ++doc.revision;
  store_.save(doc);
  e->doc = doc;
  return json_response(200, summary(doc, *e->graph));
}

ApiResponse Service::remove(const std::string& id) {
  auto e = entry(id);
  if (!e) return error_response(404, "NotFound", "unknown document '" + id + "'");
  std::unique_lock lock(e->lock);
  store_.remove(id);
  e->doc.reset();
  e->graph.reset();
  {
    std::lock_guard guard(entries_lock_);
    entries_.erase(id);
  }
  ApiResponse out;
  out.status = 204;
  out.content_type.clear();
  return out;
}

ApiResponse Service::render_stateless(const ApiRequest& r) {
  const json body = parse_body(r.body);
  if (!body.is_object() || !body.contains("model"))
    throw SchemaError("render request needs a 'model' field");
  json config = json::object();
  std::string output = "svg";
  ModelFormat format = ModelFormat::kAuto;
  for (const auto& [key, value] : body.items()) {
    if (key == "model") continue;
    if (key == "format") {
      format = parse_model_format(value.get<std::string>());
    } else if (key == "output") {
      output = value.get<std::string>();
    } else {
      config[key] = value;
    }
  }
  if (output != "svg" && output != "scene") throw SchemaError("output must be svg or scene");
  const json& model = body["model"];
  const NetworkGraph graph =
      parse_model(model.is_string() ? model.get<std::string>() : model.dump(), format);
  const Scene scene = render_scene(graph, config_from_json(config));
  ApiResponse out;
  if (output == "svg") {
    out.content_type = "image/svg+xml";
    out.body = emit_svg(scene);
  } else {
    out.body = scene_to_json(scene).dump() + "\n";
  }
  return out;
}

}  // namespace archviz
