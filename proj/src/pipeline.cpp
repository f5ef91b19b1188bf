#include "archviz/pipeline.hpp"

#include <cctype>
#include <cstdio>

#include "archviz/error.hpp"

namespace archviz {

using nlohmann::json;

namespace {

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be a JSON object");
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw SchemaError(std::string("unknown ") + what + " field '" + key + "'");
  }
}

/// Typed read with a SchemaError naming the field.
template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

json view_to_json(const ViewState& view) {
  return {{"hidden_types", view.hidden_types},
          {"routing_insertions", view.routing_insertions},
          {"labels",
           {{"show_spatial_labels", view.labels.show_spatial_labels},
            {"show_channel_labels", view.labels.show_channel_labels},
            {"show_io_placeholders", view.labels.show_io_placeholders}}}};
}

ViewState view_from_json(const json& j, ViewState base) {
  require_object(j, "view");
  reject_unknown(j, {"hidden_types", "routing_insertions", "labels"}, "view");
  if (j.contains("hidden_types")) base.hidden_types = get<std::set<std::string>>(j, "hidden_types");
  if (j.contains("routing_insertions"))
    base.routing_insertions = get<std::vector<std::string>>(j, "routing_insertions");
  if (j.contains("labels")) {
    const auto& l = j["labels"];
    require_object(l, "labels");
    reject_unknown(l, {"show_spatial_labels", "show_channel_labels", "show_io_placeholders"}, "labels");
    if (l.contains("show_spatial_labels"))
      base.labels.show_spatial_labels = get<bool>(l, "show_spatial_labels");
    if (l.contains("show_channel_labels"))
      base.labels.show_channel_labels = get<bool>(l, "show_channel_labels");
    if (l.contains("show_io_placeholders"))
      base.labels.show_io_placeholders = get<bool>(l, "show_io_placeholders");
  }
  return base;
}

json style_to_json(const StyleConfig& style) {
  json j = {{"min_height", style.min_height},
            {"max_height", style.max_height},
            {"min_width", style.min_width},
            {"max_width", style.max_width},
            {"channel_scale", to_string(style.channel_scale)},
            {"palette", to_string(style.palette)},
            {"textures", style.textures},
            {"type_overrides", style.type_overrides},
            {"h_gap", style.spacing.h_gap},
            {"v_gap", style.spacing.v_gap}};
  j["dense_height_domain"] =
      style.dense_height_domain
          ? json::array({style.dense_height_domain->first, style.dense_height_domain->second})
          : json(nullptr);
  return j;
}

StyleConfig style_from_json(const json& j, StyleConfig base) {
  require_object(j, "style");
  reject_unknown(j,
                 {"min_height", "max_height", "min_width", "max_width", "channel_scale", "palette",
                  "textures", "type_overrides", "h_gap", "v_gap", "dense_height_domain"},
                 "style");
  if (j.contains("min_height")) base.min_height = get<double>(j, "min_height");
  if (j.contains("max_height")) base.max_height = get<double>(j, "max_height");
  if (j.contains("min_width")) base.min_width = get<double>(j, "min_width");
  if (j.contains("max_width")) base.max_width = get<double>(j, "max_width");
  if (j.contains("channel_scale"))
    base.channel_scale = parse_channel_scale(get<std::string>(j, "channel_scale"));
  if (j.contains("palette")) base.palette = parse_palette_mode(get<std::string>(j, "palette"));
  if (j.contains("textures")) base.textures = get<bool>(j, "textures");
  if (j.contains("type_overrides")) {
    // null values drop an override, everything else sets it
    const auto& o = j["type_overrides"];
    require_object(o, "type_overrides");
    for (const auto& [type, value] : o.items()) {
      if (value.is_null()) {
        base.type_overrides.erase(type);
      } else if (value.is_string()) {
        base.type_overrides[type] = value.get<std::string>();
      } else {
        throw SchemaError("override for '" + type + "' must be a colour string or null");
      }
    }
  }
  if (j.contains("h_gap")) base.spacing.h_gap = get<double>(j, "h_gap");
  if (j.contains("v_gap")) base.spacing.v_gap = get<double>(j, "v_gap");
  if (j.contains("dense_height_domain")) {
    const auto& d = j["dense_height_domain"];
    if (d.is_null()) {
      base.dense_height_domain.reset();
    } else {
      const auto v = get<std::vector<double>>(j, "dense_height_domain");
      if (v.size() != 2) throw SchemaError("dense_height_domain must be [min, max]");
      base.dense_height_domain = std::make_pair(v[0], v[1]);
    }
  }
  base.validate();
  return base;
}

json aggregations_to_json(const AggregationState& state) {
  json out = json::array();
  for (const auto& d : state.defs()) {
    json j = {{"id", d.id}, {"name", d.name}, {"sequence", d.sequence}, {"active", d.active}};
    j["color"] = d.color ? json(*d.color) : json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

AggregationDef aggregation_def_from_json(const json& j) {
  require_object(j, "aggregation");
  reject_unknown(j, {"id", "name", "sequence", "active", "color"}, "aggregation");
  AggregationDef d;
  d.id = get<std::string>(j, "id");
  d.name = j.contains("name") ? get<std::string>(j, "name") : d.id;
  d.sequence = get<std::vector<std::string>>(j, "sequence");
  if (j.contains("active")) d.active = get<bool>(j, "active");
  if (j.contains("color") && !j["color"].is_null()) {
    d.color = get<std::string>(j, "color");
    Color::from_hex(*d.color);
  }
  return d;
}

AggregationState aggregations_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("aggregations must be a JSON array");
  AggregationState state;
  for (const auto& d : j) state = state.add(aggregation_def_from_json(d));
  // add() activates dependencies of active defs; restore inactive flags as given.
  for (const auto& d : j)
    if (d.contains("active") && !d["active"].get<bool>() && state.def(d["id"]).active)
      state = state.set_active(d["id"], false);
  return state;
}

json config_to_json(const RenderConfig& config) {
  return {{"view", view_to_json(config.view)},
          {"style", style_to_json(config.style)},
          {"aggregations", aggregations_to_json(config.aggregations)},
          {"auto_aggregate", config.auto_aggregate}};
}

RenderConfig config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j, {"view", "style", "aggregations", "auto_aggregate"}, "config");
  RenderConfig c;
  if (j.contains("view")) c.view = view_from_json(j["view"]);
  if (j.contains("style")) c.style = style_from_json(j["style"]);
  if (j.contains("aggregations")) c.aggregations = aggregations_from_json(j["aggregations"]);
  if (j.contains("auto_aggregate")) c.auto_aggregate = get<int>(j, "auto_aggregate");
  if (c.auto_aggregate < 0) throw SchemaError("auto_aggregate must not be negative");
  return c;
}

AggregationDef parse_aggregate_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidAggregationError("aggregate spec must look like Name=TypeA,TypeB");
  AggregationDef d;
  d.name = spec.substr(0, eq);
  for (char c : d.name)
    d.id += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(c) : '_';
  std::size_t start = eq + 1;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto end = comma == std::string::npos ? spec.size() : comma;
    const auto item = spec.substr(start, end - start);
    if (item.empty()) throw InvalidAggregationError("empty entry in aggregate '" + d.name + "'");
    d.sequence.push_back(item);
    start = end + 1;
  }
  return d;
}

AggregationState resolved_aggregations(const NetworkGraph& graph, const RenderConfig& config) {
  if (config.auto_aggregate <= 0) return config.aggregations;
  return auto_aggregate(apply_view(graph, config.view), config.aggregations, config.auto_aggregate);
}

Scene render_scene(const NetworkGraph& graph, const RenderConfig& config) {
  return build_scene(graph, config.view, resolved_aggregations(graph, config), config.style);
}

std::string render_svg(const NetworkGraph& graph, const RenderConfig& config) {
  return emit_svg(render_scene(graph, config));
}

json inspect_graph(const NetworkGraph& graph) {
  std::map<std::string, int> by_type;
  for (const auto& n : graph.nodes()) ++by_type[n.layer_type];
  json out = {{"nodes", graph.size()},
              {"edges", graph.edges.size()},
              {"inputs", graph.inputs},
              {"outputs", graph.outputs},
              {"types", by_type},
              {"chains", sequential_chains(graph)}};
  if (auto c = detect_auto_aggregation(graph)) {
    out["candidate"] = {{"sequence", c->sequence}, {"count", c->count}, {"covered", c->covered}};
  } else {
    out["candidate"] = nullptr;
  }
  return out;
}

json error_to_json(const std::string& kind, const std::string& message) {
  return {{"error", kind}, {"message", message}};
}

std::string content_hash(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace archviz
