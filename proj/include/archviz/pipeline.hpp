#pragma once

#include <string>

#include <json.hpp>

#include "archviz/aggregation.hpp"
#include "archviz/render.hpp"
#include "archviz/style.hpp"
#include "archviz/transform.hpp"

namespace archviz {

/// Everything besides the model that determines a figure. Shared by the CLI
/// and the HTTP service so both render through the same path.
struct RenderConfig {
  ViewState view;
  AggregationState aggregations;
  StyleConfig style;
  /// Auto-aggregation rounds run on top of `aggregations` at render time.
  int auto_aggregate = 0;

  friend bool operator==(const RenderConfig&, const RenderConfig&) = default;
};

nlohmann::json view_to_json(const ViewState& view);
nlohmann::json style_to_json(const StyleConfig& style);
nlohmann::json aggregations_to_json(const AggregationState& state);
nlohmann::json config_to_json(const RenderConfig& config);

/// The `*_from_json` readers start from `base` and override only the keys
/// present. Unknown keys and wrong types raise SchemaError; bad values raise
/// the matching domain error.
ViewState view_from_json(const nlohmann::json& j, ViewState base = {});
StyleConfig style_from_json(const nlohmann::json& j, StyleConfig base = {});
AggregationState aggregations_from_json(const nlohmann::json& j);
AggregationDef aggregation_def_from_json(const nlohmann::json& j);
RenderConfig config_from_json(const nlohmann::json& j);

/// "Name=TypeA,TypeB" -> def with id derived from the name.
AggregationDef parse_aggregate_spec(const std::string& spec);

/// Aggregations after the configured auto rounds.
AggregationState resolved_aggregations(const NetworkGraph& graph, const RenderConfig& config);

Scene render_scene(const NetworkGraph& graph, const RenderConfig& config);
std::string render_svg(const NetworkGraph& graph, const RenderConfig& config);

/// Node counts by type, sequential chains, and the auto-aggregation candidate.
nlohmann::json inspect_graph(const NetworkGraph& graph);

/// {"error": kind, "message": text}
nlohmann::json error_to_json(const std::string& kind, const std::string& message);

/// Stable 64-bit FNV-1a digest as 16 hex digits.
std::string content_hash(const std::string& data);

}  // namespace archviz
