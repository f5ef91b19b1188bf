#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "archviz/graph.hpp"

namespace archviz {

inline constexpr std::string_view kNeutralFormat = "archviz-graph/1";

enum class ModelFormat { kAuto, kKeras, kNeutral };

ModelFormat parse_model_format(std::string_view name);

/// Shapes are taken verbatim; structure and edge shape agreement validated.
NetworkGraph parse_neutral_json(std::string_view text);
NetworkGraph parse_neutral_json(const nlohmann::json& doc);

/// Keras model serialization ("Sequential", "Model", "Functional"; legacy
/// and Keras 3 inbound-node encodings). Batch axis stripped, shapes inferred.
NetworkGraph parse_keras_model_json(std::string_view text);
NetworkGraph parse_keras_model_json(const nlohmann::json& doc);

/// Dispatches on `format`; kAuto picks neutral when the "format" tag is present.
NetworkGraph parse_model(std::string_view text, ModelFormat format = ModelFormat::kAuto);

/// Forward shape propagation in topological order. Source nodes must carry
/// their in_shape; every other node gets its shapes from its inbound edges.
NetworkGraph infer_shapes(NetworkGraph graph);

/// Output shape of a single layer given its ordered input shapes.
TensorShape infer_layer_output(const LayerNode& node, const std::vector<TensorShape>& inputs);

nlohmann::json shape_to_json(const TensorShape& shape);
TensorShape shape_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const NetworkGraph& graph);
std::string to_neutral_json(const NetworkGraph& graph);

}  // namespace archviz
