#include "archviz/ingest.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "archviz/error.hpp"

namespace archviz {

using nlohmann::json;

namespace {

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw SchemaError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

ParamValue param_from_json(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<long> out;
    for (const auto& e : v) {
      if (e.is_null()) {
        out.push_back(-1);
      } else if (e.is_number_integer()) {
        out.push_back(e.get<long>());
      } else {
        throw SchemaError(where + ": array parameters must hold integers");
      }
    }
    return out;
  }
  throw SchemaError(where + ": unsupported parameter value");
}

json param_to_json(const ParamValue& v) {
  return std::visit([](const auto& x) -> json { return x; }, v);
}

// ---- parameter access used by shape inference ---------------------------

std::optional<long> param_long(const LayerNode& n, const std::string& key) {
  auto it = n.params.find(key);
  if (it == n.params.end()) return std::nullopt;
  if (auto p = std::get_if<long>(&it->second)) return *p;
  if (auto p = std::get_if<std::vector<long>>(&it->second); p && p->size() == 1) return (*p)[0];
  throw SchemaError(n.id + ": parameter '" + key + "' must be an integer");
}

std::string param_string(const LayerNode& n, const std::string& key, std::string fallback) {
  auto it = n.params.find(key);
  if (it == n.params.end()) return fallback;
  if (auto p = std::get_if<std::string>(&it->second)) return *p;
  throw SchemaError(n.id + ": parameter '" + key + "' must be a string");
}

bool param_bool(const LayerNode& n, const std::string& key, bool fallback) {
  auto it = n.params.find(key);
  if (it == n.params.end()) return fallback;
  if (auto p = std::get_if<bool>(&it->second)) return *p;
  throw SchemaError(n.id + ": parameter '" + key + "' must be a boolean");
}

/// Integer-or-tuple parameter broadcast to `rank` entries.
std::optional<std::vector<long>> param_tuple(const LayerNode& n, const std::string& key,
                                             std::size_t rank) {
  auto it = n.params.find(key);
  if (it == n.params.end()) return std::nullopt;
  if (auto p = std::get_if<long>(&it->second)) return std::vector<long>(rank, *p);
  if (auto p = std::get_if<std::vector<long>>(&it->second)) {
    if (p->size() == 1) return std::vector<long>(rank, (*p)[0]);
    if (p->size() != rank)
      throw ShapeMismatchError(n.id + ": parameter '" + key + "' has " +
                               std::to_string(p->size()) + " entries, expected " +
                               std::to_string(rank));
    return *p;
  }
  throw SchemaError(n.id + ": parameter '" + key + "' must be an integer or tuple");
}

/// (before, after) pairs per spatial axis for ZeroPadding/Cropping.
std::vector<std::pair<long, long>> param_pairs(const LayerNode& n, const std::string& key,
                                               std::size_t rank, long fallback) {
  auto it = n.params.find(key);
  if (it == n.params.end()) return std::vector<std::pair<long, long>>(rank, {fallback, fallback});
  std::vector<long> flat;
  if (auto p = std::get_if<long>(&it->second)) flat = {*p};
  else if (auto p = std::get_if<std::vector<long>>(&it->second)) flat = *p;
  else throw SchemaError(n.id + ": parameter '" + key + "' must be integers");
  std::vector<std::pair<long, long>> out;
  if (flat.size() == 1) {
    out.assign(rank, {flat[0], flat[0]});
  } else if (flat.size() == rank) {
    for (long v : flat) out.emplace_back(v, v);
  } else if (flat.size() == 2 * rank) {
    for (std::size_t i = 0; i < rank; ++i) out.emplace_back(flat[2 * i], flat[2 * i + 1]);
  } else {
    throw ShapeMismatchError(n.id + ": parameter '" + key + "' does not match spatial rank");
  }
  return out;
}

// ---- per-layer shape arithmetic ------------------------------------------

std::optional<std::size_t> spatial_rank_of(std::string_view type) {
  for (std::size_t r = 1; r <= 3; ++r) {
    const std::string suffix = std::to_string(r) + "D";
    if (type.size() > suffix.size() && type.substr(type.size() - suffix.size()) == suffix)
      return r;
    const std::string tsuffix = suffix + "Transpose";
    if (type.size() > tsuffix.size() &&
        type.substr(type.size() - tsuffix.size()) == tsuffix)
      return r;
  }
  return std::nullopt;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

void require_rank(const LayerNode& n, const TensorShape& in, std::size_t rank) {
  if (in.is_dense || in.spatial.size() != rank)
    throw ShapeMismatchError(n.id + " (" + n.layer_type + "): expects " + std::to_string(rank) +
                             " spatial axes, got " + std::to_string(in.spatial.size()));
}

using Dim = std::optional<long>;

Dim positive(const LayerNode& n, long v) {
  if (v <= 0)
    throw ShapeMismatchError(n.id + " (" + n.layer_type + "): output extent " +
                             std::to_string(v) + " is not positive");
  return v;
}

long ceil_div(long a, long b) { return (a + b - 1) / b; }

Dim windowed_extent(const LayerNode& n, Dim in, long kernel, long stride, long dilation,
                    const std::string& padding) {
  if (!in) return std::nullopt;
  const long effective = (kernel - 1) * dilation + 1;
  if (padding == "same" || padding == "causal") return positive(n, ceil_div(*in, stride));
  if (padding == "valid") {
    if (*in < effective) return positive(n, 0);
    return positive(n, (*in - effective) / stride + 1);
  }
  throw SchemaError(n.id + ": unsupported padding '" + padding + "'");
}

Dim transposed_extent(const LayerNode& n, Dim in, long kernel, long stride, long dilation,
                      const std::string& padding) {
  if (!in) return std::nullopt;
  const long effective = (kernel - 1) * dilation + 1;
  if (padding == "same") return positive(n, *in * stride);
  if (padding == "valid") return positive(n, *in * stride + std::max(effective - stride, 0L));
  if (padding == "full") return positive(n, *in * stride - (stride + effective - 2));
  throw SchemaError(n.id + ": unsupported padding '" + padding + "'");
}

TensorShape merge_elementwise(const LayerNode& n, const std::vector<TensorShape>& ins) {
  TensorShape out = ins.front();
  for (std::size_t i = 1; i < ins.size(); ++i) {
    const auto& s = ins[i];
    bool ok = s.is_dense == out.is_dense && s.channels == out.channels &&
              s.spatial.size() == out.spatial.size();
    for (std::size_t a = 0; ok && a < s.spatial.size(); ++a) {
      if (s.spatial[a] && out.spatial[a] && *s.spatial[a] != *out.spatial[a]) ok = false;
      if (!out.spatial[a]) out.spatial[a] = s.spatial[a];
    }
    if (!ok)
      throw ShapeMismatchError(n.id + " (" + n.layer_type + "): incompatible input shapes " +
                               ins.front().spatial_label() + "x" +
                               std::to_string(ins.front().channels) + " and " +
                               s.spatial_label() + "x" + std::to_string(s.channels));
  }
  return out;
}

TensorShape concatenate(const LayerNode& n, const std::vector<TensorShape>& ins) {
  const auto& first = ins.front();
  const long rank = static_cast<long>(first.spatial.size());
  long axis = param_long(n, "axis").value_or(-1);
  // Keras axes count the batch axis; -1 and rank+1 both denote channels.
  if (axis < 0) axis += rank + 2;
  if (axis < 1 || axis > rank + 1)
    throw ShapeMismatchError(n.id + ": concatenation axis out of range");
  TensorShape out = first;
  for (std::size_t i = 1; i < ins.size(); ++i) {
    const auto& s = ins[i];
    bool ok = s.is_dense == first.is_dense && s.spatial.size() == first.spatial.size();
    for (long a = 0; ok && a < rank; ++a) {
      if (a + 1 == axis) continue;
      const auto& x = out.spatial[a];
      const auto& y = s.spatial[a];
      if (x && y && *x != *y) ok = false;
      if (!x) out.spatial[a] = y;
    }
    if (ok && axis != rank + 1 && s.channels != first.channels) ok = false;
    if (!ok)
      throw ShapeMismatchError(n.id + " (Concatenate): inputs disagree off the concat axis");
    if (axis == rank + 1) {
      out.channels += s.channels;
    } else {
      auto& d = out.spatial[axis - 1];
      d = (d && s.spatial[axis - 1]) ? Dim(*d + *s.spatial[axis - 1]) : std::nullopt;
    }
  }
  return out;
}

TensorShape declared_output(const LayerNode& n) {
  auto it = n.params.find("output_shape");
  if (it == n.params.end())
    throw UnsupportedLayerError(n.id + ": layer type '" + n.layer_type +
                                "' is not supported and declares no output shape");
  auto p = std::get_if<std::vector<long>>(&it->second);
  if (!p || p->empty()) throw SchemaError(n.id + ": output_shape must be a non-empty list");
  if (p->size() == 1) return TensorShape::dense((*p)[0]);
  std::vector<Dim> spatial;
  for (std::size_t i = 0; i + 1 < p->size(); ++i)
    spatial.push_back((*p)[i] < 0 ? Dim{} : Dim{(*p)[i]});
  return TensorShape::image(std::move(spatial), p->back());
}

}  // namespace

TensorShape infer_layer_output(const LayerNode& n, const std::vector<TensorShape>& ins) {
  if (ins.empty()) throw SchemaError(n.id + ": no input shape available");
  const std::string& t = n.layer_type;
  const TensorShape& in = ins.front();

  static const std::set<std::string> identity = {"InputLayer", "Activation",
                                                 "BatchNormalization", "Dropout", "Routing"};
  if (identity.count(t) || n.is_routing) return in;

  if (t == "Add" || t == "Multiply" || t == "Average" || t == "Maximum")
    return merge_elementwise(n, ins);
  if (t == "Concatenate") return concatenate(n, ins);

  if (t == "Dense") {
    const long units = param_long(n, "units").value_or(0);
    if (units <= 0) throw SchemaError(n.id + ": Dense requires positive 'units'");
    if (in.is_dense) return TensorShape::dense(units);
    return TensorShape::image(in.spatial, units);
  }
  if (t == "Flatten") {
    if (!in.fully_known())
      throw ShapeMismatchError(n.id + ": cannot flatten a tensor with unknown spatial extent");
    long total = in.channels;
    for (const auto& d : in.spatial) total *= *d;
    return TensorShape::dense(total);
  }
  if (t == "Reshape") {
    auto it = n.params.find("target_shape");
    auto p = it == n.params.end() ? nullptr : std::get_if<std::vector<long>>(&it->second);
    if (!p || p->empty()) throw SchemaError(n.id + ": Reshape requires 'target_shape'");
    std::vector<long> target = *p;
    const auto wildcard = std::count(target.begin(), target.end(), -1L);
    if (wildcard > 1) throw SchemaError(n.id + ": Reshape allows at most one -1");
    if (wildcard == 1) {
      if (!in.fully_known())
        throw ShapeMismatchError(n.id + ": Reshape wildcard needs a fully known input");
      long total = in.channels;
      for (const auto& d : in.spatial) total *= *d;
      long known = 1;
      for (long v : target)
        if (v != -1) known *= v;
      if (known <= 0 || total % known != 0)
        throw ShapeMismatchError(n.id + ": Reshape target incompatible with input size");
      *std::find(target.begin(), target.end(), -1L) = total / known;
    }
    if (target.size() == 1) return TensorShape::dense(target[0]);
    std::vector<Dim> spatial(target.begin(), target.end() - 1);
    return TensorShape::image(std::move(spatial), target.back());
  }

  const auto rank = spatial_rank_of(t);
  if (rank && (starts_with(t, "Conv") || starts_with(t, "SeparableConv"))) {
    require_rank(n, in, *rank);
    const long filters = param_long(n, "filters").value_or(0);
    if (filters <= 0) throw SchemaError(n.id + ": convolution requires positive 'filters'");
    const auto kernel = param_tuple(n, "kernel_size", *rank);
    if (!kernel) throw SchemaError(n.id + ": convolution requires 'kernel_size'");
    const auto strides = param_tuple(n, "strides", *rank).value_or(std::vector<long>(*rank, 1));
    const auto dilation =
        param_tuple(n, "dilation_rate", *rank).value_or(std::vector<long>(*rank, 1));
    const std::string padding = param_string(n, "padding", "valid");
    const bool transposed = t.find("Transpose") != std::string::npos;
    TensorShape out{{}, filters, false};
    for (std::size_t a = 0; a < *rank; ++a) {
      out.spatial.push_back(
          transposed ? transposed_extent(n, in.spatial[a], (*kernel)[a], strides[a], dilation[a],
                                         padding)
                     : windowed_extent(n, in.spatial[a], (*kernel)[a], strides[a], dilation[a],
                                       padding));
    }
    return out;
  }
  if (rank && (starts_with(t, "MaxPooling") || starts_with(t, "AveragePooling"))) {
    require_rank(n, in, *rank);
    const auto pool = param_tuple(n, "pool_size", *rank).value_or(std::vector<long>(*rank, 2));
    const auto strides = param_tuple(n, "strides", *rank).value_or(pool);
    const std::string padding = param_string(n, "padding", "valid");
    TensorShape out{{}, in.channels, false};
    for (std::size_t a = 0; a < *rank; ++a)
      out.spatial.push_back(windowed_extent(n, in.spatial[a], pool[a], strides[a], 1, padding));
    return out;
  }
  if (rank && (starts_with(t, "GlobalAveragePooling") || starts_with(t, "GlobalMaxPooling"))) {
    require_rank(n, in, *rank);
    if (param_bool(n, "keepdims", false))
      return TensorShape::image(std::vector<Dim>(*rank, Dim{1}), in.channels);
    return TensorShape::dense(in.channels);
  }
  if (rank && starts_with(t, "UpSampling")) {
    require_rank(n, in, *rank);
    const auto size = param_tuple(n, "size", *rank).value_or(std::vector<long>(*rank, 2));
    TensorShape out = in;
    for (std::size_t a = 0; a < *rank; ++a)
      if (out.spatial[a]) out.spatial[a] = *out.spatial[a] * size[a];
    return out;
  }
  if (rank && (starts_with(t, "ZeroPadding") || starts_with(t, "Cropping"))) {
    require_rank(n, in, *rank);
    const bool crop = starts_with(t, "Cropping");
    const auto pads = param_pairs(n, crop ? "cropping" : "padding", *rank, crop ? 0 : 1);
    TensorShape out = in;
    for (std::size_t a = 0; a < *rank; ++a) {
      if (!out.spatial[a]) continue;
      const long delta = pads[a].first + pads[a].second;
      out.spatial[a] = positive(n, *out.spatial[a] + (crop ? -delta : delta));
    }
    return out;
  }
  return declared_output(n);
}

NetworkGraph infer_shapes(NetworkGraph graph) {
  for (const auto& id : graph.topological_order()) {
    const auto preds = graph.predecessors(id);
    LayerNode& n = graph.node(id);
    std::vector<TensorShape> ins;
    if (preds.empty()) {
      ins.push_back(n.in_shape);
    } else {
      for (const auto& p : preds) ins.push_back(graph.node(p).out_shape);
      n.in_shape = ins.front();
    }
    n.out_shape = infer_layer_output(n, ins);
  }
  return graph;
}

// ---- JSON <-> graph ------------------------------------------------------

json shape_to_json(const TensorShape& s) {
  json spatial = json::array();
  for (const auto& d : s.spatial) spatial.push_back(d ? json(*d) : json(nullptr));
  json out = {{"spatial", spatial}, {"channels", s.channels}};
  if (s.is_dense) out["dense"] = true;
  return out;
}

TensorShape shape_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("shape must be an object");
  const json& spatial = require(j, "spatial", "shape");
  const json& channels = require(j, "channels", "shape");
  if (!spatial.is_array()) throw SchemaError("shape.spatial must be an array");
  if (spatial.size() > 3) throw SchemaError("shape.spatial supports at most 3 axes");
  if (!channels.is_number_integer() || channels.get<long>() <= 0)
    throw SchemaError("shape.channels must be a positive integer");
  TensorShape s;
  for (const auto& d : spatial) {
    if (d.is_null()) {
      s.spatial.emplace_back();
    } else if (d.is_number_integer() && d.get<long>() > 0) {
      s.spatial.emplace_back(d.get<long>());
    } else {
      throw SchemaError("shape.spatial entries must be positive integers or null");
    }
  }
  s.channels = channels.get<long>();
  s.is_dense = s.spatial.empty();
  if (j.contains("dense") && j["dense"].is_boolean() && j["dense"].get<bool>() && !s.is_dense)
    throw SchemaError("dense shapes must have no spatial axes");
  return s;
}

json graph_to_json(const NetworkGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes()) {
    json params = json::object();
    for (const auto& [k, v] : n.params) params[k] = param_to_json(v);
    json node = {{"id", n.id},
                 {"type", n.layer_type},
                 {"name", n.display_name},
                 {"in_shape", shape_to_json(n.in_shape)},
                 {"out_shape", shape_to_json(n.out_shape)},
                 {"params", params}};
    if (n.is_routing) node["routing"] = true;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& [s, d] : g.edges) edges.push_back(json::array({s, d}));
  return {{"format", kNeutralFormat},
          {"nodes", nodes},
          {"edges", edges},
          {"inputs", g.inputs},
          {"outputs", g.outputs}};
}

std::string to_neutral_json(const NetworkGraph& g) { return graph_to_json(g).dump(2) + "\n"; }

NetworkGraph parse_neutral_json(std::string_view text) { return parse_neutral_json(parse_text(text)); }

NetworkGraph parse_neutral_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("document must be a JSON object");
  const std::string format = require_string(doc, "format", "document");
  if (format != kNeutralFormat) throw SchemaError("unsupported format '" + format + "'");
  const json& nodes = require(doc, "nodes", "document");
  const json& edges = require(doc, "edges", "document");
  if (!nodes.is_array() || !edges.is_array())
    throw SchemaError("document: 'nodes' and 'edges' must be arrays");

  NetworkGraph g;
  for (const auto& jn : nodes) {
    LayerNode n;
    n.id = require_string(jn, "id", "node");
    const std::string where = "node '" + n.id + "'";
    n.layer_type = require_string(jn, "type", where);
    n.display_name = jn.contains("name") && jn["name"].is_string() ? jn["name"].get<std::string>()
                                                                   : n.id;
    n.in_shape = shape_from_json(require(jn, "in_shape", where));
    n.out_shape = shape_from_json(require(jn, "out_shape", where));
    if (jn.contains("params")) {
      if (!jn["params"].is_object()) throw SchemaError(where + ": params must be an object");
      for (const auto& [k, v] : jn["params"].items()) n.params[k] = param_from_json(v, where);
    }
    n.is_routing = (jn.contains("routing") && jn["routing"].is_boolean() &&
                    jn["routing"].get<bool>()) ||
                   n.layer_type == "Routing";
    if (n.is_routing && n.in_shape != n.out_shape)
      throw ShapeMismatchError(where + ": routing nodes must be identities");
    g.add_node(std::move(n));
  }
  for (const auto& je : edges) {
    if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string())
      throw SchemaError("edges must be [src, dst] string pairs");
    g.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
  }
  auto id_list = [&](const char* key) {
    std::vector<std::string> out;
    const json& arr = require(doc, key, "document");
    if (!arr.is_array()) throw SchemaError(std::string("document: '") + key + "' must be an array");
    for (const auto& v : arr) {
      if (!v.is_string()) throw SchemaError(std::string("document: '") + key + "' holds ids");
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  g.inputs = id_list("inputs");
  g.outputs = id_list("outputs");
  g.validate_structure();

  for (const auto& n : g.nodes()) {
    const auto preds = g.predecessors(n.id);
    if (preds.empty()) continue;
    const TensorShape& incoming = g.node(preds.front()).out_shape;
    if (incoming != n.in_shape)
      throw ShapeMismatchError("edge " + preds.front() + " -> " + n.id +
                               ": endpoint shapes disagree");
  }
  return g;
}

// ---- Keras ---------------------------------------------------------------

namespace {

/// Inbound layer names of one Keras layer entry, in order. Handles the
/// legacy nested-list encoding and the Keras 3 keras_history encoding.
std::vector<std::string> keras_inbound(const json& layer) {
  std::vector<std::string> out;
  if (!layer.contains("inbound_nodes")) return out;
  const json& nodes = layer["inbound_nodes"];
  if (!nodes.is_array() || nodes.empty()) return out;
  if (nodes.size() > 1)
    throw SchemaError("layer '" + layer.value("name", std::string("?")) +
                      "' is shared across several call sites, which is not supported");
  const json& call = nodes[0];
  std::function<void(const json&)> collect = [&](const json& v) {
    if (v.is_object()) {
      if (v.contains("keras_history") && v["keras_history"].is_array()) {
        out.push_back(v["keras_history"][0].get<std::string>());
        return;
      }
      if (v.contains("config")) collect(v["config"]);
      return;
    }
    if (v.is_array()) {
      // Legacy entry: ["name", node_index, tensor_index, {kwargs}]
      if (!v.empty() && v[0].is_string() && v.size() >= 3 && v[1].is_number_integer()) {
        out.push_back(v[0].get<std::string>());
        return;
      }
      for (const auto& e : v) collect(e);
    }
  };
  if (call.is_object()) {
    if (call.contains("args")) collect(call["args"]);
  } else {
    collect(call);
  }
  return out;
}

std::optional<std::vector<Dim>> keras_batch_shape(const json& config) {
  for (const char* key : {"batch_input_shape", "batch_shape"}) {
    if (config.contains(key) && config[key].is_array()) {
      std::vector<Dim> dims;
      const json& arr = config[key];
      for (std::size_t i = 1; i < arr.size(); ++i)
        dims.push_back(arr[i].is_null() ? Dim{} : Dim{arr[i].get<long>()});
      return dims;
    }
  }
  if (config.contains("input_shape") && config["input_shape"].is_array()) {
    std::vector<Dim> dims;
    for (const auto& d : config["input_shape"])
      dims.push_back(d.is_null() ? Dim{} : Dim{d.get<long>()});
    return dims;
  }
  return std::nullopt;
}

TensorShape shape_from_dims(const std::vector<Dim>& dims, const std::string& where) {
  if (dims.empty()) throw SchemaError(where + ": input shape has no axes");
  if (!dims.back()) throw SchemaError(where + ": channel axis must be known");
  if (dims.size() == 1) return TensorShape::dense(*dims.back());
  if (dims.size() > 4) throw SchemaError(where + ": at most 3 spatial axes are supported");
  return TensorShape::image(std::vector<Dim>(dims.begin(), dims.end() - 1), *dims.back());
}

void copy_keras_params(const json& config, LayerNode& n) {
  static const std::set<std::string> scalar_keys = {
      "filters", "kernel_size", "strides",  "padding",     "dilation_rate", "pool_size",
      "units",   "size",        "axis",     "target_shape", "keepdims",     "cropping",
      "activation", "rate",     "output_shape"};
  for (const auto& [k, v] : config.items()) {
    if (!scalar_keys.count(k)) continue;
    if (v.is_null()) continue;
    if (k == "activation" && !v.is_string()) continue;
    if (v.is_array()) {
      // Flatten nested tuples, e.g. ((1, 1), (2, 2)) paddings.
      std::vector<long> flat;
      std::function<void(const json&)> walk = [&](const json& e) {
        if (e.is_array()) {
          for (const auto& x : e) walk(x);
        } else if (e.is_null()) {
          flat.push_back(-1);
        } else if (e.is_number_integer()) {
          flat.push_back(e.get<long>());
        } else {
          throw SchemaError(n.id + ": parameter '" + k + "' must hold integers");
        }
      };
      walk(v);
      n.params[k] = flat;
    } else if (v.is_number_integer() || v.is_boolean() || v.is_string() || v.is_number()) {
      n.params[k] = param_from_json(v, n.id);
    }
  }
  if (config.contains("data_format") && config["data_format"] == "channels_first")
    throw UnsupportedLayerError(n.id + ": channels_first data format is not supported");
}

}  // namespace

NetworkGraph parse_keras_model_json(std::string_view text) {
  return parse_keras_model_json(parse_text(text));
}

NetworkGraph parse_keras_model_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("Keras document must be a JSON object");
  const std::string cls = require_string(doc, "class_name", "model");
  if (cls != "Sequential" && cls != "Model" && cls != "Functional")
    throw SchemaError("unsupported model class '" + cls + "'");
  const json& config = require(doc, "config", "model");
  const json& layers = config.is_array() ? config : require(config, "layers", "model.config");
  if (!layers.is_array()) throw SchemaError("model.config.layers must be an array");
  if (layers.empty()) throw DisconnectedError("model has no layers, hence no input node");

  NetworkGraph g;
  const bool sequential = cls == "Sequential";
  std::string previous;
  std::size_t counter = 0;
  for (const auto& layer : layers) {
    const std::string type = require_string(layer, "class_name", "layer");
    const json& lc = require(layer, "config", "layer '" + type + "'");
    LayerNode n;
    n.layer_type = type;
    if (layer.contains("name") && layer["name"].is_string()) {
      n.id = layer["name"].get<std::string>();
    } else if (lc.contains("name") && lc["name"].is_string()) {
      n.id = lc["name"].get<std::string>();
    } else {
      n.id = type + "_" + std::to_string(counter);
    }
    ++counter;
    n.display_name = n.id;
    copy_keras_params(lc, n);
    if (layer.contains("output_shape") && layer["output_shape"].is_array())
      n.params["output_shape"] = param_from_json(layer["output_shape"], n.id);
    n.is_routing = type == "Routing";
    const auto batch = keras_batch_shape(lc);

    std::vector<std::string> inbound;
    if (sequential) {
      if (!previous.empty()) inbound.push_back(previous);
    } else {
      inbound = keras_inbound(layer);
    }
    if (inbound.empty()) {
      if (!batch)
        throw SchemaError("layer '" + n.id + "' has no inbound layers and no input shape");
      n.in_shape = shape_from_dims(*batch, n.id);
    }
    const std::string id = n.id;
    g.add_node(std::move(n));
    for (const auto& src : inbound) g.edges.emplace_back(src, id);
    previous = id;
  }

  auto layer_refs = [&](const char* key) {
    std::vector<std::string> out;
    if (config.is_object() && config.contains(key) && config[key].is_array()) {
      std::function<void(const json&)> walk = [&](const json& v) {
        if (v.is_array() && !v.empty() && v[0].is_string()) {
          out.push_back(v[0].get<std::string>());
        } else if (v.is_array()) {
          for (const auto& e : v) walk(e);
        }
      };
      walk(config[key]);
    }
    return out;
  };
  for (const auto& n : g.nodes())
    if (g.in_degree(n.id) == 0) g.inputs.push_back(n.id);
  g.outputs = layer_refs("output_layers");
  if (g.outputs.empty())
    for (const auto& n : g.nodes())
      if (g.out_degree(n.id) == 0) g.outputs.push_back(n.id);

  g.validate_structure();
  return infer_shapes(std::move(g));
}

ModelFormat parse_model_format(std::string_view name) {
  if (name.empty() || name == "auto") return ModelFormat::kAuto;
  if (name == "keras") return ModelFormat::kKeras;
  if (name == "neutral") return ModelFormat::kNeutral;
  throw SchemaError("unknown model format '" + std::string(name) + "'");
}

NetworkGraph parse_model(std::string_view text, ModelFormat format) {
  const json doc = parse_text(text);
  if (format == ModelFormat::kAuto)
    format = doc.is_object() && doc.contains("format") ? ModelFormat::kNeutral
                                                       : ModelFormat::kKeras;
  return format == ModelFormat::kNeutral ? parse_neutral_json(doc) : parse_keras_model_json(doc);
}

}  // namespace archviz
