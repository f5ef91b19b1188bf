#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "archviz/error.hpp"
#include "archviz/ingest.hpp"
#include "support.hpp"

using namespace archviz;
using nlohmann::json;

namespace {

json shape(std::vector<long> spatial, long channels) {
  json s = json::array();
  for (long d : spatial) s.push_back(d < 0 ? json(nullptr) : json(d));
  return {{"spatial", s}, {"channels", channels}};
}

json node(const std::string& id, const std::string& type, json in, json out) {
  return {{"id", id}, {"type", type}, {"in_shape", in}, {"out_shape", out}, {"params", json::object()}};
}

json chain_doc() {
  return {{"format", "archviz-graph/1"},
          {"nodes",
           json::array({node("in", "InputLayer", shape({32, 32}, 3), shape({32, 32}, 3)),
            node("conv", "Conv2D", shape({32, 32}, 3), shape({32, 32}, 64)),
            node("fc", "Dense", shape({32, 32}, 64), shape({}, 10))})},
          {"edges", json::array({json::array({"in", "conv"}), json::array({"conv", "fc"})})},
          {"inputs", json::array({"in"})},
          {"outputs", json::array({"fc"})}};
}

LayerNode layer(const std::string& type, std::map<std::string, ParamValue> params = {}) {
  LayerNode n;
  n.id = "n";
  n.layer_type = type;
  n.params = std::move(params);
  return n;
}

TensorShape img(std::vector<long> spatial, long channels) {
  std::vector<std::optional<long>> s;
  for (long d : spatial) s.push_back(d < 0 ? std::optional<long>{} : std::optional<long>{d});
  return TensorShape::image(std::move(s), channels);
}

// Index-arithmetic oracle: slide the window over every output position and
// count the positions whose window start lies inside the (padded) input.
long window_oracle(long in, long k, long s, long d, bool same) {
  const long keff = (k - 1) * d + 1;
  if (same) {
    long count = 0;
    for (long start = 0; start < in; start += s) ++count;
    return count;
  }
  long count = 0;
  for (long start = 0; start + keff <= in; start += s) ++count;
  return count;
}

// Transposed convolution oracle: scatter each input position's kernel and
// measure the covered span, then apply the "same" crop rule.
long transpose_oracle(long in, long k, long s, long d, bool same) {
  if (same) return in * s;
  long last = 0;
  for (long i = 0; i < in; ++i)
    for (long j = 0; j < k; ++j) last = std::max(last, i * s + j * d + 1);
  return std::max(last, in * s);
}

}  // namespace

TEST_CASE("neutral chain parses with 3 nodes and 2 edges") {
  const auto g = parse_neutral_json(chain_doc());
  CHECK(g.size() == 3);
  CHECK(g.edges.size() == 2);
  CHECK(g.node("fc").out_shape == TensorShape::dense(10));
}

TEST_CASE("edge to undeclared id is a schema error") {
  auto doc = chain_doc();
  doc["edges"].push_back(json::array({"conv", "x"}));
  CHECK_THROWS_AS(parse_neutral_json(doc), SchemaError);
}

TEST_CASE("neutral diamond") {
  const auto s = shape({8, 8}, 4);
  json doc = {{"format", "archviz-graph/1"},
              {"nodes",
               json::array({node("a", "InputLayer", s, s), node("b", "Activation", s, s),
                node("c", "Activation", s, s), node("d", "Add", s, s)})},
              {"edges", json::array({json::array({"a", "b"}), json::array({"a", "c"}), json::array({"b", "d"}), json::array({"c", "d"})})},
              {"inputs", json::array({"a"})},
              {"outputs", json::array({"d"})}};
  const auto g = parse_neutral_json(doc);
  CHECK(g.size() == 4);
  CHECK(g.edges.size() == 4);
}

TEST_CASE("neutral validation errors") {
  SUBCASE("cycle") {
    auto doc = chain_doc();
    doc["edges"].push_back(json::array({"fc", "conv"}));
    doc["nodes"][2]["out_shape"] = shape({32, 32}, 64);
    doc["nodes"][2]["type"] = "Activation";
    CHECK_THROWS_AS(parse_neutral_json(doc), CycleError);
  }
  SUBCASE("shape disagreement") {
    auto doc = chain_doc();
    doc["nodes"][2]["in_shape"] = shape({16, 16}, 64);
    CHECK_THROWS_AS(parse_neutral_json(doc), ShapeMismatchError);
  }
  SUBCASE("wrong format tag") {
    auto doc = chain_doc();
    doc["format"] = "other/2";
    CHECK_THROWS_AS(parse_neutral_json(doc), SchemaError);
  }
  SUBCASE("missing field") {
    auto doc = chain_doc();
    doc["nodes"][0].erase("out_shape");
    CHECK_THROWS_AS(parse_neutral_json(doc), SchemaError);
  }
  SUBCASE("unreachable node") {
    auto doc = chain_doc();
    doc["nodes"].push_back(node("lost", "Dense", shape({}, 3), shape({}, 3)));
    CHECK_THROWS_AS(parse_neutral_json(doc), DisconnectedError);
  }
  SUBCASE("not JSON") { CHECK_THROWS_AS(parse_neutral_json(std::string_view("{nope")), SchemaError); }
}

TEST_CASE("neutral round trip") {
  const auto g = parse_neutral_json(chain_doc());
  const auto again = parse_neutral_json(std::string_view(to_neutral_json(g)));
  CHECK(again.nodes() == g.nodes());
  CHECK(again.edges == g.edges);
  CHECK(again.inputs == g.inputs);
  CHECK(again.outputs == g.outputs);
}

TEST_CASE("keras sequential conv with same padding") {
  const char* text = R"({"class_name": "Sequential", "config": {"name": "s", "layers": [
    {"class_name": "Conv2D", "config": {"name": "conv", "filters": 64, "kernel_size": [3, 3],
     "strides": [1, 1], "padding": "same", "batch_input_shape": [null, 224, 224, 3]}}]}})";
  const auto g = parse_keras_model_json(std::string_view(text));
  REQUIRE(g.size() == 1);
  CHECK(g.node("conv").in_shape == img({224, 224}, 3));
  CHECK(g.node("conv").out_shape == img({224, 224}, 64));
}

TEST_CASE("keras functional non-series-parallel graph, legacy inbound encoding") {
  const char* text = R"({"class_name": "Functional", "config": {"name": "m", "layers": [
    {"class_name": "InputLayer", "name": "a", "config": {"name": "a", "batch_input_shape": [null, 8, 8, 4]}, "inbound_nodes": []},
    {"class_name": "Activation", "name": "b", "config": {"name": "b", "activation": "relu"}, "inbound_nodes": [[["a", 0, 0, {}]]]},
    {"class_name": "Activation", "name": "c", "config": {"name": "c", "activation": "relu"}, "inbound_nodes": [[["a", 0, 0, {}]]]},
    {"class_name": "Add", "name": "d", "config": {"name": "d"}, "inbound_nodes": [[["b", 0, 0, {}], ["c", 0, 0, {}]]]},
    {"class_name": "Add", "name": "e", "config": {"name": "e"}, "inbound_nodes": [[["d", 0, 0, {}], ["b", 0, 0, {}]]]}],
    "input_layers": [["a", 0, 0]], "output_layers": [["e", 0, 0]]}})";
  const auto g = parse_keras_model_json(std::string_view(text));
  CHECK(g.size() == 5);
  CHECK(g.edges == std::vector<Edge>{{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}, {"d", "e"}, {"b", "e"}});
  CHECK(g.outputs == std::vector<std::string>{"e"});
}

TEST_CASE("keras 3 inbound encoding") {
  const char* text = R"({"class_name": "Functional", "config": {"name": "m", "layers": [
    {"class_name": "InputLayer", "name": "x", "config": {"name": "x", "batch_shape": [null, 16, 3]}, "inbound_nodes": []},
    {"class_name": "Conv1D", "name": "c", "config": {"name": "c", "filters": 8, "kernel_size": [3], "strides": [2], "padding": "valid"},
     "inbound_nodes": [{"args": [{"class_name": "__keras_tensor__", "config": {"shape": [null, 16, 3], "keras_history": ["x", 0, 0]}}], "kwargs": {}}]}],
    "input_layers": [["x", 0, 0]], "output_layers": [["c", 0, 0]]}})";
  const auto g = parse_keras_model_json(std::string_view(text));
  CHECK(g.node("c").out_shape == img({7}, 8));
}

TEST_CASE("keras edge cases") {
  SUBCASE("empty layer list") {
    CHECK_THROWS_AS(parse_keras_model_json(std::string_view(
                        R"({"class_name": "Sequential", "config": {"layers": []}})")),
                    DisconnectedError);
  }
  SUBCASE("unknown layer without declared shape") {
    const char* text = R"({"class_name": "Sequential", "config": {"layers": [
      {"class_name": "Dense", "config": {"name": "d", "units": 4, "batch_input_shape": [null, 8]}},
      {"class_name": "Mystery", "config": {"name": "m"}}]}})";
    CHECK_THROWS_AS(parse_keras_model_json(std::string_view(text)), UnsupportedLayerError);
  }
  SUBCASE("unknown layer with declared shape passes through") {
    const char* text = R"({"class_name": "Sequential", "config": {"layers": [
      {"class_name": "Dense", "config": {"name": "d", "units": 4, "batch_input_shape": [null, 8]}},
      {"class_name": "Mystery", "config": {"name": "m", "output_shape": [12]}}]}})";
    const auto g = parse_keras_model_json(std::string_view(text));
    CHECK(g.node("m").out_shape == TensorShape::dense(12));
    CHECK(g.node("m").in_shape == TensorShape::dense(4));
  }
  SUBCASE("channels_first rejected") {
    const char* text = R"({"class_name": "Sequential", "config": {"layers": [
      {"class_name": "Conv2D", "config": {"name": "c", "filters": 4, "kernel_size": 3,
       "data_format": "channels_first", "batch_input_shape": [null, 3, 8, 8]}}]}})";
    CHECK_THROWS_AS(parse_keras_model_json(std::string_view(text)), UnsupportedLayerError);
  }
}

TEST_CASE("layer arithmetic examples") {
  CHECK(infer_layer_output(layer("MaxPooling2D", {{"pool_size", std::vector<long>{2, 2}},
                                                  {"strides", std::vector<long>{2, 2}}}),
                           {img({224, 224}, 64)}) == img({112, 112}, 64));
  CHECK(infer_layer_output(layer("Concatenate", {{"axis", -1L}}),
                           {img({56, 56}, 64), img({56, 56}, 128)}) == img({56, 56}, 192));
  CHECK_THROWS_AS(infer_layer_output(layer("Add"), {img({28, 28}, 256), img({14, 14}, 256)}),
                  ShapeMismatchError);
  CHECK(infer_layer_output(layer("Flatten"), {img({7, 7}, 512)}) == TensorShape::dense(25088));
  CHECK_THROWS_AS(infer_layer_output(layer("Flatten"), {img({-1, 7}, 2)}), ShapeMismatchError);
  CHECK(infer_layer_output(layer("GlobalAveragePooling2D"), {img({7, 7}, 2048)}) ==
        TensorShape::dense(2048));
  CHECK(infer_layer_output(layer("Reshape", {{"target_shape", std::vector<long>{-1, 4}}}),
                           {img({4, 4}, 2)}) == img({8}, 4));
  CHECK(infer_layer_output(layer("ZeroPadding2D", {{"padding", std::vector<long>{3, 3, 3, 3}}}),
                           {img({224, 224}, 3)}) == img({230, 230}, 3));
  CHECK(infer_layer_output(layer("Cropping2D", {{"cropping", std::vector<long>{1, 2, 0, 0}}}),
                           {img({10, 10}, 3)}) == img({7, 10}, 3));
  CHECK(infer_layer_output(layer("UpSampling2D", {{"size", std::vector<long>{2, 2}}}),
                           {img({-1, 5}, 3)}) == img({-1, 10}, 3));
  CHECK(infer_layer_output(layer("Dense", {{"units", 10L}}), {TensorShape::dense(4096)}) ==
        TensorShape::dense(10));
}

TEST_CASE("unknown spatial extents propagate") {
  const auto out = infer_layer_output(
      layer("Conv2D", {{"filters", 8L}, {"kernel_size", 3L}, {"padding", std::string("same")},
                       {"strides", 2L}}),
      {img({-1, 9}, 3)});
  CHECK(out == img({-1, 5}, 8));
}

TEST_CASE("windowed layers match index-arithmetic oracle on a grid") {
  for (long in = 1; in <= 16; ++in)
    for (long k = 1; k <= 5; ++k)
      for (long s = 1; s <= 3; ++s)
        for (long d = 1; d <= 2; ++d)
          for (bool same : {false, true}) {
            const std::string padding = same ? "same" : "valid";
            const long expect = window_oracle(in, k, s, d, same);
            auto conv = layer("Conv2D", {{"filters", 5L},
                                         {"kernel_size", std::vector<long>{k, k}},
                                         {"strides", std::vector<long>{s, s}},
                                         {"dilation_rate", std::vector<long>{d, d}},
                                         {"padding", padding}});
            auto t = layer("Conv2DTranspose", conv.params);
            const long texpect = transpose_oracle(in, k, s, d, same);
            CHECK(infer_layer_output(t, {img({in, in}, 2)}) == img({texpect, texpect}, 5));
            if (expect <= 0) {
              CHECK_THROWS_AS(infer_layer_output(conv, {img({in, in}, 2)}), ShapeMismatchError);
              continue;
            }
            CHECK(infer_layer_output(conv, {img({in, in}, 2)}) == img({expect, expect}, 5));
            if (d == 1) {
              auto pool = layer("AveragePooling1D", {{"pool_size", k},
                                                     {"strides", s},
                                                     {"padding", padding}});
              CHECK(infer_layer_output(pool, {img({in}, 3)}) == img({expect}, 3));
            }
          }
}

TEST_CASE("shape inference is independent of topological order") {
  // Diamond with two conv arms; reorder node insertion and compare shapes.
  auto make = [](bool swap) {
    const char* a = R"({"class_name": "Conv2D", "name": "p", "config": {"name": "p", "filters": 4, "kernel_size": 3, "padding": "same"}, "inbound_nodes": [[["x", 0, 0, {}]]]})";
    const char* b = R"({"class_name": "Conv2D", "name": "q", "config": {"name": "q", "filters": 6, "kernel_size": 1, "strides": 2, "padding": "valid"}, "inbound_nodes": [[["p", 0, 0, {}]]]})";
    const char* c = R"({"class_name": "MaxPooling2D", "name": "r", "config": {"name": "r"}, "inbound_nodes": [[["x", 0, 0, {}]]]})";
    json layers = json::array();
    layers.push_back(json::parse(R"({"class_name": "InputLayer", "name": "x", "config": {"name": "x", "batch_input_shape": [null, 10, 10, 3]}, "inbound_nodes": []})"));
    if (swap) {
      layers.push_back(json::parse(c));
      layers.push_back(json::parse(a));
      layers.push_back(json::parse(b));
    } else {
      layers.push_back(json::parse(a));
      layers.push_back(json::parse(b));
      layers.push_back(json::parse(c));
    }
    layers.push_back(json::parse(R"({"class_name": "Concatenate", "name": "z", "config": {"name": "z"}, "inbound_nodes": [[["q", 0, 0, {}], ["r", 0, 0, {}]]]})"));
    return parse_keras_model_json(json{{"class_name", "Functional"}, {"config", {{"layers", layers}}}});
  };
  const auto g1 = make(false);
  const auto g2 = make(true);
  for (const auto& n : g1.nodes()) {
    CHECK(g2.node(n.id).in_shape == n.in_shape);
    CHECK(g2.node(n.id).out_shape == n.out_shape);
  }
  CHECK(g1.node("z").out_shape == img({5, 5}, 9));
}

namespace {

TensorShape from_keras_dims(const json& dims) {
  std::vector<std::optional<long>> spatial;
  for (std::size_t i = 1; i + 1 < dims.size(); ++i)
    spatial.push_back(dims[i].is_null() ? std::optional<long>{} : dims[i].get<long>());
  return TensorShape::image(std::move(spatial), dims.back().get<long>());
}

}  // namespace

TEST_CASE("inferred shapes agree with the tensor shapes recorded by Keras") {
  // Keras 3 stores every inbound tensor's shape next to its history entry,
  // which gives an oracle independent of the inference code.
  for (const char* name : {"resnet50.json", "inception_v3.json", "unet.json"}) {
    CAPTURE(name);
    const json doc = json::parse(testing::fixture(name));
    const auto g = parse_keras_model_json(doc);
    std::size_t checked = 0;
    for (const auto& layer : doc["config"]["layers"]) {
      const std::string id = layer["name"];
      const auto preds = g.predecessors(id);
      std::size_t k = 0;
      std::function<void(const json&)> walk = [&](const json& v) {
        if (v.is_object() && v.contains("keras_history")) {
          REQUIRE(k < preds.size());
          CHECK(g.node(preds[k]).out_shape == from_keras_dims(v["shape"]));
          ++k;
          ++checked;
        } else if (v.is_object() && v.contains("config")) {
          walk(v["config"]);
        } else if (v.is_array()) {
          for (const auto& e : v) walk(e);
        }
      };
      for (const auto& call : layer["inbound_nodes"]) walk(call["args"]);
      CHECK(k == preds.size());
    }
    CHECK(checked == g.edges.size());
  }
}

TEST_CASE("fixture inventory") {
  CHECK(parse_model(testing::fixture("resnet50.json")).size() == 177);
  CHECK(parse_model(testing::fixture("sequential_cnn.json")).size() == 16);
  const auto nonsp = parse_model(testing::fixture("nonsp_legacy.json"));
  CHECK(nonsp.size() == 5);
  CHECK(nonsp.node("e").out_shape == img({64, 64}, 32));
  CHECK(parse_model(testing::fixture("neutral_unknown.json")).node("attn").out_shape ==
        img({-1, -1}, 32));
  CHECK_THROWS_AS(parse_model(testing::fixture("invalid/broken.json")), SchemaError);
  CHECK_THROWS_AS(parse_model(testing::fixture("invalid/cyclic.json")), CycleError);
}
