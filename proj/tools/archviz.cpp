#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>

#include "archviz/error.hpp"
#include "archviz/ingest.hpp"
#include "archviz/pipeline.hpp"
#include "archviz/service.hpp"

using namespace archviz;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

/// Input-side failure that is not a library error (unreadable files etc.).
struct InputError : std::runtime_error {
  std::string kind;
  InputError(std::string k, const std::string& message) : std::runtime_error(message), kind(std::move(k)) {}
};

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("IOError", "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) throw InputError("IOError", "cannot write '" + path + "'");
}

struct RenderOptions {
  std::string input;
  std::string output;
  std::string format = "auto";
  std::string config_file;
  std::vector<std::string> hide;
  std::vector<std::string> route;
  int auto_aggregate = -1;
  std::vector<std::string> aggregates;
  std::vector<std::string> colors;
  std::string palette;
  std::string channel_scale;
  bool textures = false;
  std::optional<double> min_height, max_height, min_width, max_width;
  bool no_spatial = false;
  bool no_channel = false;
  bool placeholders = false;
  std::string scene_file;
};

RenderConfig build_config(const RenderOptions& o) {
  RenderConfig c;
  if (!o.config_file.empty()) {
    const std::string text = read_input(o.config_file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("config file is not valid JSON: " + std::string(e.what()));
    }
    c = config_from_json(j);
  }
  for (const auto& t : o.hide) c.view.hidden_types.insert(t);
  for (const auto& r : o.route) c.view.routing_insertions.push_back(r);
  if (o.no_spatial) c.view.labels.show_spatial_labels = false;
  if (o.no_channel) c.view.labels.show_channel_labels = false;
  if (o.placeholders) c.view.labels.show_io_placeholders = true;
  for (const auto& spec : o.aggregates) c.aggregations = c.aggregations.add(parse_aggregate_spec(spec));
  if (o.auto_aggregate >= 0) c.auto_aggregate = o.auto_aggregate;

  nlohmann::json style = nlohmann::json::object();
  if (!o.palette.empty()) style["palette"] = o.palette;
  if (!o.channel_scale.empty()) style["channel_scale"] = o.channel_scale;
  if (o.textures) style["textures"] = true;
  if (o.min_height) style["min_height"] = *o.min_height;
  if (o.max_height) style["max_height"] = *o.max_height;
  if (o.min_width) style["min_width"] = *o.min_width;
  if (o.max_width) style["max_width"] = *o.max_width;
  for (const auto& spec : o.colors) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw InvalidStyleError("colour must look like Type=#RRGGBB");
    style["type_overrides"][spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  c.style = style_from_json(style, c.style);
  return c;
}

int run_render(const RenderOptions& o) {
  const NetworkGraph graph = parse_model(read_input(o.input), parse_model_format(o.format));
  const Scene scene = render_scene(graph, build_config(o));
  write_output(o.output, emit_svg(scene));
  if (!o.scene_file.empty()) write_output(o.scene_file, scene_to_json(scene).dump(2) + "\n");
  return 0;
}

int run_inspect(const std::string& input, const std::string& format, bool as_json) {
  const NetworkGraph graph = parse_model(read_input(input), parse_model_format(format));
  const auto info = inspect_graph(graph);
  if (as_json) {
    std::cout << info.dump(2) << "\n";
    return 0;
  }
  std::printf("nodes: %zu\nedges: %zu\n", graph.size(), graph.edges.size());
  std::printf("types:\n");
  for (const auto& [type, count] : info["types"].items())
    std::printf("  %-28s %d\n", type.c_str(), count.get<int>());
  std::printf("chains: %zu\n", info["chains"].size());
  if (info["candidate"].is_null()) {
    std::printf("candidate: none\n");
  } else {
    std::string seq;
    for (const auto& t : info["candidate"]["sequence"]) seq += (seq.empty() ? "" : ",") + t.get<std::string>();
    std::printf("candidate: %s (x%d)\n", seq.c_str(), info["candidate"]["count"].get<int>());
  }
  for (const auto& w : ingest_warnings(graph)) std::printf("warning: %s\n", w.c_str());
  return 0;
}

int run_serve(const std::string& bind, int port, std::string data_dir) {
  if (data_dir.empty()) {
    const char* env = std::getenv("ARCHVIZ_DATA_DIR");
    data_dir = env && *env ? env : "archviz-data";
  }
  Service service(data_dir);
  return run_server(service, bind, port);
}

void report(bool as_json, const std::string& kind, const std::string& message) {
  if (as_json) {
    std::cerr << error_to_json(kind, message).dump() << "\n";
  } else {
    std::cerr << "archviz: " << kind << ": " << message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile CNN graphs into SVG architecture figures"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags also after the subcommand
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Diagnostics as JSON on stderr");

  RenderOptions ro;
  auto* render = app.add_subcommand("render", "Render a model to SVG");
  render->add_option("input", ro.input, "Model JSON file, '-' for stdin")->required();
  render->add_option("-o,--output", ro.output, "SVG output path (stdout if omitted)");
  render->add_option("--format", ro.format, "auto, keras or neutral");
  render->add_option("--config", ro.config_file, "RenderConfig JSON applied before the flags");
  render->add_option("--hide", ro.hide, "Layer types to hide")->delimiter(',');
  render->add_option("--route", ro.route, "Insert a routing layer after this node id")->delimiter(',');
  render->add_option("--auto-aggregate", ro.auto_aggregate, "Auto-aggregation rounds");
  render->add_option("--aggregate", ro.aggregates, "Aggregation \"Name=TypeA,TypeB\"");
  render->add_option("--color", ro.colors, "Colour override \"Type=#RRGGBB\"");
  render->add_option("--palette", ro.palette, "pleasing17, accessible8 or hue-gap");
  render->add_option("--channel-scale", ro.channel_scale, "linear or log");
  render->add_flag("--textures", ro.textures, "Fill glyphs with monochrome patterns");
  render->add_option("--min-height", ro.min_height);
  render->add_option("--max-height", ro.max_height);
  render->add_option("--min-width", ro.min_width);
  render->add_option("--max-width", ro.max_width);
  render->add_flag("--no-spatial-labels", ro.no_spatial);
  render->add_flag("--no-channel-labels", ro.no_channel);
  render->add_flag("--placeholders", ro.placeholders, "Dashed input/output placeholders");
  render->add_option("--emit-scene", ro.scene_file, "Also write the scene JSON");

  std::string inspect_input, inspect_format = "auto";
  bool inspect_json = false;
  auto* inspect = app.add_subcommand("inspect", "Summarize a model");
  inspect->add_option("input", inspect_input, "Model JSON file, '-' for stdin")->required();
  inspect->add_option("--format", inspect_format, "auto, keras or neutral");
  inspect->add_flag("--json", inspect_json, "JSON output");

  std::string bind = "127.0.0.1", data_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", bind, "Address to bind");
  serve->add_option("--port", port, "Port");
  serve->add_option("--data-dir", data_dir, "Document directory (default $ARCHVIZ_DATA_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (!json_errors) return app.exit(e) == 0 ? 0 : kExitInput;
    report(true, "UsageError", e.what());
    return kExitInput;
  }

  try {
    if (*render) return run_render(ro);
    if (*inspect) return run_inspect(inspect_input, inspect_format, inspect_json);
    if (*serve) return run_serve(bind, port, data_dir);
  } catch (const Error& e) {
    report(json_errors, e.kind(), e.what());
    return kExitInput;
  } catch (const InputError& e) {
    report(json_errors, e.kind, e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    report(json_errors, "InternalError", e.what());
    return kExitInternal;
  }
  return 0;
}
