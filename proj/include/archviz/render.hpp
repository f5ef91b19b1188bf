#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "archviz/aggregation.hpp"
#include "archviz/geometry.hpp"
#include "archviz/layout.hpp"
#include "archviz/style.hpp"
#include "archviz/transform.hpp"

namespace archviz {

inline constexpr double kHandleGap = 8;
inline constexpr double kFontSize = 10;
inline constexpr double kBorderWidth = 1;
inline constexpr double kAggregateBorderWidth = 2.5;
inline constexpr const char* kInactiveGray = "#C8C8C8";

/// Vertical connection segment on a glyph side; `edge` indexes graph.edges.
struct Handle {
  double x = 0;
  double y_top = 0;
  double y_bottom = 0;
  int edge = -1;

  double center() const { return (y_top + y_bottom) / 2; }
};

struct Paint {
  std::string fill;    // "#RRGGBB" or "url(#pattern-N)"
  std::string stroke;  // "#RRGGBB"
  double stroke_width = kBorderWidth;
};

struct Glyph {
  std::string node_id;
  std::string layer_type;
  Polyline2d polygon;
  std::vector<Handle> left_handles;
  std::vector<Handle> right_handles;
  /// Side extents also for sides without handles (graph sources/sinks).
  double left_x = 0, right_x = 0;
  double left_top = 0, left_bottom = 0, right_top = 0, right_bottom = 0;
  Paint paint;
  bool is_aggregate = false;
};

struct EdgePath {
  int edge = -1;
  std::string source;
  std::string target;
  Polyline2d points;
};

struct Label {
  Point2d at;
  std::string text;
  std::string role;  // "spatial", "channels", "legend"
  std::string color = "#000000";
  std::string anchor = "middle";
};

struct Placeholder {
  std::string node_id;
  Box2d box;
};

struct LegendItem {
  std::string key;
  std::string label;
  int complexity = 0;
  bool active = true;
  bool is_aggregate = false;
  /// Swatch first; for aggregates followed by one swatch per member.
  std::vector<std::pair<Box2d, Paint>> swatches;
  Label text;
};

struct Scene {
  std::vector<Glyph> glyphs;  // rank, then order
  std::vector<EdgePath> edges;
  std::vector<Label> labels;
  std::vector<Placeholder> placeholders;
  std::vector<LegendItem> legend;
  std::set<int> patterns;
  Box2d bounds;
};

/// Tensor-to-length mapping over one displayed graph.
class ShapeMapper {
 public:
  ShapeMapper(const NetworkGraph& graph, const StyleConfig& style);
  double height(const TensorShape& shape) const;
  /// Half of the glyph width contributed by one side.
  double half_width(const TensorShape& shape) const;

 private:
  StyleConfig style_;
  std::vector<double> extents_, channels_, dense_;
};

/// Handle lengths of the incoming / outgoing connections of `id`, one per
/// edge in edge-list order; a side without edges yields its node shape.
std::vector<double> left_lengths(const NetworkGraph& g, const std::string& id, const ShapeMapper& m);
std::vector<double> right_lengths(const NetworkGraph& g, const std::string& id, const ShapeMapper& m);

/// Extent a glyph occupies (what layout reserves).
NodeBox glyph_box(const NetworkGraph& g, const std::string& id, const ShapeMapper& m);

/// Glyph geometry at its layout position; handles ordered by the vertical
/// position of the connected peer.
Glyph build_glyph(const NetworkGraph& g, const std::string& id, const LayoutResult& layout,
                  const ShapeMapper& m);

std::vector<EdgePath> build_edges(const NetworkGraph& g, const std::vector<Glyph>& glyphs,
                                  const LayoutResult& layout);

/// Legend keys and complexity: base types 0, aggregates 1 + max(children).
std::vector<LegendItem> legend_entries(const std::vector<std::string>& visible_types,
                                       const std::set<std::string>& hidden_types,
                                       const AggregationState& aggregations);

/// Full pipeline from an ingested graph to a scene.
Scene build_scene(const NetworkGraph& ingested, const ViewState& view,
                  const AggregationState& aggregations, const StyleConfig& style);

std::string emit_svg(const Scene& scene);
nlohmann::json scene_to_json(const Scene& scene);

/// Shortest decimal form with at most two fraction digits ("12.5", "-3", "0").
std::string format_number(double v);

}  // namespace archviz
