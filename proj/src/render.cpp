#include "archviz/render.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "archviz/error.hpp"

namespace archviz {

// ---- size mapping ------------------------------------------------------------

ShapeMapper::ShapeMapper(const NetworkGraph& graph, const StyleConfig& style) : style_(style) {
  for (const auto& n : graph.nodes()) {
    for (const TensorShape* s : {&n.in_shape, &n.out_shape}) {
      if (s->is_dense) {
        dense_.push_back(static_cast<double>(s->channels));
        continue;
      }
      channels_.push_back(static_cast<double>(s->channels));
      if (auto e = s->extent()) extents_.push_back(*e);
    }
  }
}

double ShapeMapper::height(const TensorShape& shape) const {
  if (shape.is_dense) return height_for_dense(static_cast<double>(shape.channels), dense_, style_);
  const auto e = shape.extent();
  if (!e) return (style_.min_height + style_.max_height) / 2;
  return height_for_extent(*e, extents_, style_);
}

double ShapeMapper::half_width(const TensorShape& shape) const {
  if (shape.is_dense) return style_.min_width / 2;
  return width_for_channels(static_cast<double>(shape.channels), channels_, style_) / 2;
}

namespace {

std::vector<int> in_edges(const NetworkGraph& g, const std::string& id) {
  std::vector<int> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (g.edges[i].second == id) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> out_edges(const NetworkGraph& g, const std::string& id) {
  std::vector<int> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (g.edges[i].first == id) out.push_back(static_cast<int>(i));
  return out;
}

/// Length of the handle for edge `e` on the target side of `id`.
double in_length(const NetworkGraph& g, const std::string& id, std::size_t in_degree, int e,
                 const ShapeMapper& m) {
  if (in_degree <= 1) return m.height(g.node(id).in_shape);
  return m.height(g.node(g.edges[e].first).out_shape);
}

double stack_extent(const std::vector<double>& lengths) {
  double total = kHandleGap * static_cast<double>(lengths.size() - 1);
  for (double l : lengths) total += l;
  return total;
}

}  // namespace

std::vector<double> left_lengths(const NetworkGraph& g, const std::string& id,
                                 const ShapeMapper& m) {
  const auto edges = in_edges(g, id);
  if (edges.empty()) return {m.height(g.node(id).in_shape)};
  std::vector<double> out;
  for (int e : edges) out.push_back(in_length(g, id, edges.size(), e, m));
  return out;
}

std::vector<double> right_lengths(const NetworkGraph& g, const std::string& id,
                                  const ShapeMapper& m) {
  const std::size_t k = std::max<std::size_t>(1, out_edges(g, id).size());
  return std::vector<double>(k, m.height(g.node(id).out_shape));
}

NodeBox glyph_box(const NetworkGraph& g, const std::string& id, const ShapeMapper& m) {
  const auto& n = g.node(id);
  return {m.half_width(n.in_shape) + m.half_width(n.out_shape),
          std::max(stack_extent(left_lengths(g, id, m)), stack_extent(right_lengths(g, id, m)))};
}

// ---- glyph geometry ------------------------------------------------------------

namespace {

double peer_y_of_in_edge(const NetworkGraph& g, const LayoutResult& l, int e) {
  const auto& lane = l.lanes[e];
  return lane.empty() ? l.y.at(g.edges[e].first) : lane.back();
}

double peer_y_of_out_edge(const NetworkGraph& g, const LayoutResult& l, int e) {
  const auto& lane = l.lanes[e];
  return lane.empty() ? l.y.at(g.edges[e].second) : lane.front();
}

std::vector<Handle> stack_handles(std::vector<std::pair<int, double>> edges_and_lengths,
                                  const std::function<double(int)>& peer_y, double x,
                                  double cy) {
  std::stable_sort(edges_and_lengths.begin(), edges_and_lengths.end(),
                   [&](const auto& a, const auto& b) {
                     const double ya = peer_y(a.first), yb = peer_y(b.first);
                     if (ya != yb) return ya < yb;
                     return a.first < b.first;
                   });
  std::vector<double> lengths;
  for (const auto& el : edges_and_lengths) lengths.push_back(el.second);
  double top = cy - stack_extent(lengths) / 2;
  std::vector<Handle> out;
  for (const auto& [e, len] : edges_and_lengths) {
    out.push_back({x, top, top + len, e});
    top += len + kHandleGap;
  }
  return out;
}

}  // namespace

Glyph build_glyph(const NetworkGraph& g, const std::string& id, const LayoutResult& layout,
                  const ShapeMapper& m) {
  const auto& n = g.node(id);
  Glyph glyph;
  glyph.node_id = id;
  glyph.layer_type = n.layer_type;

  const double cx = layout.x.at(id);
  const double cy = layout.y.at(id);
  const double wl = m.half_width(n.in_shape);
  const double wr = m.half_width(n.out_shape);
  glyph.left_x = cx - (wl + wr) / 2;
  glyph.right_x = glyph.left_x + wl + wr;

  const auto ins = in_edges(g, id);
  const auto outs = out_edges(g, id);
  std::vector<std::pair<int, double>> left, right;
  for (int e : ins) left.emplace_back(e, in_length(g, id, ins.size(), e, m));
  for (int e : outs) right.emplace_back(e, m.height(n.out_shape));
  glyph.left_handles = stack_handles(
      left, [&](int e) { return peer_y_of_in_edge(g, layout, e); }, glyph.left_x, cy);
  glyph.right_handles = stack_handles(
      right, [&](int e) { return peer_y_of_out_edge(g, layout, e); }, glyph.right_x, cy);

  if (glyph.left_handles.empty()) {
    const double h = m.height(n.in_shape);
    glyph.left_top = cy - h / 2;
    glyph.left_bottom = cy + h / 2;
  } else {
    glyph.left_top = glyph.left_handles.front().y_top;
    glyph.left_bottom = glyph.left_handles.back().y_bottom;
  }
  if (glyph.right_handles.empty()) {
    const double h = m.height(n.out_shape);
    glyph.right_top = cy - h / 2;
    glyph.right_bottom = cy + h / 2;
  } else {
    glyph.right_top = glyph.right_handles.front().y_top;
    glyph.right_bottom = glyph.right_handles.back().y_bottom;
  }

  // Clockwise (y grows downwards): top edge, right side down, bottom edge,
  // left side up. Gaps between handles become shallow inward notches so each
  // handle stays a distinct vertical segment.
  const double notch = std::min(4.0, (glyph.right_x - glyph.left_x) / 4);
  auto& poly = glyph.polygon;
  poly.emplace_back(glyph.left_x, glyph.left_top);
  if (glyph.right_handles.size() <= 1) {
    poly.emplace_back(glyph.right_x, glyph.right_top);
    poly.emplace_back(glyph.right_x, glyph.right_bottom);
  } else {
    for (std::size_t i = 0; i < glyph.right_handles.size(); ++i) {
      const auto& h = glyph.right_handles[i];
      if (i > 0) {
        const double mid = (glyph.right_handles[i - 1].y_bottom + h.y_top) / 2;
        poly.emplace_back(glyph.right_x - notch, mid);
      }
      poly.emplace_back(glyph.right_x, h.y_top);
      poly.emplace_back(glyph.right_x, h.y_bottom);
    }
  }
  if (glyph.left_handles.size() <= 1) {
    poly.emplace_back(glyph.left_x, glyph.left_bottom);
  } else {
    for (std::size_t k = glyph.left_handles.size(); k-- > 0;) {
      const auto& h = glyph.left_handles[k];
      poly.emplace_back(glyph.left_x, h.y_bottom);
      if (k > 0) {
        poly.emplace_back(glyph.left_x, h.y_top);
        const double mid = (glyph.left_handles[k - 1].y_bottom + h.y_top) / 2;
        poly.emplace_back(glyph.left_x + notch, mid);
      }
    }
  }
  return glyph;
}

// ---- edges -----------------------------------------------------------------------

namespace {

Polyline2d simplify(const Polyline2d& pts) {
  Polyline2d out;
  for (const auto& p : pts) {
    if (!out.empty() && (p - out.back()).norm() < 1e-9) continue;
    while (out.size() >= 2 &&
           std::abs(orientation(out[out.size() - 2], out.back(), p)) < 1e-6 &&
           (out.back() - out[out.size() - 2]).dot(p - out.back()) > 0)
      out.pop_back();
    out.push_back(p);
  }
  return out;
}

const Handle& handle_for(const std::vector<Handle>& handles, int edge) {
  for (const auto& h : handles)
    if (h.edge == edge) return h;
  throw std::logic_error("glyph has no handle for edge " + std::to_string(edge));
}

}  // namespace

std::vector<EdgePath> build_edges(const NetworkGraph& g, const std::vector<Glyph>& glyphs,
                                  const LayoutResult& layout) {
  std::map<std::string, const Glyph*> by_id;
  for (const auto& gl : glyphs) by_id[gl.node_id] = &gl;
  std::vector<EdgePath> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& [s, d] = g.edges[i];
    const int e = static_cast<int>(i);
    const Handle& from = handle_for(by_id.at(s)->right_handles, e);
    const Handle& to = handle_for(by_id.at(d)->left_handles, e);
    const int rs = layout.rank.at(s);
    const int rd = layout.rank.at(d);
    auto band_right = [&](int r) { return layout.band_left[r] + layout.band_width[r]; };

    // Horizontal inside every band, straight across the gaps; long edges
    // pass through their reserved slots.
    Polyline2d pts;
    pts.emplace_back(from.x, from.center());
    pts.emplace_back(band_right(rs), from.center());
    for (std::size_t k = 0; k < layout.lanes[i].size(); ++k) {
      const int r = rs + 1 + static_cast<int>(k);
      pts.emplace_back(layout.band_left[r], layout.lanes[i][k]);
      pts.emplace_back(band_right(r), layout.lanes[i][k]);
    }
    pts.emplace_back(layout.band_left[rd], to.center());
    pts.emplace_back(to.x, to.center());
    out.push_back({e, s, d, simplify(pts)});
  }
  return out;
}

// ---- legend ----------------------------------------------------------------------

std::vector<LegendItem> legend_entries(const std::vector<std::string>& visible_types,
                                       const std::set<std::string>& hidden_types,
                                       const AggregationState& aggregations) {
  std::vector<LegendItem> items;
  std::set<std::string> seen;
  auto add_base = [&](const std::string& type, bool active) {
    if (aggregations.contains(type) || !seen.insert(type).second) return;
    LegendItem item;
    item.key = item.label = type;
    item.active = active;
    items.push_back(std::move(item));
  };
  for (const auto& t : visible_types) add_base(t, true);
  for (const auto& d : aggregations.defs())
    for (const auto& ref : d.sequence)
      add_base(ref, std::find(visible_types.begin(), visible_types.end(), ref) !=
                        visible_types.end());
  for (const auto& t : hidden_types) add_base(t, false);

  std::map<std::string, int> complexity;
  std::function<int(const std::string&)> depth = [&](const std::string& id) -> int {
    if (!aggregations.contains(id)) return 0;
    if (auto it = complexity.find(id); it != complexity.end()) return it->second;
    int deepest = 0;
    for (const auto& ref : aggregations.def(id).sequence) deepest = std::max(deepest, depth(ref));
    return complexity[id] = deepest + 1;
  };
  for (const auto& d : aggregations.defs()) {
    LegendItem item;
    item.key = d.id;
    item.label = d.name;
    item.complexity = depth(d.id);
    item.active = d.active;
    item.is_aggregate = true;
    items.push_back(std::move(item));
  }
  std::stable_sort(items.begin(), items.end(), [](const LegendItem& a, const LegendItem& b) {
    if (a.complexity != b.complexity) return a.complexity < b.complexity;
    if (a.label != b.label) return a.label < b.label;
    return a.key < b.key;
  });
  return items;
}

// ---- scene -------------------------------------------------------------------------

namespace {

std::string dims_label(const TensorShape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.spatial.size(); ++i) {
    if (i > 0) out += "×";
    out += s.spatial[i] ? std::to_string(*s.spatial[i]) : "?";
  }
  return out;
}

Paint paint_for(const Fill& fill, bool aggregate) {
  Paint p;
  if (fill.pattern) {
    p.fill = "url(#pattern-" + std::to_string(*fill.pattern) + ")";
    p.stroke = "#000000";
  } else if (aggregate) {
    // Inverted scheme: dark body, lighter border.
    p.fill = fill.color.darker(0.6).hex();
    p.stroke = fill.color.hex();
  } else {
    p.fill = fill.color.hex();
    p.stroke = fill.color.darker(0.6).hex();
  }
  p.stroke_width = aggregate ? kAggregateBorderWidth : kBorderWidth;
  return p;
}

double text_width(const std::string& text) {
  // Rough advance for a 10 unit sans-serif face; UTF-8 continuation bytes
  // do not count.
  double chars = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) chars += 1;
  return chars * 0.6 * kFontSize;
}

Box2d label_box(const Label& l) {
  const double w = text_width(l.text);
  double x0 = l.at.x() - w / 2;
  if (l.anchor == "start") x0 = l.at.x();
  if (l.anchor == "end") x0 = l.at.x() - w;
  Box2d b;
  b.extend(Point2d(x0, l.at.y() - kFontSize));
  b.extend(Point2d(x0 + w, l.at.y() + 2));
  return b;
}

}  // namespace

Scene build_scene(const NetworkGraph& ingested, const ViewState& view,
                  const AggregationState& aggregations, const StyleConfig& style) {
  style.validate();
  const NetworkGraph base = apply_view(ingested, view);
  const AggregatedGraph shown = apply_aggregations(base, aggregations);
  const NetworkGraph& g = shown.graph;

  const ShapeMapper mapper(g, style);
  std::map<std::string, NodeBox> boxes;
  for (const auto& n : g.nodes()) boxes[n.id] = glyph_box(g, n.id, mapper);
  std::vector<PortLengths> ports;
  for (const auto& [src, dst] : g.edges) {
    const std::size_t k = g.in_degree(dst);
    ports.push_back({mapper.height(g.node(src).out_shape),
                     k <= 1 ? mapper.height(g.node(dst).in_shape) : mapper.height(g.node(src).out_shape)});
  }
  const LayoutResult layout = layout_graph(g, boxes, style.spacing, ports, kHandleGap);

  // Colours: base types in first-appearance order of the unaggregated view,
  // so toggling an aggregation never recolours anything else.
  std::vector<std::string> visible_types;
  for (const auto& id : base.topological_order()) {
    const auto& t = base.node(id).layer_type;
    if (std::find(visible_types.begin(), visible_types.end(), t) == visible_types.end())
      visible_types.push_back(t);
  }
  std::set<std::string> hidden_types;
  for (const auto& n : ingested.nodes())
    if (view.hidden_types.count(n.layer_type)) hidden_types.insert(n.layer_type);

  std::vector<LegendItem> legend = legend_entries(visible_types, hidden_types, aggregations);
  std::vector<std::string> color_order = visible_types;
  for (const auto& item : legend)
    if (!item.is_aggregate &&
        std::find(color_order.begin(), color_order.end(), item.key) == color_order.end())
      color_order.push_back(item.key);
  StyleConfig color_cfg = style;
  for (const auto& d : aggregations.defs()) {
    color_order.push_back(d.id);
    if (d.color && !color_cfg.type_overrides.count(d.id)) color_cfg.type_overrides[d.id] = *d.color;
  }
  const ColorAssignment colors = assign_colors(color_order, color_cfg);

  Scene scene;
  std::vector<std::string> ordered;
  for (const auto& n : g.nodes()) ordered.push_back(n.id);
  std::stable_sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
    if (layout.rank.at(a) != layout.rank.at(b)) return layout.rank.at(a) < layout.rank.at(b);
    return layout.order.at(a) < layout.order.at(b);
  });
  for (const auto& id : ordered) {
    Glyph glyph = build_glyph(g, id, layout, mapper);
    glyph.is_aggregate = shown.is_aggregate(id);
    const Fill& fill = colors.at(glyph.layer_type);
    glyph.paint = paint_for(fill, glyph.is_aggregate);
    if (fill.pattern) scene.patterns.insert(*fill.pattern);
    scene.glyphs.push_back(std::move(glyph));
  }
  scene.edges = build_edges(g, scene.glyphs, layout);

  std::map<std::string, const Glyph*> glyph_of;
  for (const auto& gl : scene.glyphs) glyph_of[gl.node_id] = &gl;

  if (view.labels.show_spatial_labels) {
    for (const auto& id : ordered) {
      const auto& n = g.node(id);
      if (g.out_degree(id) == 0 || n.out_shape.is_dense) continue;
      const int r = layout.rank.at(id);
      const double gap_mid = layout.band_left[r] + layout.band_width[r] + style.spacing.h_gap / 2;
      scene.labels.push_back({Point2d(gap_mid, glyph_of.at(id)->right_top - 4),
                              dims_label(n.out_shape), "spatial"});
    }
  }
  if (view.labels.show_channel_labels) {
    for (const auto& gl : scene.glyphs) {
      const auto& n = g.node(gl.node_id);
      const double bottom = std::max(gl.left_bottom, gl.right_bottom);
      scene.labels.push_back({Point2d((gl.left_x + gl.right_x) / 2, bottom + kFontSize + 2),
                              std::to_string(n.out_shape.channels), "channels"});
    }
  }
  if (view.labels.show_io_placeholders) {
    for (const auto& id : g.inputs) {
      const Glyph& gl = *glyph_of.at(id);
      const double s = gl.left_bottom - gl.left_top;
      const double x1 = gl.left_x - style.spacing.h_gap;
      Box2d b;
      b.extend(Point2d(x1 - s, gl.left_top));
      b.extend(Point2d(x1, gl.left_bottom));
      scene.placeholders.push_back({id, b});
    }
    for (const auto& id : g.outputs) {
      const Glyph& gl = *glyph_of.at(id);
      const double s = gl.right_bottom - gl.right_top;
      const double x0 = gl.right_x + style.spacing.h_gap;
      Box2d b;
      b.extend(Point2d(x0, gl.right_top));
      b.extend(Point2d(x0 + s, gl.right_bottom));
      scene.placeholders.push_back({id, b});
    }
  }

  Box2d graph_box;
  for (const auto& gl : scene.glyphs)
    for (const auto& p : gl.polygon) graph_box.extend(p);
  for (const auto& e : scene.edges)
    for (const auto& p : e.points) graph_box.extend(p);
  for (const auto& l : scene.labels) graph_box.extend(label_box(l));
  for (const auto& p : scene.placeholders) graph_box.extend(p.box);

  // Legend rows below the figure, wrapped to the figure width.
  const double left = graph_box.empty() ? 0 : graph_box.min.x();
  const double row_limit = std::max(graph_box.empty() ? 0.0 : graph_box.size().x(), 400.0);
  double x = left;
  double y = (graph_box.empty() ? 0 : graph_box.max.y()) + 30;
  const double swatch = 14, member = 10, row_height = 24;
  for (auto& item : legend) {
    const Fill& fill = colors.at(item.key);
    Paint paint = paint_for(fill, item.is_aggregate);
    if (fill.pattern) scene.patterns.insert(*fill.pattern);
    std::vector<std::string> members;
    if (item.is_aggregate) members = aggregations.def(item.key).sequence;
    const double width = swatch + 4 + text_width(item.label) +
                         (members.empty() ? 0 : 6 + static_cast<double>(members.size()) * (member + 2));
    if (x > left && x + width > left + row_limit) {
      x = left;
      y += row_height;
    }
    const std::string text_color = item.active ? "#000000" : kInactiveGray;
    if (!item.active) paint.stroke = kInactiveGray;
    Box2d sw;
    sw.extend(Point2d(x, y));
    sw.extend(Point2d(x + swatch, y + swatch));
    item.swatches.emplace_back(sw, paint);
    item.text = {Point2d(x + swatch + 4, y + swatch - 3), item.label, "legend", text_color, "start"};
    double mx = x + swatch + 4 + text_width(item.label) + 6;
    for (const auto& ref : members) {
      Paint mp = paint_for(colors.at(ref), aggregations.contains(ref));
      mp.stroke_width = kBorderWidth;
      if (!item.active) mp.stroke = kInactiveGray;
      Box2d mb;
      mb.extend(Point2d(mx, y + 2));
      mb.extend(Point2d(mx + member, y + swatch - 2));
      item.swatches.emplace_back(mb, mp);
      mx += member + 2;
    }
    x += width + 16;
  }
  scene.legend = std::move(legend);

  scene.bounds = graph_box;
  for (const auto& item : scene.legend) {
    for (const auto& [b, p] : item.swatches) scene.bounds.extend(b);
    scene.bounds.extend(label_box(item.text));
  }
  if (!scene.bounds.empty()) {
    scene.bounds.min -= Point2d(10, 10);
    scene.bounds.max += Point2d(10, 10);
  }
  return scene;
}

}  // namespace archviz
