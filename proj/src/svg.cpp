#include <cmath>
#include <cstdio>
#include <sstream>

#include "archviz/render.hpp"

namespace archviz {

std::string format_number(double v) {
  if (std::abs(v) < 0.005) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") return "0";
  return s;
}

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string points_attr(const Polyline2d& pts) {
  std::string out;
  for (const auto& p : pts) {
    if (!out.empty()) out += ' ';
    out += format_number(p.x()) + "," + format_number(p.y());
  }
  return out;
}

std::string paint_attrs(const Paint& p) {
  return "fill=\"" + escape(p.fill) + "\" stroke=\"" + p.stroke + "\" stroke-width=\"" +
         format_number(p.stroke_width) + "\"";
}

/// Tile content of one texture, drawn in black on white over an 8x8 cell.
std::string pattern_body(int index) {
  const std::string line = "<path stroke=\"#000000\" stroke-width=\"1\" fill=\"none\" d=\"";
  switch (index) {
    case 0: return line + "M0 4H8\"/>";
    case 1: return line + "M4 0V8\"/>";
    case 2: return line + "M0 8L8 0M-2 2L2 -2M6 10L10 6\"/>";
    case 3: return line + "M0 0L8 8M-2 6L2 10M6 -2L10 2\"/>";
    case 4: return line + "M0 4H8M4 0V8\"/>";
    case 5: return line + "M0 8L8 0M0 0L8 8\"/>";
    case 6: return "<circle cx=\"4\" cy=\"4\" r=\"1\" fill=\"#000000\"/>";
    case 7: return "<circle cx=\"4\" cy=\"4\" r=\"2.5\" fill=\"#000000\"/>";
    case 8: return line + "M0 2H8M0 6H8\"/>";
    case 9: return line + "M0 4L4 0M4 8L8 4M0 8L8 0\"/>";
    case 10: return "<rect width=\"4\" height=\"4\" fill=\"#000000\"/><rect x=\"4\" y=\"4\" width=\"4\" height=\"4\" fill=\"#000000\"/>";
    default: return line + "M0 6L2 2L4 6L6 2L8 6\"/>";
  }
}

void emit_box(std::ostringstream& os, const Box2d& b, const Paint& p, const char* extra = "") {
  os << "<rect x=\"" << format_number(b.min.x()) << "\" y=\"" << format_number(b.min.y())
     << "\" width=\"" << format_number(b.size().x()) << "\" height=\""
     << format_number(b.size().y()) << "\" " << paint_attrs(p) << extra << "/>\n";
}

void emit_label(std::ostringstream& os, const Label& l) {
  os << "<text class=\"" << l.role << "\" x=\"" << format_number(l.at.x()) << "\" y=\""
     << format_number(l.at.y()) << "\" text-anchor=\"" << l.anchor << "\" fill=\"" << l.color
     << "\">" << escape(l.text) << "</text>\n";
}

}  // namespace

std::string emit_svg(const Scene& scene) {
  Box2d bounds = scene.bounds;
  if (bounds.empty()) {
    bounds.extend(Point2d(0, 0));
    bounds.extend(Point2d(1, 1));
  }
  const auto size = bounds.size();
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
     << format_number(size.x()) << "\" height=\"" << format_number(size.y()) << "\" viewBox=\""
     << format_number(bounds.min.x()) << " " << format_number(bounds.min.y()) << " "
     << format_number(size.x()) << " " << format_number(size.y())
     << "\" font-family=\"sans-serif\" font-size=\"" << format_number(kFontSize) << "\">\n";

  os << "<defs>\n";
  for (int k : scene.patterns) {
    os << "<pattern id=\"pattern-" << k << "\" data-texture=\""
       << kTexturePatterns[static_cast<std::size_t>(k)]
       << "\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\">"
       << "<rect width=\"8\" height=\"8\" fill=\"#FFFFFF\"/>" << pattern_body(k)
       << "</pattern>\n";
  }
  os << "</defs>\n";

  os << "<g class=\"glyphs\">\n";
  for (const auto& g : scene.glyphs) {
    os << "<polygon class=\"glyph" << (g.is_aggregate ? " aggregate" : "") << "\" data-node=\""
       << escape(g.node_id) << "\" data-type=\"" << escape(g.layer_type) << "\" points=\""
       << points_attr(g.polygon) << "\" " << paint_attrs(g.paint) << "/>\n";
  }
  os << "</g>\n";

  os << "<g class=\"edges\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\">\n";
  for (const auto& e : scene.edges) {
    os << "<polyline data-source=\"" << escape(e.source) << "\" data-target=\""
       << escape(e.target) << "\" points=\"" << points_attr(e.points) << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g class=\"labels\">\n";
  for (const auto& l : scene.labels) emit_label(os, l);
  os << "</g>\n";

  os << "<g class=\"placeholders\">\n";
  for (const auto& p : scene.placeholders) {
    os << "<rect data-node=\"" << escape(p.node_id) << "\" x=\"" << format_number(p.box.min.x())
       << "\" y=\"" << format_number(p.box.min.y()) << "\" width=\""
       << format_number(p.box.size().x()) << "\" height=\"" << format_number(p.box.size().y())
       << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
  }
  os << "</g>\n";

  os << "<g class=\"legend\">\n";
  for (const auto& item : scene.legend) {
    os << "<g data-key=\"" << escape(item.key) << "\" data-complexity=\"" << item.complexity
       << "\" data-active=\"" << (item.active ? "true" : "false") << "\">\n";
    for (const auto& [box, paint] : item.swatches) emit_box(os, box, paint);
    emit_label(os, item.text);
    os << "</g>\n";
  }
  os << "</g>\n";
  os << "</svg>\n";
  return os.str();
}

namespace {

nlohmann::json points_json(const Polyline2d& pts) {
  auto out = nlohmann::json::array();
  for (const auto& p : pts) out.push_back(nlohmann::json::array({p.x(), p.y()}));
  return out;
}

nlohmann::json box_json(const Box2d& b) {
  if (b.empty()) return nullptr;
  return {{"x", b.min.x()}, {"y", b.min.y()}, {"width", b.size().x()}, {"height", b.size().y()}};
}

nlohmann::json paint_json(const Paint& p) {
  return {{"fill", p.fill}, {"stroke", p.stroke}, {"stroke_width", p.stroke_width}};
}

nlohmann::json label_json(const Label& l) {
  return {{"x", l.at.x()}, {"y", l.at.y()}, {"text", l.text}, {"role", l.role},
          {"color", l.color}, {"anchor", l.anchor}};
}

nlohmann::json handles_json(const std::vector<Handle>& hs) {
  auto out = nlohmann::json::array();
  for (const auto& h : hs)
    out.push_back({{"x", h.x}, {"y_top", h.y_top}, {"y_bottom", h.y_bottom}, {"edge", h.edge}});
  return out;
}

}  // namespace

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json out;
  out["bounds"] = box_json(scene.bounds);
  out["glyphs"] = nlohmann::json::array();
  for (const auto& g : scene.glyphs) {
    out["glyphs"].push_back({{"node", g.node_id},
                             {"type", g.layer_type},
                             {"aggregate", g.is_aggregate},
                             {"polygon", points_json(g.polygon)},
                             {"left_handles", handles_json(g.left_handles)},
                             {"right_handles", handles_json(g.right_handles)},
                             {"paint", paint_json(g.paint)}});
  }
  out["edges"] = nlohmann::json::array();
  for (const auto& e : scene.edges)
    out["edges"].push_back(
        {{"edge", e.edge}, {"source", e.source}, {"target", e.target}, {"points", points_json(e.points)}});
  out["labels"] = nlohmann::json::array();
  for (const auto& l : scene.labels) out["labels"].push_back(label_json(l));
  out["placeholders"] = nlohmann::json::array();
  for (const auto& p : scene.placeholders)
    out["placeholders"].push_back({{"node", p.node_id}, {"box", box_json(p.box)}});
  out["legend"] = nlohmann::json::array();
  for (const auto& item : scene.legend) {
    auto swatches = nlohmann::json::array();
    for (const auto& [b, p] : item.swatches) swatches.push_back({{"box", box_json(b)}, {"paint", paint_json(p)}});
    out["legend"].push_back({{"key", item.key},
                             {"label", item.label},
                             {"complexity", item.complexity},
                             {"active", item.active},
                             {"aggregate", item.is_aggregate},
                             {"swatches", swatches},
                             {"text", label_json(item.text)}});
  }
  out["patterns"] = scene.patterns;
  return out;
}

}  // namespace archviz
