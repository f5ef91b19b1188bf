#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archviz/layout.hpp"

namespace archviz {

/// HSV with hue in degrees [0, 360), saturation and value in [0, 1].
struct Color {
  double h = 0;
  double s = 0;
  double v = 0;

  static Color from_hex(std::string_view hex);  // "#RRGGBB", throws InvalidStyleError
  std::string hex() const;
  Color darker(double factor) const { return {h, s, v * factor}; }

  friend bool operator==(const Color&, const Color&) = default;
};

enum class ChannelScale { kLinear, kLog };
enum class PaletteMode { kPleasing17, kAccessible8, kHueGap };

std::string to_string(ChannelScale scale);
std::string to_string(PaletteMode mode);
ChannelScale parse_channel_scale(std::string_view name);  // throws InvalidStyleError
PaletteMode parse_palette_mode(std::string_view name);    // accepts "hue-gap" and "hue_gap"

/// Material design 500 shades of the 17 chromatic hues.
extern const std::array<std::string_view, 17> kPleasingPalette;
/// Wong (2011), colour-blind safe, published order.
extern const std::array<std::string_view, 8> kAccessiblePalette;
/// Monochrome fill patterns for texture mode.
extern const std::array<std::string_view, 12> kTexturePatterns;

struct StyleConfig {
  double min_height = 30;
  double max_height = 100;
  double min_width = 20;
  double max_width = 80;
  ChannelScale channel_scale = ChannelScale::kLinear;
  PaletteMode palette = PaletteMode::kPleasing17;
  bool textures = false;
  /// Layer type (or aggregation id) -> "#RRGGBB".
  std::map<std::string, std::string> type_overrides;
  /// Neuron counts mapped to min/max height; derived from the graph if unset.
  std::optional<std::pair<double, double>> dense_height_domain;
  Spacing spacing;

  /// Throws InvalidStyleError.
  void validate() const;

  friend bool operator==(const StyleConfig& a, const StyleConfig& b) {
    return a.min_height == b.min_height && a.max_height == b.max_height &&
           a.min_width == b.min_width && a.max_width == b.max_width &&
           a.channel_scale == b.channel_scale && a.palette == b.palette &&
           a.textures == b.textures && a.type_overrides == b.type_overrides &&
           a.dense_height_domain == b.dense_height_domain &&
           a.spacing.h_gap == b.spacing.h_gap && a.spacing.v_gap == b.spacing.v_gap;
  }
};

/// Linear map of [lo, hi] onto [out_lo, out_hi] (log-domain when `log`);
/// a degenerate domain maps everything to out_hi.
double interpolate(double value, double lo, double hi, double out_lo, double out_hi,
                   bool log = false);

double height_for_extent(double extent, const std::vector<double>& all_extents,
                         const StyleConfig& cfg);
double width_for_channels(double channels, const std::vector<double>& all_channels,
                          const StyleConfig& cfg);
double height_for_dense(double neurons, const std::vector<double>& all_dense,
                        const StyleConfig& cfg);

/// Midpoint of the widest circular gap between the given hues.
double propose_color_hue_gap(const std::vector<double>& existing_hues);

struct Fill {
  Color color;
  std::optional<int> pattern;
};

using ColorAssignment = std::map<std::string, Fill>;

/// Colors for `types` in the given order (first appearance). Palettes wrap
/// with halved saturation per round; overrides always win.
ColorAssignment assign_colors(const std::vector<std::string>& types, const StyleConfig& cfg);

}  // namespace archviz
