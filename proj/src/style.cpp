#include "archviz/style.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "archviz/error.hpp"

namespace archviz {

const std::array<std::string_view, 17> kPleasingPalette = {
    "#F44336", "#E91E63", "#9C27B0", "#673AB7", "#3F51B5", "#2196F3",
    "#03A9F4", "#00BCD4", "#009688", "#4CAF50", "#8BC34A", "#CDDC39",
    "#FFEB3B", "#FFC107", "#FF9800", "#FF5722", "#795548"};

const std::array<std::string_view, 8> kAccessiblePalette = {
    "#000000", "#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00", "#CC79A7"};

const std::array<std::string_view, 12> kTexturePatterns = {
    "horizontal",  "vertical", "diagonal-up",      "diagonal-down",
    "grid",        "crosshatch", "dots-small",     "dots-large",
    "horizontal-dense", "diagonal-dense", "checker", "zigzag"};

Color Color::from_hex(std::string_view hex) {
  unsigned r = 0, g = 0, b = 0;
  if (hex.size() != 7 || hex[0] != '#' ||
      std::sscanf(std::string(hex).c_str(), "#%02x%02x%02x", &r, &g, &b) != 3)
    throw InvalidStyleError("invalid colour '" + std::string(hex) + "', expected #RRGGBB");
  const double rf = r / 255.0, gf = g / 255.0, bf = b / 255.0;
  const double mx = std::max({rf, gf, bf});
  const double mn = std::min({rf, gf, bf});
  const double d = mx - mn;
  Color c;
  c.v = mx;
  c.s = mx == 0 ? 0 : d / mx;
  if (d > 0) {
    if (mx == rf) {
      c.h = 60 * std::fmod((gf - bf) / d, 6.0);
    } else if (mx == gf) {
      c.h = 60 * ((bf - rf) / d + 2);
    } else {
      c.h = 60 * ((rf - gf) / d + 4);
    }
    if (c.h < 0) c.h += 360;
  }
  return c;
}

std::string Color::hex() const {
  const double c = v * s;
  const double hh = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0) / 60.0;
  const double x = c * (1 - std::fabs(std::fmod(hh, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hh)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto byte = [&](double f) { return static_cast<int>(std::lround(std::clamp(f + m, 0.0, 1.0) * 255)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", byte(r), byte(g), byte(b));
  return buf;
}

std::string to_string(ChannelScale scale) { return scale == ChannelScale::kLog ? "log" : "linear"; }

std::string to_string(PaletteMode mode) {
  switch (mode) {
    case PaletteMode::kPleasing17: return "pleasing17";
    case PaletteMode::kAccessible8: return "accessible8";
    case PaletteMode::kHueGap: return "hue-gap";
  }
  return "pleasing17";
}

ChannelScale parse_channel_scale(std::string_view name) {
  if (name == "linear") return ChannelScale::kLinear;
  if (name == "log") return ChannelScale::kLog;
  throw InvalidStyleError("unknown channel scale '" + std::string(name) + "'");
}

PaletteMode parse_palette_mode(std::string_view name) {
  if (name == "pleasing17") return PaletteMode::kPleasing17;
  if (name == "accessible8") return PaletteMode::kAccessible8;
  if (name == "hue-gap" || name == "hue_gap") return PaletteMode::kHueGap;
  throw InvalidStyleError("unknown palette '" + std::string(name) + "'");
}

void StyleConfig::validate() const {
  if (!(min_height > 0 && min_height < max_height))
    throw InvalidStyleError("need 0 < min_height < max_height");
  if (!(min_width > 0 && min_width < max_width))
    throw InvalidStyleError("need 0 < min_width < max_width");
  if (!(spacing.h_gap >= 0 && spacing.v_gap >= 0))
    throw InvalidStyleError("spacing must not be negative");
  if (dense_height_domain && !(dense_height_domain->first > 0 &&
                               dense_height_domain->first <= dense_height_domain->second))
    throw InvalidStyleError("dense height domain must satisfy 0 < min <= max");
  for (const auto& [type, hex] : type_overrides) Color::from_hex(hex);
}

double interpolate(double value, double lo, double hi, double out_lo, double out_hi, bool log) {
  if (log) {
    value = std::log(value);
    lo = std::log(lo);
    hi = std::log(hi);
  }
  if (!(hi > lo)) return out_hi;
  const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  return out_lo + t * (out_hi - out_lo);
}

namespace {

std::pair<double, double> domain(const std::vector<double>& values, double fallback) {
  if (values.empty()) return {fallback, fallback};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  return {*mn, *mx};
}

}  // namespace

double height_for_extent(double extent, const std::vector<double>& all_extents,
                         const StyleConfig& cfg) {
  const auto [lo, hi] = domain(all_extents, extent);
  return interpolate(extent, lo, hi, cfg.min_height, cfg.max_height);
}

double width_for_channels(double channels, const std::vector<double>& all_channels,
                          const StyleConfig& cfg) {
  const auto [lo, hi] = domain(all_channels, channels);
  return interpolate(channels, lo, hi, cfg.min_width, cfg.max_width,
                     cfg.channel_scale == ChannelScale::kLog);
}

double height_for_dense(double neurons, const std::vector<double>& all_dense,
                        const StyleConfig& cfg) {
  const auto [lo, hi] = cfg.dense_height_domain ? *cfg.dense_height_domain
                                                : domain(all_dense, neurons);
  return interpolate(neurons, lo, hi, cfg.min_height, cfg.max_height);
}

double propose_color_hue_gap(const std::vector<double>& existing_hues) {
  if (existing_hues.empty()) return 0;
  std::vector<double> hues;
  for (double h : existing_hues) hues.push_back(std::fmod(std::fmod(h, 360.0) + 360.0, 360.0));
  std::sort(hues.begin(), hues.end());
  hues.erase(std::unique(hues.begin(), hues.end()), hues.end());
  double best_start = hues[0];
  double best_gap = -1;
  for (std::size_t i = 0; i < hues.size(); ++i) {
    const double next = i + 1 < hues.size() ? hues[i + 1] : hues[0] + 360;
    const double gap = next - hues[i];
    if (gap > best_gap) {
      best_gap = gap;
      best_start = hues[i];
    }
  }
  return std::fmod(best_start + best_gap / 2, 360.0);
}

namespace {

/// k-th wrap of a palette entry: saturation halves per round. Achromatic
/// entries have no saturation to give, so they lighten towards grey instead.
Color wrapped(std::string_view hex, std::size_t round) {
  Color c = Color::from_hex(hex);
  const double f = std::pow(0.5, static_cast<double>(round));
  if (c.s > 0) {
    c.s *= f;
  } else {
    c.v += (0.5 - c.v) * (1 - f);
  }
  return c;
}

}  // namespace

ColorAssignment assign_colors(const std::vector<std::string>& types, const StyleConfig& cfg) {
  ColorAssignment out;
  std::vector<double> used_hues;
  for (const auto& [type, hex] : cfg.type_overrides)
    if (std::find(types.begin(), types.end(), type) != types.end())
      used_hues.push_back(Color::from_hex(hex).h);

  std::size_t slot = 0;
  int pattern = 0;
  for (const auto& type : types) {
    if (out.count(type)) continue;
    Fill fill;
    if (auto it = cfg.type_overrides.find(type); it != cfg.type_overrides.end()) {
      fill.color = Color::from_hex(it->second);
    } else if (cfg.palette == PaletteMode::kHueGap) {
      const double h = propose_color_hue_gap(used_hues);
      used_hues.push_back(h);
      fill.color = {h, 0.65, 0.9};
    } else if (cfg.palette == PaletteMode::kPleasing17) {
      fill.color = wrapped(kPleasingPalette[slot % kPleasingPalette.size()],
                           slot / kPleasingPalette.size());
      ++slot;
    } else {
      fill.color = wrapped(kAccessiblePalette[slot % kAccessiblePalette.size()],
                           slot / kAccessiblePalette.size());
      ++slot;
    }
    if (cfg.textures) fill.pattern = pattern++ % static_cast<int>(kTexturePatterns.size());
    out.emplace(type, fill);
  }
  return out;
}

}  // namespace archviz
