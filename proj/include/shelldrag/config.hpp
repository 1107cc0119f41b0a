#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shelldrag/errors.hpp"
#include "shelldrag/io.hpp"
#include "shelldrag/simulator.hpp"
#include "shelldrag/telemetry.hpp"

namespace shelldrag {

/// How the channel gap is given. Deflection and width are tied through
/// b = 2 R_y - 2 d for the configured shell.
enum class ChannelMode { free, deflection, width };

struct RunConfig
{
  std::string name{"d3"};
  EllipseBody body{};
  BeamSpec beam{};
  int n{11};
  double channel_length{0.28};
  ChannelMode mode{ChannelMode::deflection};
  double gap_value{0.03};  ///< d or b [m], depending on mode
  std::optional<double> spacing{};
  bool two_sided{false};
  double dx{1e-3};
  double speed{0.05};
  WindowOptions window{};
  double g{9.81};
  double split{0.8};
  std::uint64_t seed{1};
  std::string out_dir{"out"};
  std::set<std::string> formats{"csv", "json", "svg"};

  std::optional<double> deflection() const
  {
    switch (mode) {
    case ChannelMode::free:
      return std::nullopt;
    case ChannelMode::deflection:
      return gap_value;
    case ChannelMode::width:
      return body.r_y - gap_value / 2.0;
    }
    return std::nullopt;
  }

  std::optional<double> width() const
  {
    switch (mode) {
    case ChannelMode::free:
      return std::nullopt;
    case ChannelMode::deflection:
      return 2.0 * body.r_y - 2.0 * gap_value;
    case ChannelMode::width:
      return gap_value;
    }
    return std::nullopt;
  }

  ChannelSpec channel() const
  {
    ChannelSpec c;
    c.n = n;
    c.length = channel_length;
    c.width = width();
    c.spacing = spacing;
    c.beam = beam;
    return c;
  }

  SweepOptions sweep_options() const
  {
    SweepOptions o;
    o.dx = dx;
    o.speed = speed;
    o.two_sided = two_sided;
    return o;
  }

  bool wants(std::string_view format) const { return formats.count(std::string(format)) != 0; }

  /// Range checks, each reported against the key that sets the value.
  void validate() const
  {
    auto need = [](bool ok, const char* key, const char* what) {
      if (!ok)
        throw ConfigError(key, what);
    };
    need(body.r_x > 0.0, "body.r_x", "must be positive");
    need(body.r_y > 0.0, "body.r_y", "must be positive");
    need(body.r_x >= body.r_y, "body.r_x", "must be >= body.r_y");
    need(body.mass > 0.0, "body.mass", "must be positive");
    need(beam.modulus > 0.0, "beam.modulus", "must be positive");
    need(beam.width > 0.0, "beam.width", "must be positive");
    need(beam.length > 0.0, "beam.length", "must be positive");
    need(beam.thickness > 0.0 && beam.thickness < beam.length, "beam.thickness", "must be in (0, beam.length)");
    need(beam.mu_k >= 0.0, "beam.mu_k", "must be >= 0");
    need(beam.mu_s >= beam.mu_k, "beam.mu_s", "must be >= beam.mu_k");
    need(n >= 1, "channel.n", "must be >= 1");
    need(channel_length > 0.0, "channel.length", "must be positive");
    if (mode == ChannelMode::deflection)
      need(gap_value >= 0.0 && gap_value < body.r_y, "channel.deflection", "must be in [0, body.r_y)");
    if (mode == ChannelMode::width)
      need(gap_value >= 0.0, "channel.width", "must be >= 0");
    if (spacing)
      need(*spacing > 0.0, "channel.spacing", "must be positive");
    need(dx > 0.0, "sweep.dx", "must be positive");
    need(speed > 0.0, "sweep.speed", "must be positive");
    need(window.threshold > 0.0, "analysis.threshold", "must be positive");
    need(window.hysteresis >= 0.0 && window.hysteresis <= window.threshold, "analysis.hysteresis",
         "must be in [0, analysis.threshold]");
    need(window.min_duration >= 0.0, "analysis.min_duration", "must be >= 0");
    need(g > 0.0, "analysis.g", "must be positive");
    need(split > 0.0 && split < 1.0, "calibration.split", "must be in (0, 1)");
    need(!out_dir.empty(), "output.directory", "must not be empty");
    for (const auto& f : formats)
      need(f == "csv" || f == "json" || f == "svg", "output.formats", "entries must be csv, json or svg");
  }
};

/// The five experimental conditions: free running and d = 0..3 cm.
inline const std::array<std::string_view, 5>& preset_names()
{
  static const std::array<std::string_view, 5> names{"free", "d0", "d1", "d2", "d3"};
  return names;
}

inline RunConfig preset(std::string_view name)
{
  RunConfig c;
  c.name = std::string(name);
  if (name == "free") {
    c.mode = ChannelMode::free;
    c.gap_value = 0.0;
    return c;
  }
  for (int d = 0; d <= 3; ++d) {
    if (name == "d" + std::to_string(d)) {
      c.mode = ChannelMode::deflection;
      c.gap_value = 0.01 * d;
      return c;
    }
  }
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (expected free, d0, d1, d2 or d3)");
}

namespace detail {

inline double config_number(const std::string& key, const std::string& text)
{
  const auto v = io::parse_number(text);
  if (!v)
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return *v;
}

inline bool config_bool(const std::string& key, const std::string& text)
{
  if (text == "true" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "0" || text == "no")
    return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

inline std::set<std::string> config_list(const std::string& text)
{
  std::set<std::string> out;
  for (auto f : io::split_fields(text)) {
    while (!f.empty() && f.front() == ' ')
      f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ')
      f.remove_suffix(1);
    if (!f.empty())
      out.emplace(f);
  }
  return out;
}

}  // namespace detail

/// Overlays one `key = value` setting (dotted key) on `c`.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value)
{
  using detail::config_number;
  auto count = [&](const std::string& k, const std::string& v) {
    const double x = config_number(k, v);
    if (x != static_cast<double>(static_cast<long long>(x)))
      throw ConfigError(k, "expected an integer, got '" + v + "'");
    return static_cast<long long>(x);
  };
  if (key == "run.name")
    c.name = value;
  else if (key == "run.seed") {
    const auto s = count(key, value);
    if (s < 0)
      throw ConfigError(key, "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "body.r_x")
    c.body.r_x = config_number(key, value);
  else if (key == "body.r_y")
    c.body.r_y = config_number(key, value);
  else if (key == "body.mass")
    c.body.mass = config_number(key, value);
  else if (key == "beam.modulus")
    c.beam.modulus = config_number(key, value);
  else if (key == "beam.width")
    c.beam.width = config_number(key, value);
  else if (key == "beam.length")
    c.beam.length = config_number(key, value);
  else if (key == "beam.thickness")
    c.beam.thickness = config_number(key, value);
  else if (key == "beam.mu_s")
    c.beam.mu_s = config_number(key, value);
  else if (key == "beam.mu_k")
    c.beam.mu_k = config_number(key, value);
  else if (key == "channel.n")
    c.n = static_cast<int>(count(key, value));
  else if (key == "channel.length")
    c.channel_length = config_number(key, value);
  else if (key == "channel.deflection") {
    c.mode = ChannelMode::deflection;
    c.gap_value = config_number(key, value);
  }
  else if (key == "channel.width") {
    c.mode = ChannelMode::width;
    c.gap_value = config_number(key, value);
  }
  else if (key == "channel.free") {
    if (detail::config_bool(key, value)) {
      c.mode = ChannelMode::free;
      c.gap_value = 0.0;
    }
  }
  else if (key == "channel.spacing") {
    if (value.empty() || value == "formula")
      c.spacing.reset();
    else
      c.spacing = config_number(key, value);
  }
  else if (key == "sweep.dx")
    c.dx = config_number(key, value);
  else if (key == "sweep.speed")
    c.speed = config_number(key, value);
  else if (key == "sweep.two_sided")
    c.two_sided = detail::config_bool(key, value);
  else if (key == "analysis.threshold")
    c.window.threshold = config_number(key, value);
  else if (key == "analysis.hysteresis")
    c.window.hysteresis = config_number(key, value);
  else if (key == "analysis.min_duration")
    c.window.min_duration = config_number(key, value);
  else if (key == "analysis.g")
    c.g = config_number(key, value);
  else if (key == "calibration.split")
    c.split = config_number(key, value);
  else if (key == "output.directory")
    c.out_dir = value;
  else if (key == "output.formats")
    c.formats = detail::config_list(value);
  else
    throw ConfigError(key, "unknown key");
}

/// Reads an INI file over `base`. Within one file, at most one of
/// channel.deflection / channel.width / channel.free may appear.
inline RunConfig load_config(std::istream& in, RunConfig base = {})
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config", e.line(), e.message());
  }
  int gap_keys = 0;
  std::string first_gap;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, "settings must live in a [section]");
    for (const auto& [name, leaf] : body) {
      const std::string key = section + "." + name;
      if (key == "channel.deflection" || key == "channel.width" ||
          (key == "channel.free" && detail::config_bool(key, leaf.data()))) {
        if (++gap_keys > 1)
          throw ConfigError(key, "conflicts with " + first_gap + "; give exactly one of channel.deflection, "
                                 "channel.width or channel.free");
        first_gap = key;
      }
      apply_setting(base, key, leaf.data());
    }
  }
  if (base.name.empty())
    base.name = "run";
  return base;
}

/// Effective configuration as INI, so a run directory records what produced it.
/// The output directory is left out there so that runs stay byte-comparable
/// wherever they were written.
inline void write_config(std::ostream& out, const RunConfig& c, bool with_directory = true)
{
  auto num = [](double v) { return io::format_number(v); };
  out << "[run]\nname = " << c.name << "\nseed = " << c.seed << "\n\n";
  out << "[body]\nr_x = " << num(c.body.r_x) << "\nr_y = " << num(c.body.r_y) << "\nmass = " << num(c.body.mass)
      << "\n\n";
  out << "[beam]\nmodulus = " << num(c.beam.modulus) << "\nwidth = " << num(c.beam.width)
      << "\nlength = " << num(c.beam.length) << "\nthickness = " << num(c.beam.thickness)
      << "\nmu_s = " << num(c.beam.mu_s) << "\nmu_k = " << num(c.beam.mu_k) << "\n\n";
  out << "[channel]\nn = " << c.n << "\nlength = " << num(c.channel_length) << '\n';
  switch (c.mode) {
  case ChannelMode::free:
    out << "free = true\n";
    break;
  case ChannelMode::deflection:
    out << "deflection = " << num(c.gap_value) << '\n';
    break;
  case ChannelMode::width:
    out << "width = " << num(c.gap_value) << '\n';
    break;
  }
  if (c.spacing)
    out << "spacing = " << num(*c.spacing) << '\n';
  out << "\n[sweep]\ndx = " << num(c.dx) << "\nspeed = " << num(c.speed)
      << "\ntwo_sided = " << (c.two_sided ? "true" : "false") << "\n\n";
  out << "[analysis]\nthreshold = " << num(c.window.threshold) << "\nhysteresis = " << num(c.window.hysteresis)
      << "\nmin_duration = " << num(c.window.min_duration) << "\ng = " << num(c.g) << "\n\n";
  out << "[calibration]\nsplit = " << num(c.split) << "\n\n";
  out << "[output]\n";
  if (with_directory)
    out << "directory = " << c.out_dir << '\n';
  out << "formats = ";
  bool first = true;
  for (const auto& f : c.formats) {
    out << (first ? "" : ",") << f;
    first = false;
  }
  out << '\n';
}

}  // namespace shelldrag
