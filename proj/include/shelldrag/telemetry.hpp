#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shelldrag/errors.hpp"
#include "shelldrag/io.hpp"

namespace shelldrag {

/// One telemetry row: shell forces, leg crank angles and battery power.
struct TelemetryRecord
{
  double t{0.0};          ///< [s]
  double fx{0.0};         ///< [N], negative when resisting forward motion
  double fy{0.0};         ///< [N]
  double fz{0.0};         ///< [N]
  double leg_left{0.0};   ///< [rad]
  double leg_right{0.0};  ///< [rad]
  double power{0.0};      ///< [W]

  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

inline constexpr std::string_view kTelemetryHeader = "t_s,fx_n,fy_n,fz_n,leg_left_rad,leg_right_rad,power_w";

/// Reads the telemetry CSV. Blank lines are skipped. Throws ParseError with
/// kind "schema" (header), "row" (field count / non-numeric / non-finite) or
/// "ordering" (time going backwards).
inline std::vector<TelemetryRecord> parse_telemetry(std::istream& in)
{
  std::vector<TelemetryRecord> out;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = io::clean_line(raw, line_no == 1);
    if (!have_header) {
      if (line != kTelemetryHeader)
        throw ParseError("schema", line_no, "expected header '" + std::string(kTelemetryHeader) + "'");
      have_header = true;
      continue;
    }
    if (line.empty())
      continue;
    const auto fields = io::split_fields(line);
    if (fields.size() != 7)
      throw ParseError("row", line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    double v[7];
    for (std::size_t i = 0; i < 7; ++i) {
      const auto parsed = io::parse_number(fields[i]);
      if (!parsed)
        throw ParseError("row", line_no, "field " + std::to_string(i + 1) + " is not a finite number: '" +
                                           std::string(fields[i]) + "'");
      v[i] = *parsed;
    }
    TelemetryRecord r{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    if (!out.empty() && r.t < out.back().t)
      throw ParseError("ordering", line_no, "timestamp decreases");
    out.push_back(r);
  }
  if (!have_header)
    throw ParseError("schema", 0, "missing header");
  return out;
}

inline void write_telemetry(std::ostream& out, std::span<const TelemetryRecord> records)
{
  out << kTelemetryHeader << '\n';
  for (const auto& r : records) {
    out << io::format_number(r.t) << ',' << io::format_number(r.fx) << ',' << io::format_number(r.fy) << ','
        << io::format_number(r.fz) << ',' << io::format_number(r.leg_left) << ','
        << io::format_number(r.leg_right) << ',' << io::format_number(r.power) << '\n';
  }
}

struct WindowOptions
{
  double threshold{0.05};    ///< [N], above the ~0.04 N F_x noise floor
  double hysteresis{0.02};   ///< [N], release level is threshold - hysteresis
  double min_duration{0.25}; ///< [s] a crossing must persist this long
};

/// Channel transit window. `free_run` marks a trace where no sustained
/// drag was found; the window then spans the whole record.
struct ChannelWindow
{
  double t_enter{0.0};
  double t_exit{0.0};
  bool free_run{false};
};

/// Finds the first and last sustained excursions of |F_x| above the
/// threshold. A Schmitt trigger (engage above `threshold`, release below
/// `threshold - hysteresis`) groups samples into episodes; episodes shorter
/// than `min_duration` are ignored.
inline ChannelWindow detect_window(std::span<const TelemetryRecord> records, const WindowOptions& opts = {})
{
  if (records.size() < 2)
    throw InvalidArgument("detect_window: need at least two records");
  if (!(opts.threshold > 0.0) || !(opts.hysteresis >= 0.0) || opts.hysteresis > opts.threshold)
    throw InvalidArgument("detect_window: need threshold > 0 and 0 <= hysteresis <= threshold");

  const double release = opts.threshold - opts.hysteresis;
  // Small slack so that a 0.25 s run sampled at exactly 100 Hz qualifies.
  const double min_len = opts.min_duration - 1e-9;
  bool engaged = false;
  double first_on = 0.0, last_on = 0.0;
  bool found = false;
  ChannelWindow w;

  auto close_episode = [&] {
    if (last_on - first_on >= min_len) {
      if (!found)
        w.t_enter = first_on;
      w.t_exit = last_on;
      found = true;
    }
  };

  for (const auto& r : records) {
    const double drag = std::abs(r.fx);
    if (!engaged) {
      if (drag > opts.threshold) {
        engaged = true;
        first_on = last_on = r.t;
      }
    } else if (drag < release) {
      engaged = false;
      close_episode();
    } else {
      last_on = r.t;
    }
  }
  if (engaged)
    close_episode();

  if (!found)
    return {records.front().t, records.back().t, true};
  return w;
}

}  // namespace shelldrag
