#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "shelldrag/beam.hpp"
#include "shelldrag/errors.hpp"
#include "shelldrag/geometry.hpp"

namespace shelldrag {

/// Channel of cantilever beams mounted on two parallel walls. Undeflected
/// tips sit at y = +-width/2, so the walls are at y = +-(width/2 + L).
struct ChannelSpec
{
  int n{11};                       ///< beams per side
  double length{0.28};             ///< l_channel [m]
  std::optional<double> width{};   ///< tip-to-tip gap b [m]; empty = free running (no beams)
  std::optional<double> spacing{}; ///< overrides length / n
  double offset{0.0};              ///< x of the first beam base [m]
  double max_deflection{kDefaultMaxDeflection};
  BeamSpec beam{};

  bool is_free() const { return !width.has_value(); }

  double wall_y() const { return width.value_or(0.0) / 2.0 + beam.length; }

  void validate() const
  {
    if (n < 1)
      throw InvalidArgument("ChannelSpec: n must be >= 1");
    if (!(length > 0.0))
      throw InvalidArgument("ChannelSpec: length must be positive");
    if (width && !(*width >= 0.0))
      throw InvalidArgument("ChannelSpec: width must be non-negative");
    if (spacing && !(*spacing > 0.0))
      throw InvalidArgument("ChannelSpec: spacing must be positive");
    if (!(max_deflection > 0.0 && max_deflection <= std::numbers::pi / 2.0))
      throw InvalidArgument("ChannelSpec: max_deflection must lie in (0, pi/2]");
    beam.validate();
  }
};

/// One mounted beam. Bottom-wall beams have negative base y.
struct BeamSite
{
  int index{0};
  Point2 base{};
};

inline std::vector<BeamSite> beam_sites(const ChannelSpec& channel, bool both_sides = false)
{
  std::vector<BeamSite> sites;
  if (channel.is_free())
    return sites;
  const auto xs = beam_base_positions(channel.n, channel.length, channel.spacing);
  const double y = channel.wall_y();
  for (std::size_t i = 0; i < xs.size(); ++i)
    sites.push_back({static_cast<int>(i) + 1, {channel.offset + xs[i], y}});
  if (both_sides)
    for (std::size_t i = 0; i < xs.size(); ++i)
      sites.push_back({static_cast<int>(i) + 1, {channel.offset + xs[i], -y}});
  return sites;
}

struct SolverOptions
{
  ContactOptions contact{};
  double max_deflection{kDefaultMaxDeflection};
};

/// Contact solution of a single beam, or nothing when its tip is clear of
/// the shell. Bottom beams are solved in the mirrored frame and mapped back.
inline std::optional<ContactResult> solve_beam(const BeamSite& site, const BeamSpec& beam, const EllipseBody& body,
                                               const SolverOptions& opts = {})
{
  const bool bottom = site.base.y < 0.0;
  const Point2 base = bottom ? mirrored(site.base) : site.base;
  // Only penetrating tips count as contacts; grazing tips carry no load.
  if (!contains({base.x, base.y - beam.length}, body))
    return std::nullopt;
  const TipContact tip = contact_angle(base, beam.length, body, opts.contact);
  if (!tip.in_contact())
    return std::nullopt;

  const Travel travel = opts.contact.travel;
  ContactResult r;
  r.beam_index = site.index;
  r.phi = tip.phi;
  r.contact_x = ellipse_point(tip.phi, body).x;
  if (tip.kind == TipContact::Kind::saturated) {
    r.delta_theta = opts.max_deflection;
    r.saturated = true;
  } else {
    const Deflection d =
      angular_deflection(r.contact_x, base.x, beam.length, opts.max_deflection, travel_sign(travel));
    r.delta_theta = d.angle;
    r.saturated = d.saturated;
  }
  r.force = beam_force(r.delta_theta, r.phi, beam, body, travel);
  if (bottom) {
    r.phi = -r.phi;
    r.force = mirrored(r.force);
    r.bottom = true;
  }
  return r;
}

inline std::vector<ContactResult> contact_set(double x_r, std::span<const BeamSite> sites, const BeamSpec& beam,
                                              const EllipseBody& body, const SolverOptions& opts = {})
{
  const EllipseBody placed = body.at(x_r);
  std::vector<ContactResult> out;
  for (const auto& site : sites)
    if (auto c = solve_beam(site, beam, placed, opts))
      out.push_back(*c);
  return out;
}

/// Top-side contacts of the channel with the shell centred at x_r.
inline std::vector<ContactResult> contact_set(double x_r, const ChannelSpec& channel, const EllipseBody& body)
{
  const auto sites = beam_sites(channel);
  SolverOptions opts;
  opts.max_deflection = channel.max_deflection;
  return contact_set(x_r, sites, channel.beam, body, opts);
}

/// Positive resistance from one side's contacts, doubled for the mirrored
/// bottom row.
inline double net_drag(std::span<const ContactResult> contacts, Travel travel = Travel::forward)
{
  double fx = 0.0;
  for (const auto& c : contacts)
    fx += c.force.x;
  return -2.0 * travel_sign(travel) * fx + 0.0;  // no negative zero in output
}

/// Positive resistance from explicitly simulated top and bottom rows.
inline double net_drag_two_sided(std::span<const ContactResult> contacts, Travel travel = Travel::forward)
{
  double fx = 0.0;
  for (const auto& c : contacts)
    fx += c.force.x;
  return -travel_sign(travel) * fx + 0.0;
}

inline double net_lateral(std::span<const ContactResult> contacts)
{
  double fy = 0.0;
  for (const auto& c : contacts)
    fy += c.force.y;
  return fy;
}

struct TraceSample
{
  double x{0.0};       ///< shell centre X_r [m]
  double t{0.0};       ///< [s]
  double drag{0.0};    ///< F_drag [N], positive opposes travel
  double lateral{0.0}; ///< net F_y [N]; zero by construction in mirrored mode
  std::vector<ContactResult> contacts;

  int contact_count() const { return static_cast<int>(contacts.size()); }
};

struct ForceTrace
{
  std::vector<TraceSample> samples;
  double dx{0.0};
  double speed{0.0};
};

struct SweepOptions
{
  double dx{1e-3};     ///< [m]
  double speed{0.05};  ///< only used to stamp times [m/s]
  bool two_sided{false};
  ContactOptions contact{};
};

inline std::size_t sweep_sample_count(double x_start, double x_end, double dx)
{
  // The slack keeps an endpoint that is an exact multiple of dx in decimal
  // from being lost to binary rounding.
  return static_cast<std::size_t>(std::floor(std::abs(x_end - x_start) / dx + 1e-9)) + 1;
}

/// Kinematic sweep of the shell from x_start towards x_end in steps of dx.
/// Travel direction follows the sign of x_end - x_start. Sites with negative
/// base y are only meaningful with `two_sided`.
inline ForceTrace sweep(std::span<const BeamSite> sites, const BeamSpec& beam, double max_deflection,
                        const EllipseBody& body, double x_start, double x_end, const SweepOptions& opts = {})
{
  if (!(opts.dx > 0.0))
    throw InvalidArgument("sweep: dx must be positive");
  if (!(opts.speed > 0.0))
    throw InvalidArgument("sweep: speed must be positive");
  body.validate();

  SolverOptions solver;
  solver.contact = opts.contact;
  solver.contact.travel = x_end >= x_start ? Travel::forward : Travel::backward;
  solver.max_deflection = max_deflection;
  const double lead = travel_sign(solver.contact.travel);

  ForceTrace trace;
  trace.dx = opts.dx;
  trace.speed = opts.speed;
  const std::size_t count = sweep_sample_count(x_start, x_end, opts.dx);
  trace.samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double step = static_cast<double>(k) * opts.dx;
    TraceSample s;
    s.x = x_start + lead * step;
    s.t = step / opts.speed;
    s.contacts = contact_set(s.x, sites, beam, body, solver);
    s.drag = opts.two_sided ? net_drag_two_sided(s.contacts, solver.contact.travel)
                            : net_drag(s.contacts, solver.contact.travel);
    s.lateral = opts.two_sided ? net_lateral(s.contacts) : 0.0;
    trace.samples.push_back(std::move(s));
  }
  return trace;
}

/// Sweep range that starts and ends with the shell clear of every beam.
inline std::pair<double, double> sweep_range(const ChannelSpec& channel, const EllipseBody& body)
{
  const double margin = body.r_x + channel.beam.length;
  return {channel.offset - margin, channel.offset + channel.length + margin};
}

/// Forward sweep through the whole channel.
inline ForceTrace sweep(const ChannelSpec& channel, const EllipseBody& body, const SweepOptions& opts = {})
{
  channel.validate();
  const auto sites = beam_sites(channel, opts.two_sided);
  const auto [x0, x1] = sweep_range(channel, body);
  return sweep(sites, channel.beam, channel.max_deflection, body, x0, x1, opts);
}

/// Shell centre positions for which the whole shell is inside the channel.
inline std::pair<double, double> plateau_range(const ChannelSpec& channel, const EllipseBody& body)
{
  return {channel.offset + body.r_x, channel.offset + channel.length - body.r_x};
}

struct PlateauStats
{
  std::size_t samples{0};
  double mean{0.0};
  double min{0.0};
  double max{0.0};
  std::vector<int> contact_counts;  ///< distinct per-side counts seen, ascending
};

inline PlateauStats plateau_stats(const ForceTrace& trace, double x_lo, double x_hi)
{
  PlateauStats st;
  double sum = 0.0;
  for (const auto& s : trace.samples) {
    if (s.x < x_lo || s.x > x_hi)
      continue;
    if (st.samples == 0) {
      st.min = st.max = s.drag;
    } else {
      st.min = std::min(st.min, s.drag);
      st.max = std::max(st.max, s.drag);
    }
    sum += s.drag;
    ++st.samples;
    int count = 0;
    for (const auto& c : s.contacts)
      count += c.bottom ? 0 : 1;
    st.contact_counts.push_back(count);
  }
  if (st.samples > 0)
    st.mean = sum / static_cast<double>(st.samples);
  std::sort(st.contact_counts.begin(), st.contact_counts.end());
  st.contact_counts.erase(std::unique(st.contact_counts.begin(), st.contact_counts.end()), st.contact_counts.end());
  return st;
}

inline PlateauStats plateau_stats(const ForceTrace& trace, const ChannelSpec& channel, const EllipseBody& body)
{
  const auto [lo, hi] = plateau_range(channel, body);
  return plateau_stats(trace, lo, hi);
}

/// Mean drag while the shell overlaps the channel span, the F-bar of the
/// drag-energy definition for a simulated transit.
inline double transit_mean_drag(const ForceTrace& trace, const ChannelSpec& channel, const EllipseBody& body)
{
  const double lo = channel.offset - body.r_x;
  const double hi = channel.offset + channel.length + body.r_x;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : trace.samples) {
    if (s.x < lo || s.x > hi)
      continue;
    sum += s.drag;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace shelldrag
