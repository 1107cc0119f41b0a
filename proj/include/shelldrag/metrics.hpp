#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "shelldrag/errors.hpp"
#include "shelldrag/telemetry.hpp"

namespace shelldrag {

inline constexpr double kStandardGravity = 9.81;

/// Work against the mean resisting force over the channel length [J].
inline double drag_energy(double mean_fx, double l_channel)
{
  if (!(l_channel > 0.0))
    throw InvalidArgument("drag_energy: channel length must be positive");
  return mean_fx * l_channel;
}

/// Dimensionless cost of transport P / (m g v).
inline double specific_resistance(double mean_power, double mass, double mean_velocity,
                                  double g = kStandardGravity)
{
  if (!(mass > 0.0))
    throw InvalidArgument("specific_resistance: mass must be positive");
  if (!(g > 0.0))
    throw InvalidArgument("specific_resistance: g must be positive");
  if (!(mean_velocity > 0.0))
    throw UndefinedMetric("specific_resistance: mean velocity must be positive (stalled trial)");
  return mean_power / (mass * g * mean_velocity);
}

struct StrideSegment
{
  double t_start{0.0};
  double t_end{0.0};
};

namespace detail {

inline double wrap_pi(double a)
{
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// Centred running median with a window that shrinks at the ends, so that a
// monotone input is returned unchanged.
inline std::vector<double> running_median(std::span<const double> x, std::size_t half)
{
  std::vector<double> out(x.size());
  std::vector<double> buf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t h = std::min({half, i, x.size() - 1 - i});
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(i - h), x.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(h), buf.end());
    out[i] = buf[h];
  }
  return out;
}

}  // namespace detail

/// Splits a leg-angle series into strides, one per 2 pi of crank advance
/// measured from the first sample. The angle may be wrapped; it is unwrapped
/// first and lightly median-filtered before the crossings are located. A
/// trailing partial stride is dropped.
inline std::vector<StrideSegment> stride_segments(std::span<const double> leg_angle, std::span<const double> time)
{
  if (leg_angle.size() != time.size())
    throw InvalidArgument("stride_segments: angle and time series differ in length");
  std::vector<StrideSegment> out;
  if (time.size() < 2)
    return out;
  for (std::size_t i = 1; i < time.size(); ++i)
    if (!(time[i] > time[i - 1]))
      throw InvalidArgument("stride_segments: time must be strictly increasing");

  std::vector<double> unwrapped(leg_angle.size());
  unwrapped[0] = leg_angle[0];
  for (std::size_t i = 1; i < leg_angle.size(); ++i)
    unwrapped[i] = unwrapped[i - 1] + detail::wrap_pi(leg_angle[i] - leg_angle[i - 1]);
  const auto theta = detail::running_median(unwrapped, 2);

  // Anchor and crossings come from local least-squares lines over about
  // +-8 samples; the median only picks the coarse crossing sample.
  constexpr std::size_t half = 8;
  const std::size_t n = theta.size();
  auto local_line = [&](std::size_t centre) {
    const std::size_t lo = centre > half ? centre - half : 0;
    const std::size_t hi = std::min(n - 1, centre + half);
    const double tc = time[centre];
    double mt = 0.0, ma = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      mt += time[i] - tc;
      ma += unwrapped[i];
    }
    const double cnt = static_cast<double>(hi - lo + 1);
    mt /= cnt;
    ma /= cnt;
    double stt = 0.0, sta = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      stt += (time[i] - tc - mt) * (time[i] - tc - mt);
      sta += (time[i] - tc - mt) * (unwrapped[i] - ma);
    }
    const double slope = stt > 0.0 ? sta / stt : 0.0;
    return std::pair{ma - slope * mt, slope};  // value at tc, slope
  };

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto [theta0, slope0] = local_line(0);
  (void)slope0;
  double boundary_t = time[0];
  double target = theta0 + two_pi;
  std::size_t j = 1;
  while (true) {
    while (j < n && theta[j] < target - 1e-9)
      ++j;
    if (j >= n)
      break;
    // Noise-free ramp: exact interpolation between the bracketing samples.
    const double span = theta[j] - theta[j - 1];
    const double frac = span > 0.0 ? std::clamp((target - theta[j - 1]) / span, 0.0, 1.0) : 1.0;
    double t = time[j - 1] + frac * (time[j] - time[j - 1]);
    const auto [value, slope] = local_line(j);
    if (slope > 0.0) {
      const double refined = time[j] + (target - value) / slope;
      // Keep the refinement local so a stall cannot move the boundary far.
      const double reach = time[std::min(n - 1, j + 1)] - time[j > 1 ? j - 2 : 0];
      if (std::abs(refined - t) <= reach)
        t = refined;
    }
    t = std::clamp(t, boundary_t, time.back());
    out.push_back({boundary_t, t});
    boundary_t = t;
    target += two_pi;
  }
  return out;
}

namespace detail {

// Trapezoidal integral of the piecewise-linear interpolant of (t, y) over
// [a, b], a and b clamped to the sample span.
inline double integrate(std::span<const double> t, std::span<const double> y, double a, double b)
{
  a = std::max(a, t.front());
  b = std::min(b, t.back());
  if (!(b > a))
    return 0.0;
  auto value_at = [&](std::size_t i, double tt) {
    const double dt = t[i + 1] - t[i];
    if (dt <= 0.0)
      return y[i + 1];
    return y[i] + (y[i + 1] - y[i]) * (tt - t[i]) / dt;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double lo = std::max(a, t[i]);
    const double hi = std::min(b, t[i + 1]);
    if (!(hi > lo))
      continue;
    acc += 0.5 * (value_at(i, lo) + value_at(i, hi)) * (hi - lo);
  }
  return acc;
}

}  // namespace detail

struct StrideMetrics
{
  double t_start{0.0};
  double t_end{0.0};
  double mean_fx{0.0};            ///< mean resisting force over the stride [N]
  double drag_energy{0.0};        ///< mean_fx times distance covered at v-bar [J]
  double electrical_energy{0.0};  ///< [J]
  double specific_resistance{0.0};
};

/// Per-trial statistics over the channel window. `mean_fx` is the resisting
/// component, i.e. the time average of -F_x, so drag energy is positive
/// when the channel holds the robot back.
struct TrialMetrics
{
  double t_enter{0.0};
  double t_exit{0.0};
  bool free_run{false};
  double mean_fx{0.0};
  double mean_fz{0.0};
  double mean_power{0.0};
  double mean_velocity{0.0};
  double drag_energy{0.0};
  double electrical_energy{0.0};
  double specific_resistance{0.0};
  std::vector<StrideMetrics> per_stride;
};

struct TrialOptions
{
  double l_channel{0.28};
  double mass{0.087};
  double g{kStandardGravity};
};

inline TrialMetrics trial_metrics(std::span<const TelemetryRecord> records, const ChannelWindow& window,
                                  const TrialOptions& opts)
{
  if (!(window.t_exit > window.t_enter))
    throw UndefinedMetric("trial_metrics: empty window");
  if (records.size() < 2 || window.t_enter < records.front().t || window.t_exit > records.back().t)
    throw UndefinedMetric("trial_metrics: window outside the recorded span");

  std::vector<double> t, drag, fz, power;
  t.reserve(records.size());
  for (const auto& r : records) {
    t.push_back(r.t);
    drag.push_back(-r.fx);
    fz.push_back(r.fz);
    power.push_back(r.power);
  }
  const double duration = window.t_exit - window.t_enter;

  TrialMetrics m;
  m.t_enter = window.t_enter;
  m.t_exit = window.t_exit;
  m.free_run = window.free_run;
  m.mean_fx = detail::integrate(t, drag, window.t_enter, window.t_exit) / duration;
  m.mean_fz = detail::integrate(t, fz, window.t_enter, window.t_exit) / duration;
  m.electrical_energy = detail::integrate(t, power, window.t_enter, window.t_exit);
  m.mean_power = m.electrical_energy / duration;
  m.mean_velocity = opts.l_channel / duration;
  m.drag_energy = drag_energy(m.mean_fx, opts.l_channel);
  m.specific_resistance = specific_resistance(m.mean_power, opts.mass, m.mean_velocity, opts.g);

  std::vector<double> wt, wleg;
  for (const auto& r : records) {
    if (r.t < window.t_enter || r.t > window.t_exit)
      continue;
    if (!wt.empty() && !(r.t > wt.back()))
      continue;  // repeated timestamp
    wt.push_back(r.t);
    wleg.push_back(r.leg_left);
  }
  for (const auto& seg : stride_segments(wleg, wt)) {
    StrideMetrics s;
    s.t_start = seg.t_start;
    s.t_end = seg.t_end;
    const double dt = seg.t_end - seg.t_start;
    s.mean_fx = detail::integrate(t, drag, seg.t_start, seg.t_end) / dt;
    s.drag_energy = s.mean_fx * m.mean_velocity * dt;
    s.electrical_energy = detail::integrate(t, power, seg.t_start, seg.t_end);
    s.specific_resistance = specific_resistance(s.electrical_energy / dt, opts.mass, m.mean_velocity, opts.g);
    m.per_stride.push_back(s);
  }
  return m;
}

inline nlohmann::ordered_json to_json(const TrialMetrics& m)
{
  nlohmann::ordered_json j;
  j["mean_fx_n"] = m.mean_fx;
  j["mean_fz_n"] = m.mean_fz;
  j["mean_power_w"] = m.mean_power;
  j["mean_velocity_mps"] = m.mean_velocity;
  j["drag_energy_j"] = m.drag_energy;
  j["electrical_energy_j"] = m.electrical_energy;
  j["specific_resistance"] = m.specific_resistance;
  j["window"] = {{"t_enter_s", m.t_enter}, {"t_exit_s", m.t_exit}, {"free_run", m.free_run}};
  auto strides = nlohmann::ordered_json::array();
  for (const auto& s : m.per_stride) {
    strides.push_back({{"t_start_s", s.t_start},
                       {"t_end_s", s.t_end},
                       {"mean_fx_n", s.mean_fx},
                       {"drag_energy_j", s.drag_energy},
                       {"electrical_energy_j", s.electrical_energy},
                       {"specific_resistance", s.specific_resistance}});
  }
  j["strides"] = std::move(strides);
  return j;
}

}  // namespace shelldrag
