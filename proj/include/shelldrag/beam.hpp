#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "shelldrag/errors.hpp"
#include "shelldrag/geometry.hpp"
#include "shelldrag/vec.hpp"

namespace shelldrag {

/// Thin cantilever beam modelled as a rigid link on a torsional spring.
/// Defaults are the sheet-fiberglass flaps of the reference track.
struct BeamSpec
{
  double modulus{5.3e9};     ///< flexural modulus E [Pa]
  double width{0.03};        ///< w [m]
  double length{0.027};      ///< free length L [m]
  double thickness{1.2e-4};  ///< t [m]
  double mu_k{0.53};         ///< kinetic friction against the shell
  double mu_s{0.7};          ///< static friction (kept for stick-slip work, unused by the force law)

  void validate() const
  {
    if (!(modulus > 0.0 && width > 0.0 && length > 0.0 && thickness > 0.0))
      throw InvalidArgument("BeamSpec: modulus, width, length and thickness must be positive");
    if (!(mu_k >= 0.0 && mu_s >= 0.0))
      throw InvalidArgument("BeamSpec: friction coefficients must be non-negative");
    if (mu_k > mu_s)
      throw InvalidArgument("BeamSpec: mu_k must not exceed mu_s");
    if (!(thickness < length))
      throw InvalidArgument("BeamSpec: thin-beam model needs thickness << length");
  }
};

inline double area_moment(const BeamSpec& spec)
{
  return spec.width * spec.thickness * spec.thickness * spec.thickness / 12.0;
}

/// k_t = E I / L  [N m / rad]
inline double torsional_stiffness(const BeamSpec& spec) { return spec.modulus * area_moment(spec) / spec.length; }

struct Deflection
{
  double angle{0.0};  ///< [rad]
  bool saturated{false};
};

inline constexpr double kDefaultMaxDeflection = std::numbers::pi / 2.0;

/// Angular deflection of a beam whose tip has been carried from its base
/// position `base_x` to `contact_x`. `lead` is +1 for forward travel and -1
/// for backward travel. Deflections at or past `max_angle` are clamped.
inline Deflection angular_deflection(double contact_x, double base_x, double length,
                                     double max_angle = kDefaultMaxDeflection, double lead = 1.0)
{
  double ratio = lead * (contact_x - base_x) / length;
  if (ratio < 0.0) {
    if (ratio < -1e-12)
      throw InconsistentContact("angular_deflection: contact trails the beam base");
    ratio = 0.0;
  }
  if (ratio >= 1.0 - 1e-12)
    return {max_angle, true};
  const double angle = std::asin(ratio);
  if (angle >= max_angle)
    return {max_angle, true};
  return {angle, false};
}

/// Force the beam exerts on the shell: tip spring force at the edge of the
/// friction cone, n + mu_k t. For backward travel the friction direction flips.
inline Vec2 beam_force(double delta_theta, double phi, const BeamSpec& spec, const EllipseBody& body,
                       Travel travel = Travel::forward)
{
  if (delta_theta < 0.0)
    throw InvalidArgument("beam_force: negative deflection");
  const SurfaceFrame frame = surface_frame(phi, body);
  const double magnitude = torsional_stiffness(spec) / spec.length * delta_theta;
  return magnitude * (frame.normal + (travel_sign(travel) * spec.mu_k) * frame.tangent);
}

/// Base positions l_i along the channel. Without an override the spacing is
/// l_channel / n; with one, beams are placed every `spacing` metres.
inline std::vector<double> beam_base_positions(int n, double l_channel, std::optional<double> spacing = {})
{
  if (n < 1)
    throw InvalidArgument("beam_base_positions: need at least one beam");
  if (!(l_channel > 0.0))
    throw InvalidArgument("beam_base_positions: channel length must be positive");
  if (spacing && !(*spacing > 0.0))
    throw InvalidArgument("beam_base_positions: spacing override must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = spacing ? *spacing * i : l_channel / n * i;
  return out;
}

/// Solved contact between one beam and the shell.
struct ContactResult
{
  int beam_index{0};     ///< 1-based along the channel
  double phi{0.0};       ///< contact angle on the shell [rad]
  double contact_x{0.0}; ///< X_i [m]
  double delta_theta{0.0};
  Vec2 force{};          ///< on the shell [N]
  bool saturated{false};
  bool bottom{false};    ///< beam on the lower wall (two-sided mode only)
};

}  // namespace shelldrag
