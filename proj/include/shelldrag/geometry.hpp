#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "shelldrag/errors.hpp"
#include "shelldrag/vec.hpp"

namespace shelldrag {

/// Rigid elliptical shell in the channel plane. The major semi-axis runs
/// along the channel (x), the minor semi-axis is lateral (y). The centre
/// sits on the channel centreline at x = x_r.
struct EllipseBody
{
  double r_x{0.09};   ///< major semi-axis [m]
  double r_y{0.05};   ///< minor semi-axis [m]
  double x_r{0.0};    ///< centre position along the channel [m]
  double mass{0.087}; ///< [kg]

  void validate() const
  {
    if (!(std::isfinite(r_x) && std::isfinite(r_y) && std::isfinite(x_r) && std::isfinite(mass)))
      throw InvalidArgument("EllipseBody: non-finite field");
    if (!(r_x > 0.0 && r_y > 0.0 && mass > 0.0))
      throw InvalidArgument("EllipseBody: r_x, r_y and mass must be positive");
    if (r_x < r_y)
      throw InvalidArgument("EllipseBody: major axis r_x must be channel-aligned (r_x >= r_y)");
  }

  EllipseBody at(double x) const
  {
    EllipseBody b = *this;
    b.x_r = x;
    return b;
  }
};

/// Direction the body moves along the channel. Beams are dragged along in
/// this direction, so it decides which intersection is the contact.
enum class Travel { forward, backward };

constexpr double travel_sign(Travel t) { return t == Travel::forward ? 1.0 : -1.0; }

inline Point2 ellipse_point(double phi, const EllipseBody& body)
{
  if (!std::isfinite(phi))
    throw InvalidArgument("ellipse_point: non-finite angle");
  return {body.r_x * std::cos(phi) + body.x_r, body.r_y * std::sin(phi)};
}

/// Inward unit normal and backward unit tangent of the shell surface.
struct SurfaceFrame
{
  Vec2 normal;
  Vec2 tangent;
};

// Both vectors share the normaliser sqrt(r_y^2 cos^2 + r_x^2 sin^2), which is
// the length of the un-normalised numerators.
inline SurfaceFrame surface_frame(double phi, const EllipseBody& body)
{
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double scale = std::hypot(body.r_y * c, body.r_x * s);
  return {
    Vec2{-body.r_y * c / scale, -body.r_x * s / scale},
    Vec2{-body.r_x * s / scale, body.r_y * c / scale},
  };
}

/// Normalised radial coordinate: < 1 inside, 1 on the boundary.
inline double ellipse_level(const Point2& p, const EllipseBody& body)
{
  const double u = (p.x - body.x_r) / body.r_x;
  const double v = p.y / body.r_y;
  return u * u + v * v;
}

/// Strict interior test; boundary points are outside.
inline bool contains(const Point2& p, const EllipseBody& body) { return ellipse_level(p, body) < 1.0; }

struct ContactOptions
{
  int grid_samples{720};           ///< uniform bracketing grid over [0, pi]
  double angle_tolerance{0.0};     ///< bisection bracket width [rad]; 0 bisects to machine precision
  Travel travel{Travel::forward};
};

/// Outcome of intersecting a beam's tip circle with the top half of the shell.
struct TipContact
{
  enum class Kind {
    none,      ///< undeflected tip lies outside the shell
    touching,  ///< tip rests on the shell surface at `phi`
    saturated, ///< beam pressed flat (base or flattened tip inside the shell)
  };

  Kind kind{Kind::none};
  double phi{0.0};

  bool in_contact() const { return kind != Kind::none; }
};

namespace detail {

// Boundary slack for the undeflected-tip gate so that exact tangency still
// goes through the root finder.
inline constexpr double kLevelSlack = 1e-12;

inline double tip_gap(double phi, const Point2& base, double length, const EllipseBody& body)
{
  const Point2 p = ellipse_point(phi, body);
  return std::hypot(p.x - base.x, p.y - base.y) - length;
}

// Angle of the shell point straight above/below x on the top half.
inline double top_angle_at(double x, const EllipseBody& body)
{
  return std::acos(std::clamp((x - body.x_r) / body.r_x, -1.0, 1.0));
}

inline double bisect(double lo, double hi, double f_lo, const Point2& base, double length,
                     const EllipseBody& body, double tol)
{
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    const double f_mid = tip_gap(mid, base, length, body);
    if (f_mid == 0.0)
      return mid;
    if ((f_lo < 0.0) == (f_mid < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section search for a grazing minimum of the gap inside [lo, hi].
inline double golden_min(double lo, double hi, const Point2& base, double length,
                         const EllipseBody& body, double tol)
{
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tip_gap(c, base, length, body);
  double fd = tip_gap(d, base, length, body);
  for (int it = 0; it < 200 && b - a > std::max(tol, 1e-14); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = tip_gap(c, base, length, body);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = tip_gap(d, base, length, body);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// All solutions phi in [0, pi] of |ellipse_point(phi) - base| = length,
/// found by bracketing on a uniform grid and bisecting each bracket.
/// Grazing (double) roots are picked up from near-zero grid minima.
inline std::vector<double> tip_circle_roots(const Point2& base, double length, const EllipseBody& body,
                                            const ContactOptions& opts = {})
{
  const int n = std::max(opts.grid_samples, 2);
  const double h = std::numbers::pi / n;
  std::vector<double> f(n + 1);
  for (int k = 0; k <= n; ++k)
    f[k] = detail::tip_gap(k * h, base, length, body);

  const double graze_tol = 1e-12 * length;
  std::vector<double> roots;
  for (int k = 0; k <= n; ++k) {
    const double phi = k * h;
    if (f[k] == 0.0) {
      roots.push_back(phi);
      continue;
    }
    if (k < n && f[k + 1] != 0.0 && (f[k] < 0.0) != (f[k + 1] < 0.0)) {
      roots.push_back(detail::bisect(phi, phi + h, f[k], base, length, body, opts.angle_tolerance));
      continue;
    }
    // Positive local minimum close to zero: possible tangency between samples.
    if (f[k] > 0.0 && k > 0 && k < n && f[k] <= f[k - 1] && f[k] <= f[k + 1] && f[k] < h * length) {
      const double m = detail::golden_min(phi - h, phi + h, base, length, body, opts.angle_tolerance);
      if (std::abs(detail::tip_gap(m, base, length, body)) <= graze_tol)
        roots.push_back(m);
    }
  }
  return roots;
}

/// Contact angle of a top-side beam (base above the centreline) whose tip
/// sweeps a circle of radius `length` about `base`. The contact is the
/// intersection furthest along the direction of travel.
inline TipContact contact_angle(const Point2& base, double length, const EllipseBody& body,
                                const ContactOptions& opts = {})
{
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidArgument("contact_angle: beam length must be positive");
  if (!(base.y > 0.0) || !is_finite(base))
    throw InvalidArgument("contact_angle: beam base must lie on the top side (y > 0)");

  const double lead = travel_sign(opts.travel);
  const Point2 rest_tip{base.x, base.y - length};
  if (ellipse_level(rest_tip, body) > 1.0 + detail::kLevelSlack)
    return {};

  const Point2 flat_tip{base.x + lead * length, base.y};
  if (contains(base, body) || contains(flat_tip, body))
    return {TipContact::Kind::saturated, detail::top_angle_at(flat_tip.x, body)};

  // Solve in the shell's own frame so that results depend only on the
  // relative position of base and shell.
  const auto roots = tip_circle_roots({base.x - body.x_r, base.y}, length, body.at(0.0), opts);
  if (roots.empty())
    return {TipContact::Kind::saturated, detail::top_angle_at(flat_tip.x, body)};

  const double best = *std::max_element(roots.begin(), roots.end(), [&](double a, double b) {
    return lead * std::cos(a) < lead * std::cos(b);
  });
  return {TipContact::Kind::touching, best};
}

}  // namespace shelldrag
