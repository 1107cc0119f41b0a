// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shelldrag/app.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace shelldrag;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail)
{
  std::printf("%s  %2d  %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double a)
{
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join(const std::vector<int>& v)
{
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

ChannelSpec deflection_channel(double d, std::optional<double> spacing = std::nullopt)
{
  auto c = preset("d3").channel();
  c.width = 2.0 * EllipseBody{}.r_y - 2.0 * d;
  c.spacing = spacing;
  return c;
}

void stiffness()
{
  const BeamSpec spec;
  const double I = spec.width * std::pow(spec.thickness, 3) / 12.0;
  const double k = torsional_stiffness(spec);
  const double rel = std::abs(k - 8.48e-4) / 8.48e-4;
  report(1, rel <= 0.005 && std::abs(area_moment(spec) - I) <= 1e-12 * I, "stiffness arithmetic",
         "k_t = " + fmt("%.6e", k) + " N m/rad, I = " + fmt("%.4e", area_moment(spec)) + " m^4, rel err " +
           fmt("%.2e", rel));
}

void frames()
{
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool inward = true, backward = true;
  for (int i = 0; i < 1000; ++i) {
    EllipseBody b;
    b.r_x = 0.02 + 0.2 * u(rng);
    b.r_y = b.r_x * (0.1 + 0.9 * u(rng));
    b.x_r = -1.0 + 2.0 * u(rng);
    const double phi = std::numbers::pi * (1e-6 + (1.0 - 2e-6) * u(rng));
    const auto f = surface_frame(phi, b);
    worst = std::max({worst, std::abs(norm(f.normal) - 1.0), std::abs(norm(f.tangent) - 1.0),
                      std::abs(dot(f.normal, f.tangent))});
    const Point2 p{b.r_x * std::cos(phi) + b.x_r, b.r_y * std::sin(phi)};
    inward = inward && dot(f.normal, Point2{b.x_r, 0.0} - p) > 0.0;
    backward = backward && f.tangent.x <= 0.0;
  }
  const double dt = seconds_since(t0);
  report(2, worst <= 1e-12 && inward && backward && dt < 1.0, "frame properties",
         "max orthonormality error " + fmt("%.1e", worst) + (inward ? ", normals inward" : ", NORMAL OUTWARD") +
           (backward ? ", tangents backward" : ", TANGENT FORWARD") + ", " + fmt("%.3f s", dt));
}

void contact_oracle()
{
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0, mismatched = 0;
  double worst = 0.0;
  while (checked < 100) {
    EllipseBody b;
    b.r_x = 0.05 + 0.08 * u(rng);
    b.r_y = 0.03 + (b.r_x - 0.03) * u(rng);
    b.x_r = -0.2 + 0.4 * u(rng);
    const double L = 0.015 + 0.03 * u(rng);
    // Bases above the shell whose tip circle crosses it, clear of tangency.
    const Point2 base{b.x_r + b.r_x * (-1.2 + 2.4 * u(rng)), b.r_y * 0.5 + (0.5 * b.r_y + L) * u(rng)};
    if (contains(base, b) || ellipse_level(base, b) > 10.0)
      continue;
    const auto c = contact_angle(base, L, b);
    if (c.kind != TipContact::Kind::touching)
      continue;
    const double lvl = ellipse_level({base.x, base.y - L}, b);
    if (std::abs(lvl - 1.0) < 0.02)
      continue;
    const auto ref = oracle::grid_contact_angle({base.x, base.y}, L, {b.r_x, b.r_y, b.x_r});
    ++checked;
    if (!ref) {
      ++mismatched;
      continue;
    }
    worst = std::max(worst, std::abs(c.phi - *ref));
  }
  const double dt = seconds_since(t0);
  report(3, mismatched == 0 && worst <= 1e-6 && dt < 30.0, "contact angle vs 1e6-point grid",
         std::to_string(checked) + " configurations, max |dphi| = " + fmt("%.2e rad", worst) +
           (mismatched ? ", " + std::to_string(mismatched) + " without grid root" : "") + ", " +
           fmt("%.2f s", dt));
}

void contact_counts()
{
  const EllipseBody body;
  auto counts = [&](double d, std::optional<double> spacing) {
    const auto c = deflection_channel(d, spacing);
    return plateau_stats(sweep(c, body), c, body).contact_counts;
  };
  const std::vector<int> want{5, 6};
  const auto formula = counts(0.03, std::nullopt);
  const auto fixed = counts(0.03, 0.025);
  const bool ok = formula == want || fixed == want;
  report(4, ok, "contact count at d = 3 cm alternates 5/6",
         "formula spacing " + join(formula) + ", 2.5 cm spacing " + join(fixed) + "; d = 2 cm gives " +
           join(counts(0.02, std::nullopt)) + " and d = 1 cm " + join(counts(0.01, std::nullopt)));
}

std::vector<double> plateau_means()
{
  const EllipseBody body;
  std::vector<double> m;
  for (double d : {0.01, 0.02, 0.03}) {
    const auto c = deflection_channel(d);
    m.push_back(plateau_stats(sweep(c, body), c, body).mean);
  }
  return m;
}

void drag_shape(const std::vector<double>& means)
{
  const EllipseBody body;
  bool zero_outside = true, oscillates = true;
  for (double d : {0.01, 0.02, 0.03}) {
    const auto c = deflection_channel(d);
    const auto trace = sweep(c, body);
    const auto bases = beam_base_positions(c.n, c.length, c.spacing);
    const double first = c.offset + bases.front();
    const double last_tip = c.offset + bases.back() + c.beam.length;
    for (const auto& s : trace.samples) {
      const bool outside = s.x + body.r_x <= first || s.x - body.r_x >= last_tip;
      if (outside && s.drag != 0.0)
        zero_outside = false;
    }
    const auto st = plateau_stats(trace, c, body);
    oscillates = oscillates && st.max - st.min > 1e-3 * st.mean;
  }
  const bool monotone = means[0] < means[1] && means[1] < means[2];
  report(5, monotone && zero_outside && oscillates, "drag monotonicity and shape",
         "plateau means " + fmt("%.4f", means[0]) + " < " + fmt("%.4f", means[1]) + " < " + fmt("%.4f N", means[2]) +
           (zero_outside ? ", zero outside channel" : ", NONZERO OUTSIDE") +
           (oscillates ? ", plateau oscillates" : ", FLAT PLATEAU"));
}

void overprediction(std::vector<double> means)
{
  // Lower bounds paired by rank, since the pairing order is not fixed.
  const std::vector<double> bounds{0.03, 0.08, 0.13};
  std::sort(means.begin(), means.end());
  bool ok = true;
  for (std::size_t i = 0; i < 3; ++i)
    ok = ok && means[i] > bounds[i];
  const bool all_above_max = means.front() > 0.13;
  report(6, ok, "simulation overpredicts measured drag",
         "sorted means " + fmt("%.4f", means[0]) + "/" + fmt("%.4f", means[1]) + "/" + fmt("%.4f", means[2]) +
           " N vs 0.03/0.08/0.13 N" + (all_above_max ? "; each also above 0.13 N" : "; smallest is below 0.13 N"));
}

void metric_identities()
{
  bool ok = std::abs(drag_energy(0.13, 0.28) - 0.0364) <= 1e-12 * 0.0364;
  const double m = 0.087, v = 0.05;
  ok = ok && specific_resistance(m * 9.81 * v, m, v) == 1.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double p = u(rng), mass = u(rng), vel = u(rng), c = u(rng), f = u(rng), l = u(rng);
    const double eta = specific_resistance(p, mass, vel);
    worst = std::max({worst, std::abs(specific_resistance(c * p, mass, vel) / (c * eta) - 1.0),
                      std::abs(specific_resistance(p, c * mass, vel) * c / eta - 1.0),
                      std::abs(specific_resistance(p, mass, c * vel) * c / eta - 1.0),
                      std::abs(drag_energy(c * f, l) / (c * drag_energy(f, l)) - 1.0)});
  }
  ok = ok && worst <= 1e-12;
  report(7, ok, "metrics identities",
         "E(0.13 N, 0.28 m) = " + fmt("%.6g J", drag_energy(0.13, 0.28)) + ", eta(P = mgv) = " +
           fmt("%.17g", specific_resistance(m * 9.81 * v, m, v)) + ", linearity rel err " + fmt("%.1e", worst));
}

void lateral_cancellation()
{
  const EllipseBody body;
  double worst = 0.0;
  std::size_t n = 0;
  for (double d : {0.0, 0.01, 0.02, 0.03}) {
    SweepOptions o;
    o.two_sided = true;
    for (const auto& s : sweep(deflection_channel(d), body, o).samples) {
      worst = std::max(worst, std::abs(s.lateral));
      ++n;
    }
  }
  report(8, worst < 1e-12, "two-sided lateral cancellation",
         "max |sum F_y| = " + fmt("%.2e N", worst) + " over " + std::to_string(n) + " positions");
}

void calibration()
{
  const Force3 scale{1.0, 1.0, 2.0};
  auto m = SensorForwardModel::standard();
  const auto clean = synth_dataset(m, random_forces(2000, scale, 11), 12);
  const std::span<const CalibrationSample> all(clean);
  const double clean_rms = rms_error(fit(all.first(1600)), all.subspan(1600)).maxCoeff();

  m.noise_sigma = 1.0;
  m.noise_sigma = 0.05 / noise_equivalent_force(m).maxCoeff();
  const Force3 sigma_eq = noise_equivalent_force(m);
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto train = synth_dataset(m, random_forces(4000, scale, seed), seed + 1000);
    const auto test = synth_dataset(m, random_forces(1000, scale, seed + 500), seed + 2000);
    const Force3 r = rms_error(fit(train), test).cwiseQuotient(sigma_eq);
    lo = std::min(lo, r.minCoeff());
    hi = std::max(hi, r.maxCoeff());
  }
  report(9, clean_rms < 1e-9 && lo >= 0.9 && hi <= 1.2, "calibration recovery",
         "noise-free test RMS " + fmt("%.1e N", clean_rms) + "; 20 seeds held-out RMS / sigma_eq in [" +
           fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]");
}

void telemetry()
{
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TelemetryRecord> recs;
  double t = 0.0;
  for (int i = 0; i < 2000; ++i) {
    t += 0.01;
    recs.push_back({t, g(rng), g(rng), g(rng), g(rng), g(rng), g(rng)});
  }
  std::stringstream buf;
  write_telemetry(buf, recs);
  const std::string text = buf.str();
  const auto back = parse_telemetry(buf);
  std::ostringstream again;
  write_telemetry(again, back);
  const bool exact = back == recs && again.str() == text;

  std::vector<TelemetryRecord> step;
  for (int i = 0; i <= 1000; ++i) {
    TelemetryRecord r;
    r.t = i * 0.01;
    r.fx = (i >= 200 && i < 800) ? -0.2 : 0.0;
    step.push_back(r);
  }
  const auto w = detect_window(step);
  const double err = std::max(std::abs(w.t_enter - 2.0), std::abs(w.t_exit - 8.0));
  report(10, exact && !w.free_run && err <= 0.01 + 1e-12, "telemetry round trip and window",
         std::string(exact ? "2000 rows field-exact" : "ROUND TRIP MISMATCH") + ", window " + fmt("%.2f", w.t_enter) +
           " to " + fmt("%.2f s", w.t_exit) + " (max error " + fmt("%.3f s", err) + ")");
}

void batch_determinism()
{
  testutil::TempDir a, b;
  const std::vector<RunConfig> runs{preset("d1"), preset("d2"), preset("d3")};
  const auto t0 = Clock::now();
  app::batch(runs, a.path());
  const double dt = seconds_since(t0);
  app::batch(runs, b.path());
  bool identical = true;
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file())
      continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    identical = identical && testutil::slurp(entry.path()) == testutil::slurp(b.path() / rel);
    ++files;
  }
  report(11, identical && dt < 1.0 && files > 0, "batch determinism and speed",
         "d1/d2/d3 at dx = 1 mm in " + fmt("%.3f s", dt) + ", " + std::to_string(files) + " files " +
           (identical ? "byte-identical" : "DIFFER"));
}

void analyze_golden()
{
  testutil::TempDir dir;
  const std::filesystem::path data = SHELLDRAG_TEST_DATA_DIR;
  app::analyze(data / "golden_telemetry.csv", RunConfig{}, dir.path());
  const auto got = nlohmann::json::parse(testutil::slurp(dir / "metrics.json"));
  const auto want = nlohmann::json::parse(testutil::slurp(data / "golden_metrics.json"));
  double worst = 0.0;
  bool shape = got.at("strides").size() == want.at("strides").size() &&
               got.at("window").at("free_run") == want.at("window").at("free_run");
  auto cmp = [&](const nlohmann::json& g, const nlohmann::json& w) {
    const double x = w.get<double>();
    worst = std::max(worst, std::abs(g.get<double>() - x) / std::max(1.0, std::abs(x)));
  };
  for (const char* k : {"mean_fx_n", "mean_fz_n", "mean_power_w", "mean_velocity_mps", "drag_energy_j",
                        "electrical_energy_j", "specific_resistance"})
    cmp(got.at(k), want.at(k));
  for (const char* k : {"t_enter_s", "t_exit_s"})
    cmp(got.at("window").at(k), want.at("window").at(k));
  if (shape)
    for (std::size_t i = 0; i < want.at("strides").size(); ++i)
      for (auto it = want.at("strides").at(i).begin(); it != want.at("strides").at(i).end(); ++it)
        cmp(got.at("strides").at(i).at(it.key()), it.value());

  // Closed-form check: constant 0.1 N drag and 2 W between t = 1 and 6 s.
  std::vector<TelemetryRecord> recs;
  for (int i = 0; i <= 700; ++i) {
    TelemetryRecord r;
    r.t = i / 100.0;
    r.fx = (i >= 100 && i <= 600) ? -0.1 : 0.0;
    r.leg_left = std::remainder(2.0 * std::numbers::pi * r.t, 2.0 * std::numbers::pi);
    r.power = 2.0;
    recs.push_back(r);
  }
  const auto m = trial_metrics(recs, detect_window(recs), {});
  const double eta = 2.0 / (0.087 * 9.81 * (0.28 / 5.0));
  const bool closed = std::abs(m.drag_energy - 0.028) < 1e-12 && std::abs(m.electrical_energy - 10.0) < 1e-12 &&
                      std::abs(m.specific_resistance - eta) < 1e-9 && m.per_stride.size() == 5;
  report(12, shape && worst <= 1e-9 && closed, "analyze pipeline on synthetic telemetry",
         "golden max rel diff " + fmt("%.1e", worst) + ", " + std::to_string(want.at("strides").size()) +
           " strides; closed-form trace " + (closed ? "exact" : "MISMATCH") +
           " (measured robot eta values are hardware data, not reproduced)");
}

}  // namespace

int main()
{
  stiffness();
  frames();
  contact_oracle();
  contact_counts();
  const auto means = plateau_means();
  drag_shape(means);
  overprediction(means);
  metric_identities();
  lateral_cancellation();
  calibration();
  telemetry();
  batch_determinism();
  analyze_golden();
  std::printf("%d of 12 criteria failed\n", failures);
  return failures;
}
