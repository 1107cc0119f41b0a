#pragma once

// File-level pipelines behind the command-line tool. Each writes into one
// directory and returns what it computed, so tests can check both.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shelldrag/calibration.hpp"
#include "shelldrag/config.hpp"
#include "shelldrag/errors.hpp"
#include "shelldrag/io.hpp"
#include "shelldrag/metrics.hpp"
#include "shelldrag/simulator.hpp"
#include "shelldrag/svg.hpp"
#include "shelldrag/telemetry.hpp"

namespace shelldrag::app {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out)
    throw Error("io", "cannot write " + path.string());
}

inline std::ifstream open_input(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("io", "cannot open " + path.string());
  return in;
}

inline void make_dir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error("io", "cannot create directory " + dir.string() + ": " + ec.message());
}

inline std::string dump(const nlohmann::ordered_json& j)
{
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulationSummary
{
  std::string name;
  std::optional<double> deflection;
  std::optional<double> width;
  PlateauStats plateau;
  double transit_mean_drag{0.0};
  double drag_energy{0.0};
  int max_contacts{0};
};

/// Beams in contact on the upper wall.
inline int side_count(const TraceSample& s)
{
  int n = 0;
  for (const auto& c : s.contacts)
    n += c.bottom ? 0 : 1;
  return n;
}

inline nlohmann::ordered_json to_json(const SimulationSummary& s, const RunConfig& c)
{
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["deflection_m"] = s.deflection ? nlohmann::ordered_json(*s.deflection) : nlohmann::ordered_json(nullptr);
  j["width_m"] = s.width ? nlohmann::ordered_json(*s.width) : nlohmann::ordered_json(nullptr);
  j["channel_length_m"] = c.channel_length;
  j["beams_per_side"] = c.n;
  j["dx_m"] = c.dx;
  j["speed_mps"] = c.speed;
  j["plateau_samples"] = s.plateau.samples;
  j["plateau_mean_drag_n"] = s.plateau.mean;
  j["plateau_min_drag_n"] = s.plateau.min;
  j["plateau_max_drag_n"] = s.plateau.max;
  j["plateau_contact_counts"] = s.plateau.contact_counts;
  j["max_contact_count"] = s.max_contacts;
  j["transit_mean_drag_n"] = s.transit_mean_drag;
  j["drag_energy_j"] = s.drag_energy;
  j["transit_time_s"] = c.channel_length / c.speed;
  return j;
}

inline SimulationSummary simulate(const RunConfig& config, const fs::path& dir)
{
  config.validate();
  const auto channel = config.channel();
  EllipseBody body = config.body;
  body.x_r = 0.0;
  const auto trace = sweep(channel, body, config.sweep_options());

  SimulationSummary s;
  s.name = config.name;
  s.deflection = config.deflection();
  s.width = config.width();
  s.plateau = plateau_stats(trace, channel, body);
  s.transit_mean_drag = transit_mean_drag(trace, channel, body);
  s.drag_energy = drag_energy(s.transit_mean_drag, channel.length);
  for (const auto& x : trace.samples)
    s.max_contacts = std::max(s.max_contacts, side_count(x));

  make_dir(dir);
  {
    std::ostringstream cfg;
    write_config(cfg, config, false);
    write_text(dir / "config.ini", cfg.str());
  }
  using io::format_number;
  if (config.wants("csv")) {
    std::ostringstream t;
    t << "x_m,t_s,f_drag_n,contact_count\n";
    for (const auto& x : trace.samples)
      t << format_number(x.x) << ',' << format_number(x.t) << ',' << format_number(x.drag) << ','
        << side_count(x) << '\n';
    write_text(dir / "trace.csv", t.str());

    std::ostringstream b;
    b << "x_m,beam_index,phi_rad,delta_theta_rad,fx_n,fy_n,saturated\n";
    for (const auto& x : trace.samples)
      for (const auto& c : x.contacts) {
        // Bottom-wall beams get negative indices in two-sided runs.
        const int index = c.bottom ? -c.beam_index : c.beam_index;
        b << format_number(x.x) << ',' << index << ',' << format_number(c.phi) << ','
          << format_number(c.delta_theta) << ',' << format_number(c.force.x) << ',' << format_number(c.force.y)
          << ',' << (c.saturated ? 1 : 0) << '\n';
      }
    write_text(dir / "beams.csv", b.str());
  }
  if (config.wants("json"))
    write_text(dir / "summary.json", dump(to_json(s, config)));
  if (config.wants("svg")) {
    svg::Series drag{"F_drag", {}, {}};
    for (const auto& x : trace.samples) {
      drag.x.push_back(x.x);
      drag.y.push_back(x.drag);
    }
    std::ostringstream out;
    svg::write(out, {{"Simulated drag, " + config.name, "shell position x [m]", "drag force [N]", {drag}}});
    write_text(dir / "drag.svg", out.str());
  }
  return s;
}

// ------------------------------------------------------------------ batch

/// Runs each configuration into dir/<name>, in parallel, and writes a
/// combined batch.csv in input order.
inline std::vector<SimulationSummary> batch(const std::vector<RunConfig>& configs, const fs::path& dir)
{
  std::set<std::string> names;
  for (const auto& c : configs) {
    c.validate();
    if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos || c.name == "." || c.name == "..")
      throw ConfigError("run.name", "'" + c.name + "' is not usable as a directory name");
    if (!names.insert(c.name).second)
      throw ConfigError("run.name", "duplicate run name '" + c.name + "' in batch");
  }
  make_dir(dir);
  std::vector<std::future<SimulationSummary>> jobs;
  jobs.reserve(configs.size());
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&c, &dir] { return simulate(c, dir / c.name); }));
  std::vector<SimulationSummary> out;
  for (auto& j : jobs)
    out.push_back(j.get());

  std::ostringstream csv;
  csv << "name,deflection_m,width_m,plateau_mean_drag_n,min_contacts,max_contacts,drag_energy_j\n";
  for (const auto& s : out) {
    csv << s.name << ',' << (s.deflection ? io::format_number(*s.deflection) : "") << ','
        << (s.width ? io::format_number(*s.width) : "") << ',' << io::format_number(s.plateau.mean) << ','
        << (s.plateau.contact_counts.empty() ? 0 : s.plateau.contact_counts.front()) << ','
        << (s.plateau.contact_counts.empty() ? 0 : s.plateau.contact_counts.back()) << ','
        << io::format_number(s.drag_energy) << '\n';
  }
  write_text(dir / "batch.csv", csv.str());
  return out;
}

// ---------------------------------------------------------------- analyze

struct BoxStats
{
  std::size_t n{0};
  double min{0.0}, q1{0.0}, median{0.0}, q3{0.0}, max{0.0}, mean{0.0};
};

/// Quartiles by linear interpolation between order statistics.
inline BoxStats box_stats(std::vector<double> v)
{
  BoxStats b;
  b.n = v.size();
  if (v.empty())
    return b;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(h));
    const std::size_t k = std::min(i + 1, v.size() - 1);
    return v[i] + (h - static_cast<double>(i)) * (v[k] - v[i]);
  };
  b.min = v.front();
  b.max = v.back();
  b.q1 = q(0.25);
  b.median = q(0.5);
  b.q3 = q(0.75);
  double sum = 0.0;
  for (double x : v)
    sum += x;
  b.mean = sum / static_cast<double>(v.size());
  return b;
}

inline std::vector<TelemetryRecord> read_telemetry(const fs::path& path)
{
  auto in = open_input(path);
  try {
    return parse_telemetry(in);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), 0, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
}

inline TrialMetrics analyze(const fs::path& telemetry, const RunConfig& config, const fs::path& dir)
{
  config.validate();
  const auto records = read_telemetry(telemetry);
  if (records.size() < 2)
    throw UndefinedMetric(telemetry.string() + ": need at least two telemetry rows");
  const auto window = detect_window(records, config.window);
  const auto m = trial_metrics(records, window, {config.channel_length, config.body.mass, config.g});

  make_dir(dir);
  using io::format_number;
  if (config.wants("json"))
    write_text(dir / "metrics.json", dump(to_json(m)));
  if (config.wants("csv")) {
    std::ostringstream s;
    s << "stride,t_start_s,t_end_s,mean_fx_n,drag_energy_j,electrical_energy_j,specific_resistance\n";
    for (std::size_t k = 0; k < m.per_stride.size(); ++k) {
      const auto& x = m.per_stride[k];
      s << k + 1 << ',' << format_number(x.t_start) << ',' << format_number(x.t_end) << ','
        << format_number(x.mean_fx) << ',' << format_number(x.drag_energy) << ','
        << format_number(x.electrical_energy) << ',' << format_number(x.specific_resistance) << '\n';
    }
    write_text(dir / "strides.csv", s.str());

    std::vector<double> de, eta, ee;
    for (const auto& x : m.per_stride) {
      de.push_back(x.drag_energy);
      eta.push_back(x.specific_resistance);
      ee.push_back(x.electrical_energy);
    }
    std::ostringstream b;
    b << "metric,n,min,q1,median,q3,max,mean\n";
    auto row = [&](const char* name, const std::vector<double>& v) {
      const auto st = box_stats(v);
      b << name << ',' << st.n << ',' << format_number(st.min) << ',' << format_number(st.q1) << ','
        << format_number(st.median) << ',' << format_number(st.q3) << ',' << format_number(st.max) << ','
        << format_number(st.mean) << '\n';
    };
    row("drag_energy_j", de);
    row("specific_resistance", eta);
    row("electrical_energy_j", ee);
    write_text(dir / "boxplot.csv", b.str());
  }
  if (config.wants("svg")) {
    svg::Series fx{"F_x", {}, {}}, fy{"F_y", {}, {}}, fz{"F_z", {}, {}};
    svg::Series left{"left", {}, {}}, right{"right", {}, {}}, power{"power", {}, {}};
    for (const auto& r : records) {
      for (auto* s : {&fx, &fy, &fz, &left, &right, &power})
        s->x.push_back(r.t);
      fx.y.push_back(r.fx);
      fy.y.push_back(r.fy);
      fz.y.push_back(r.fz);
      left.y.push_back(r.leg_left);
      right.y.push_back(r.leg_right);
      power.y.push_back(r.power);
    }
    svg::Series enter{"window", {m.t_enter, m.t_enter}, {0.0, 0.0}};
    svg::Series exit{"", {m.t_exit, m.t_exit}, {0.0, 0.0}};
    double lo = 0.0, hi = 0.0;
    for (const auto* s : {&fx, &fy, &fz})
      for (double v : s->y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    enter.y = {lo, hi};
    exit.y = {lo, hi};
    std::ostringstream out;
    svg::write(out, {{"Shell forces", "time t [s]", "force [N]", {fx, fy, fz, enter, exit}},
                     {"Leg positions", "time t [s]", "leg angle [rad]", {left, right}},
                     {"Battery power", "time t [s]", "power [W]", {power}}});
    write_text(dir / "force_time.svg", out.str());
  }
  return m;
}

// -------------------------------------------------------------- calibrate

struct CalibrationReport
{
  CalibrationModel model;
  std::size_t n_test{0};
  Force3 test_rms = Force3::Zero();
  std::optional<Force3> noise_equivalent;  ///< set when the data was synthesised here
};

inline std::vector<CalibrationSample> read_dataset(const fs::path& path)
{
  auto in = open_input(path);
  try {
    return parse_dataset(in);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), 0, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
}

/// Fits on the leading `split` fraction of the rows and scores the rest.
inline CalibrationReport calibrate(const std::vector<CalibrationSample>& data, double split, const fs::path& dir,
                                   std::optional<Force3> noise_equivalent = std::nullopt)
{
  if (!(split > 0.0 && split < 1.0))
    throw ConfigError("calibration.split", "must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(split * static_cast<double>(data.size())));
  const std::span<const CalibrationSample> all(data);
  CalibrationReport r;
  r.model = fit(all.first(n_train));
  r.n_test = data.size() - n_train;
  if (r.n_test == 0)
    throw DegenerateExcitation("calibration split leaves no test rows");
  r.test_rms = rms_error(r.model, all.subspan(n_train));
  r.noise_equivalent = noise_equivalent;

  make_dir(dir);
  write_text(dir / "model.json", dump(to_json(r.model)));
  nlohmann::ordered_json rep;
  rep["n_train"] = r.model.n_train;
  rep["n_test"] = r.n_test;
  rep["train_rms_n"] = {r.model.rms(0), r.model.rms(1), r.model.rms(2)};
  rep["test_rms_n"] = {r.test_rms(0), r.test_rms(1), r.test_rms(2)};
  if (noise_equivalent)
    rep["noise_equivalent_n"] = {(*noise_equivalent)(0), (*noise_equivalent)(1), (*noise_equivalent)(2)};
  write_text(dir / "report.json", dump(rep));
  return r;
}

}  // namespace shelldrag::app
