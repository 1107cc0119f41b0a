#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shelldrag/errors.hpp"
#include "shelldrag/io.hpp"

namespace shelldrag {

inline constexpr int kSensorCount = 8;

using Readings = Eigen::Matrix<double, kSensorCount, 1>;
using Force3 = Eigen::Vector3d;

struct CalibrationSample
{
  Readings readings = Readings::Zero();
  Force3 force = Force3::Zero();
};

/// Linear model of the tactile shell: force -> plate displacement through a
/// diagonal compliance, displacement -> counts along each reflector normal.
struct SensorForwardModel
{
  std::array<Eigen::Vector3d, kSensorCount> sensitivity;
  Readings gain;                  ///< [counts/m]
  Readings offset;                ///< [counts]
  Eigen::Vector3d compliance;     ///< [m/N]
  double noise_sigma{0.0};        ///< [counts]

  /// Four z-only reflectors, two tilted about y (x and z), two about x (y and z).
  static SensorForwardModel standard(double beta = std::numbers::pi / 4.0)
  {
    SensorForwardModel m;
    const double s = std::sin(beta), c = std::cos(beta);
    for (int j = 0; j < 4; ++j)
      m.sensitivity[static_cast<std::size_t>(j)] = {0.0, 0.0, 1.0};
    m.sensitivity[4] = {s, 0.0, c};
    m.sensitivity[5] = {-s, 0.0, c};
    m.sensitivity[6] = {0.0, s, c};
    m.sensitivity[7] = {0.0, -s, c};
    m.gain << 2.0e6, 2.2e6, 1.9e6, 2.1e6, 2.0e6, 1.8e6, 2.05e6, 1.95e6;
    m.offset << 512.0, 498.0, 530.0, 505.0, 520.0, 490.0, 515.0, 501.0;
    m.compliance << 4.0e-4, 4.0e-4, 2.0e-4;
    m.noise_sigma = 0.0;
    return m;
  }

  void validate() const
  {
    for (const auto& v : sensitivity)
      if (!(std::abs(v.norm() - 1.0) < 1e-12))
        throw InvalidArgument("sensor model: sensitivity vectors must be unit length");
    if (!(compliance.array() > 0.0).all() || !compliance.allFinite())
      throw InvalidArgument("sensor model: compliance must be positive");
    if (!gain.allFinite() || !offset.allFinite())
      throw InvalidArgument("sensor model: gains and offsets must be finite");
    if (!(noise_sigma >= 0.0))
      throw InvalidArgument("sensor model: noise sigma must be >= 0");
  }

  /// 8x3 map from force [N] to noise-free counts above offset.
  Eigen::Matrix<double, kSensorCount, 3> force_to_counts() const
  {
    Eigen::Matrix<double, kSensorCount, 3> a;
    for (int j = 0; j < kSensorCount; ++j)
      a.row(j) = gain(j) * sensitivity[static_cast<std::size_t>(j)].transpose() * compliance.asDiagonal();
    return a;
  }
};

inline std::vector<CalibrationSample> synth_dataset(const SensorForwardModel& model, std::span<const Force3> forces,
                                                    std::uint64_t seed)
{
  model.validate();
  const auto a = model.force_to_counts();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<CalibrationSample> out;
  out.reserve(forces.size());
  for (const auto& f : forces) {
    CalibrationSample s;
    s.force = f;
    s.readings = a * f + model.offset;
    if (model.noise_sigma > 0.0)
      for (int j = 0; j < kSensorCount; ++j)
        s.readings(j) += model.noise_sigma * noise(rng);
    out.push_back(s);
  }
  return out;
}

/// Gaussian excitation forces with per-axis standard deviation `scale` [N].
inline std::vector<Force3> random_forces(std::size_t n, const Force3& scale, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Force3> out(n);
  for (auto& f : out)
    for (int k = 0; k < 3; ++k)
      f(k) = scale(k) * g(rng);
  return out;
}

/// Per-axis force noise implied by `noise_sigma` counts on every channel
/// for the minimum-variance linear estimator.
inline Force3 noise_equivalent_force(const SensorForwardModel& model)
{
  model.validate();
  const Eigen::MatrixXd a = model.force_to_counts();
  const Eigen::MatrixXd pinv = a.completeOrthogonalDecomposition().pseudoInverse();
  return model.noise_sigma * pinv.rowwise().norm();
}

struct CalibrationModel
{
  Eigen::Matrix<double, 3, kSensorCount + 1> c = Eigen::Matrix<double, 3, kSensorCount + 1>::Zero();
  Force3 rms = Force3::Zero();  ///< training RMS per axis [N]
  std::size_t n_train{0};
};

inline Force3 apply(const CalibrationModel& model, const Readings& r)
{
  return model.c.leftCols<kSensorCount>() * r + model.c.col(kSensorCount);
}

inline Force3 rms_error(const CalibrationModel& model, std::span<const CalibrationSample> data)
{
  if (data.empty())
    throw InvalidArgument("rms_error: empty dataset");
  Force3 acc = Force3::Zero();
  for (const auto& s : data)
    acc += (apply(model, s.readings) - s.force).cwiseAbs2();
  return (acc / static_cast<double>(data.size())).cwiseSqrt();
}

/// Least-squares fit of C in F = C [r; 1] (minimum-norm when the readings are
/// collinear), via a complete orthogonal decomposition.
inline CalibrationModel fit(std::span<const CalibrationSample> data)
{
  constexpr int p = kSensorCount + 1;
  if (data.size() < static_cast<std::size_t>(p))
    throw DegenerateExcitation("calibration fit needs at least 9 samples, got " + std::to_string(data.size()));
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x(n, p);
  Eigen::MatrixXd y(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    x.row(i).head<kSensorCount>() = s.readings.transpose();
    x(i, kSensorCount) = 1.0;
    y.row(i) = s.force.transpose();
  }
  // Every force axis must vary independently of the others and of the
  // constant term, otherwise that axis cannot be learned.
  Eigen::MatrixXd fa(n, 4);
  fa.leftCols<3>() = y;
  fa.col(3).setOnes();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> fqr(n, 4);
  fqr.setThreshold(1e-10);
  fqr.compute(fa * fa.colwise().norm().cwiseInverse().asDiagonal());
  if (fqr.rank() < 4)
    throw DegenerateExcitation("calibration fit: forces do not excite all three axes independently");

  // Readings from a noise-free linear shell span only force space plus the
  // constant, so the design may be rank deficient; the minimum-norm solution
  // still reproduces the forces exactly. Columns are scaled to unit norm so
  // the rank threshold does not depend on the count scale.
  const Eigen::VectorXd scale = x.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(scale(j) > 0.0))
      throw DegenerateExcitation("calibration fit: channel " + std::to_string(j + 1) + " is identically zero");
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  // The threshold has to be in place before compute(), which uses it to
  // split off the null space.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(n, p);
  cod.setThreshold(1e-10);
  cod.compute(xs);
  if (cod.rank() < 4)
    throw DegenerateExcitation("calibration fit: readings do not observe all three force axes (rank " +
                               std::to_string(cod.rank()) + ")");
  const Eigen::MatrixXd beta = scale.cwiseInverse().asDiagonal() * cod.solve(y);

  CalibrationModel m;
  m.c = beta.transpose();
  m.n_train = data.size();
  m.rms = rms_error(m, data);
  return m;
}

// Dataset CSV: s1..s8,fx_n,fy_n,fz_n

inline const std::string& dataset_header()
{
  static const std::string h = "s1,s2,s3,s4,s5,s6,s7,s8,fx_n,fy_n,fz_n";
  return h;
}

inline void write_dataset(std::ostream& out, std::span<const CalibrationSample> data)
{
  out << dataset_header() << '\n';
  for (const auto& s : data) {
    for (int j = 0; j < kSensorCount; ++j)
      out << io::format_number(s.readings(j)) << ',';
    out << io::format_number(s.force(0)) << ',' << io::format_number(s.force(1)) << ','
        << io::format_number(s.force(2)) << '\n';
  }
}

inline std::vector<CalibrationSample> parse_dataset(std::istream& in)
{
  std::vector<CalibrationSample> out;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = io::clean_line(raw, line_no == 1);
    if (!have_header) {
      if (line != dataset_header())
        throw ParseError("schema", line_no, "expected header '" + dataset_header() + "'");
      have_header = true;
      continue;
    }
    if (line.empty())
      continue;
    const auto fields = io::split_fields(line);
    if (fields.size() != kSensorCount + 3)
      throw ParseError("row", line_no, "expected 11 fields, got " + std::to_string(fields.size()));
    CalibrationSample s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = io::parse_number(fields[i]);
      if (!v)
        throw ParseError("row", line_no, "field " + std::to_string(i + 1) + " is not a finite number: '" +
                                           std::string(fields[i]) + "'");
      if (i < kSensorCount)
        s.readings(static_cast<Eigen::Index>(i)) = *v;
      else
        s.force(static_cast<Eigen::Index>(i - kSensorCount)) = *v;
    }
    out.push_back(s);
  }
  if (!have_header)
    throw ParseError("schema", 0, "missing header");
  return out;
}

inline nlohmann::ordered_json to_json(const CalibrationModel& m)
{
  nlohmann::ordered_json j;
  auto c = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kSensorCount + 1; ++k)
      c.push_back(m.c(r, k));
  j["c"] = std::move(c);
  j["rms"] = {m.rms(0), m.rms(1), m.rms(2)};
  j["n_train"] = m.n_train;
  return j;
}

inline CalibrationModel calibration_from_json(const nlohmann::json& j)
{
  CalibrationModel m;
  try {
    const auto& c = j.at("c");
    if (!c.is_array() || c.size() != 3 * (kSensorCount + 1))
      throw ParseError("schema", 0, "model 'c' must hold 27 numbers");
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < kSensorCount + 1; ++k)
        m.c(r, k) = c.at(static_cast<std::size_t>(r * (kSensorCount + 1) + k)).get<double>();
    const auto& rms = j.at("rms");
    if (!rms.is_array() || rms.size() != 3)
      throw ParseError("schema", 0, "model 'rms' must hold 3 numbers");
    for (int k = 0; k < 3; ++k)
      m.rms(k) = rms.at(static_cast<std::size_t>(k)).get<double>();
    m.n_train = j.at("n_train").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema", 0, std::string("calibration model: ") + e.what());
  }
  return m;
}

}  // namespace shelldrag
