#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shelldrag/app.hpp"

using namespace shelldrag;
namespace fs = std::filesystem;

namespace {

struct Common
{
  std::string config;
  std::string preset;
  std::string out;
  std::optional<double> dx;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> formats;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true)
{
  if (with_config) {
    cmd->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "free, d0, d1, d2 or d3");
  }
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--dx", c.dx, "sweep step [m]");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--format", c.formats, "csv, json or svg (repeatable)")->take_last()->expected(1);
}

// preset, then config file, then flags
RunConfig resolve(const std::string& preset_name, const std::string& config_path, const Common& c)
{
  RunConfig cfg = preset_name.empty() ? RunConfig{} : preset(preset_name);
  if (!config_path.empty()) {
    auto in = app::open_input(config_path);
    try {
      cfg = load_config(in, cfg);
    } catch (const ParseError& e) {
      throw ParseError(e.kind(), 0, config_path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
  }
  if (!c.out.empty())
    cfg.out_dir = c.out;
  if (c.dx)
    cfg.dx = *c.dx;
  if (c.seed)
    cfg.seed = *c.seed;
  if (!c.formats.empty())
    cfg.formats = std::set<std::string>(c.formats.begin(), c.formats.end());
  cfg.validate();
  return cfg;
}

int fail(const std::string& kind, const std::string& message, const std::string& key = {})
{
  nlohmann::ordered_json j;
  j["error"] = kind;
  if (!key.empty())
    j["key"] = key;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App cli{"Shell drag simulation, telemetry analysis and tactile-shell calibration"};
  cli.require_subcommand(1);
  cli.set_help_all_flag("--help-all");

  Common sim;
  bool two_sided = false;
  std::optional<double> spacing;
  auto* simulate = cli.add_subcommand("simulate", "sweep the shell through one channel");
  add_common(simulate, sim);
  simulate->add_flag("--two-sided", two_sided, "solve both walls explicitly");
  simulate->add_option("--spacing", spacing, "beam spacing override [m]");

  Common bat;
  std::vector<std::string> batch_presets, batch_configs;
  auto* batch = cli.add_subcommand("batch", "run several channel configurations concurrently");
  add_common(batch, bat, false);
  batch->add_option("--preset", batch_presets, "preset per run (repeatable, default d1 d2 d3)")->take_all();
  batch->add_option("--config", batch_configs, "config file per run (repeatable)")
    ->take_all()
    ->check(CLI::ExistingFile);

  Common ana;
  std::string telemetry;
  std::optional<double> threshold, hysteresis;
  auto* analyze = cli.add_subcommand("analyze", "window and score a telemetry trace");
  add_common(analyze, ana);
  analyze->add_option("telemetry", telemetry, "telemetry CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--threshold", threshold, "window threshold [N]");
  analyze->add_option("--hysteresis", hysteresis, "window hysteresis [N]");

  Common cal;
  std::string dataset;
  std::optional<double> split;
  std::size_t synth_samples = 0;
  double noise_counts = 0.0;
  auto* calibrate = cli.add_subcommand("calibrate", "fit the shell calibration matrix");
  add_common(calibrate, cal);
  calibrate->add_option("dataset", dataset, "dataset CSV (s1..s8,fx_n,fy_n,fz_n)")->check(CLI::ExistingFile);
  calibrate->add_option("--split", split, "training fraction (default 0.8)");
  calibrate->add_option("--synth-samples", synth_samples, "synthesise a dataset of this many rows");
  calibrate->add_option("--noise-counts", noise_counts, "sensor noise sigma for synthesis [counts]")
    ->check(CLI::NonNegativeNumber);

  auto* presets = cli.add_subcommand("presets", "list the channel presets");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*presets) {
      std::cout << "name,deflection_m,width_m\n";
      for (auto name : preset_names()) {
        const auto p = preset(name);
        std::cout << name << ',' << (p.deflection() ? io::format_number(*p.deflection()) : "free") << ','
                  << (p.width() ? io::format_number(*p.width()) : "free") << '\n';
      }
      return 0;
    }

    if (*simulate) {
      auto cfg = resolve(sim.preset, sim.config, sim);
      if (two_sided)
        cfg.two_sided = true;
      if (spacing)
        cfg.spacing = *spacing;
      cfg.validate();
      const auto s = app::simulate(cfg, cfg.out_dir);
      std::cout << cfg.name << ": plateau mean drag " << io::format_number(s.plateau.mean) << " N, contacts";
      for (int k : s.plateau.contact_counts)
        std::cout << ' ' << k;
      std::cout << ", output " << cfg.out_dir << '\n';
      return 0;
    }

    if (*batch) {
      std::vector<RunConfig> runs;
      if (batch_presets.empty() && batch_configs.empty())
        batch_presets = {"d1", "d2", "d3"};
      for (const auto& p : batch_presets)
        runs.push_back(resolve(p, "", bat));
      for (const auto& c : batch_configs)
        runs.push_back(resolve("", c, bat));
      const fs::path dir = bat.out.empty() ? fs::path("out") : fs::path(bat.out);
      const auto results = app::batch(runs, dir);
      for (const auto& s : results)
        std::cout << s.name << ": plateau mean drag " << io::format_number(s.plateau.mean) << " N\n";
      return 0;
    }

    if (*analyze) {
      auto cfg = resolve(ana.preset, ana.config, ana);
      if (threshold)
        cfg.window.threshold = *threshold;
      if (hysteresis)
        cfg.window.hysteresis = *hysteresis;
      cfg.validate();
      const auto m = app::analyze(telemetry, cfg, cfg.out_dir);
      std::cout << "window " << io::format_number(m.t_enter) << " to " << io::format_number(m.t_exit) << " s"
                << (m.free_run ? " (free run)" : "") << ", " << m.per_stride.size() << " strides, eta "
                << io::format_number(m.specific_resistance) << '\n';
      return 0;
    }

    if (*calibrate) {
      auto cfg = resolve(cal.preset, cal.config, cal);
      if (split)
        cfg.split = *split;
      cfg.validate();
      const fs::path dir = cfg.out_dir;
      std::vector<CalibrationSample> data;
      std::optional<Force3> sigma_eq;
      if (!dataset.empty()) {
        if (synth_samples > 0)
          return fail("usage", "give either a dataset file or --synth-samples, not both");
        data = app::read_dataset(dataset);
      } else {
        if (synth_samples == 0)
          return fail("usage", "calibrate needs a dataset file or --synth-samples N");
        auto model = SensorForwardModel::standard();
        model.noise_sigma = noise_counts;
        const auto forces = random_forces(synth_samples, Force3{1.0, 1.0, 2.0}, cfg.seed);
        data = synth_dataset(model, forces, cfg.seed + 1);
        sigma_eq = noise_equivalent_force(model);
        app::make_dir(dir);
        std::ostringstream out;
        write_dataset(out, data);
        app::write_text(dir / "dataset.csv", out.str());
      }
      const auto r = app::calibrate(data, cfg.split, dir, sigma_eq);
      std::cout << "trained on " << r.model.n_train << " rows, test RMS " << io::format_number(r.test_rms(0)) << ' '
                << io::format_number(r.test_rms(1)) << ' ' << io::format_number(r.test_rms(2)) << " N\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail(e.kind(), e.what(), e.key());
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
