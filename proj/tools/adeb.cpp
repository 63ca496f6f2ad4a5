// adeb: adaptive per-partition error bounds for cosmology fields.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adeb/archive.hpp"
#include "adeb/codec.hpp"
#include "adeb/config.hpp"
#include "adeb/features.hpp"
#include "adeb/halo.hpp"
#include "adeb/pipeline.hpp"
#include "adeb/planner.hpp"
#include "adeb/rate_model.hpp"
#include "adeb/report.hpp"
#include "adeb/spectrum.hpp"
#include "adeb/synth.hpp"

namespace fs = std::filesystem;
using namespace adeb;

namespace {

// Config keys that can also be given as --flags; flags override the file.
const std::vector<std::pair<std::string, std::string>> kConfigFlags = {
    {"field", "input field file (F3D1); synthetic when omitted"},
    {"role", "field role (baryon_density, dark_matter_density, temperature, velocity_x|y|z, generic)"},
    {"preset", "synthetic preset: heterogeneous or smooth"},
    {"dims", "synthetic dims X,Y,Z or N"},
    {"seed", "synthetic seed"},
    {"snapshots", "number of synthetic snapshots for the multi-snapshot table"},
    {"snapshot-paths", "comma-separated extra snapshot files"},
    {"block", "partition dims X,Y,Z or N"},
    {"t-boundary", "halo candidate threshold"},
    {"t-halo", "halo peak threshold (default 2 * t-boundary)"},
    {"eb-avg", "mean error bound"},
    {"target-sigma", "target FFT error spread (alternative to eb-avg)"},
    {"mass-fault-budget", "halo mass fault budget"},
    {"k-cut", "highest checked wavenumber (default N/8)"},
    {"tol", "power spectrum tolerance"},
    {"budget-margin", "fraction of the heuristic bound used by default"},
    {"strategy", "uniform, fft, halo, combined or auto"},
    {"rate-model", "rate model JSON (calibrate when omitted)"},
    {"calibration-stride", "calibrate on every n-th partition"},
    {"calibration-points", "calibration grid size"},
    {"probe", "1: measure C_m per partition"},
    {"output", "report directory"},
    {"threads", "worker threads"},
};

struct ConfigOptions {
  std::optional<std::string> file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "key=value config file");
    for (const auto& [flag, help] : kConfigFlags) cmd->add_option("--" + flag, values[flag], help);
  }

  PipelineConfig load(CLI::App* cmd) const {
    ConfigMap overrides;
    for (const auto& [flag, help] : kConfigFlags) {
      if (cmd->count("--" + flag) > 0) overrides[flag] = values.at(flag);
    }
    std::optional<fs::path> path;
    if (file) path = *file;
    return load_config(path, overrides);
  }
};

template <typename F>
void write_to(const fs::path& path, F&& fn) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  fn(out);
}

int fail(const std::string& stage, const std::exception& e) {
  std::cerr << "error [" << stage << "]: " << e.what() << '\n';
  return kExitStageError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adeb - adaptive error-bound configuration for partitioned cosmology fields"};
  app.require_subcommand(1);
  int status = kExitPass;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic field");
  std::string s_role = "baryon_density", s_preset = "heterogeneous", s_dims = "128", s_out;
  std::uint64_t s_seed = 1;
  synth->add_option("--role", s_role, "field role");
  synth->add_option("--preset", s_preset, "heterogeneous or smooth");
  synth->add_option("--dims", s_dims, "X,Y,Z or N");
  synth->add_option("--seed", s_seed, "random seed");
  synth->add_option("-o,--out", s_out, "output F3D1 file")->required();
  synth->callback([&] {
    try {
      const auto role = role_from_string(s_role);
      const auto f = generate_synthetic(SynthesisSpec::preset(s_preset, role, parse_dims(s_dims)), s_seed);
      save_field(f, s_out);
      std::cout << "wrote " << s_out << " (" << to_string(f.dims()) << ", " << to_string(role) << ")\n";
    } catch (const std::exception& e) {
      status = fail("synth", e);
    }
  });

  // features
  auto* features = app.add_subcommand("features", "per-partition features as CSV");
  ConfigOptions f_cfg;
  f_cfg.attach(features);
  std::string f_out;
  features->add_option("-o,--out", f_out, "CSV output (stdout when omitted)");
  features->callback([&] {
    try {
      const auto cfg = f_cfg.load(features);
      const auto field = obtain_field(cfg);
      const auto pset = partition_field(field, cfg.block_dims);
      const auto feats = extract_features(pset, field, cfg.t_boundary, 1.0, cfg.threads);
      auto emit = [&](std::ostream& o) {
        o.precision(10);
        o << "partition_id,mean,cell_count,n_ref\n";
        for (const auto& p : feats) o << p.partition_id << ',' << p.mean << ',' << p.cell_count << ',' << p.n_ref << '\n';
      };
      if (f_out.empty()) emit(std::cout); else write_to(f_out, emit);
    } catch (const std::exception& e) {
      status = fail("features", e);
    }
  });

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "fit the bitrate model and write it as JSON");
  ConfigOptions c_cfg;
  c_cfg.attach(calib);
  std::string c_out = "rate_model.json";
  calib->add_option("-o,--out", c_out, "model JSON output");
  calib->callback([&] {
    try {
      const auto cfg = c_cfg.load(calib);
      const auto field = obtain_field(cfg);
      const auto pset = partition_field(field, cfg.block_dims);
      const double eb = resolve_eb_avg(cfg, field);
      const auto model = calibrate(pset, field, calibration_options(cfg, eb));
      save_rate_model(model, c_out);
      std::cout << "c = " << model.c << ", C(mu) = " << model.fit_alpha << " ln(mu) + " << model.fit_beta
                << ", median residual " << model.report.median_rel_residual << " -> " << c_out << '\n';
    } catch (const std::exception& e) {
      status = fail("calibrate", e);
    }
  });

  // plan
  auto* plan = app.add_subcommand("plan", "compute per-partition error bounds");
  ConfigOptions p_cfg;
  p_cfg.attach(plan);
  std::string p_out = "plan.csv";
  plan->add_option("-o,--out", p_out, "plan CSV output");
  plan->callback([&] {
    try {
      const auto cfg = p_cfg.load(plan);
      const auto field = obtain_field(cfg);
      const auto pset = partition_field(field, cfg.block_dims);
      const auto feats = extract_features(pset, field, cfg.t_boundary, 1.0, cfg.threads);
      const double eb = resolve_eb_avg(cfg, field);
      std::optional<RateModel> model;
      try {
        model = obtain_model(cfg, pset, field, eb);
      } catch (const CalibrationError& e) {
        std::cerr << "warning: " << e.what() << '\n';
      }
      const auto plans = make_plans(cfg, pset, field, feats, model ? &*model : nullptr, eb);
      for (const auto& w : plans.warnings) std::cerr << "warning: " << w << '\n';
      save_plan(plans.adaptive, p_out);
      std::cout << to_string(plans.adaptive.strategy) << " plan, mean eb " << plans.adaptive.mean_eb()
                << ", predicted ratio " << plans.adaptive.predicted_ratio() << " (uniform "
                << plans.uniform.predicted_ratio() << ") -> " << p_out << '\n';
    } catch (const std::exception& e) {
      status = fail("plan", e);
    }
  });

  // compress
  auto* comp = app.add_subcommand("compress", "compress a field under a plan");
  ConfigOptions z_cfg;
  z_cfg.attach(comp);
  std::string z_plan, z_out = "archive.adlc";
  comp->add_option("--plan", z_plan, "plan CSV")->required();
  comp->add_option("-o,--out", z_out, "archive output");
  comp->callback([&] {
    try {
      const auto cfg = z_cfg.load(comp);
      const auto field = obtain_field(cfg);
      const auto archive = compress_field(field, cfg.block_dims, load_plan(z_plan), cfg.threads);
      save_archive(archive, z_out);
      std::cout << "bitrate " << archive.measured_bitrate << " ratio " << archive.compression_ratio() << " -> "
                << z_out << '\n';
    } catch (const std::exception& e) {
      status = fail("compress", e);
    }
  });

  // decompress
  auto* decomp = app.add_subcommand("decompress", "reconstruct a field from an archive");
  std::string d_in, d_out;
  unsigned d_threads = 1;
  decomp->add_option("archive", d_in, "archive file")->required();
  decomp->add_option("-o,--out", d_out, "output F3D1 file")->required();
  decomp->add_option("--threads", d_threads, "worker threads");
  decomp->callback([&] {
    try {
      save_field(decompress_archive(load_archive(d_in), d_threads), d_out);
      std::cout << "wrote " << d_out << '\n';
    } catch (const std::exception& e) {
      status = fail("decompress", e);
    }
  });

  // verify
  auto* verify = app.add_subcommand("verify", "check a reconstruction against its original");
  std::string v_orig, v_recon, v_role = "baryon_density", v_csv;
  double v_tol = 0.01, v_tb = kDefaultBoundaryThreshold;
  std::optional<double> v_kcut, v_budget, v_thalo;
  verify->add_option("original", v_orig, "original field")->required();
  verify->add_option("reconstructed", v_recon, "reconstructed field")->required();
  verify->add_option("--role", v_role, "field role");
  verify->add_option("--tol", v_tol, "power spectrum tolerance");
  verify->add_option("--k-cut", v_kcut, "highest checked wavenumber (default N/8)");
  verify->add_option("--t-boundary", v_tb, "halo candidate threshold");
  verify->add_option("--t-halo", v_thalo, "halo peak threshold");
  verify->add_option("--mass-fault-budget", v_budget, "halo check budget (baryon density only)");
  verify->add_option("--spectrum-csv", v_csv, "write the ratio curve here");
  verify->callback([&] {
    try {
      const auto role = role_from_string(v_role);
      const auto a = load_field(v_orig, role);
      const auto b = load_field(v_recon, role);
      PipelineConfig cfg;
      cfg.t_boundary = v_tb;
      cfg.t_halo = v_thalo;
      cfg.k_cut = v_kcut;
      const auto sv = verify_spectrum(a, b, cfg.k_cut_for(a.dims()), v_tol);
      std::cout << "spectrum " << (sv.pass ? "PASS" : "FAIL") << " worst deviation " << sv.worst_deviation << '\n';
      for (const auto& w : sv.warnings) std::cerr << "warning: " << w << '\n';
      if (!v_csv.empty()) write_to(v_csv, [&](auto& o) { write_spectrum_csv(o, sv); });
      bool ok = sv.pass;
      if (role == Role::baryon_density && v_budget) {
        const auto hv = verify_halos(a, b, cfg, *v_budget);
        std::cout << "halo " << (hv.pass ? "PASS" : "FAIL") << " measured fault " << hv.measured_fault
                  << " budget " << *v_budget << '\n';
        ok = ok && hv.pass;
      }
      status = ok ? kExitPass : kExitVerifyFail;
    } catch (const std::exception& e) {
      status = fail("verify", e);
    }
  });

  // report
  auto* report = app.add_subcommand("report", "write figure-analog CSVs for an original/reconstruction pair");
  std::string r_orig, r_recon, r_plan, r_role = "baryon_density", r_block = "32", r_dir = "adeb-report";
  double r_tb = kDefaultBoundaryThreshold;
  report->add_option("original", r_orig, "original field")->required();
  report->add_option("reconstructed", r_recon, "reconstructed field")->required();
  report->add_option("--plan", r_plan, "plan CSV used for the reconstruction")->required();
  report->add_option("--role", r_role, "field role");
  report->add_option("--block", r_block, "partition dims");
  report->add_option("--t-boundary", r_tb, "halo candidate threshold");
  report->add_option("-o,--output", r_dir, "report directory");
  report->callback([&] {
    try {
      const auto role = role_from_string(r_role);
      const auto a = load_field(r_orig, role);
      const auto b = load_field(r_recon, role);
      const auto p = load_plan(r_plan);
      const auto pset = partition_field(a, parse_dims(r_block));
      if (p.ebs.size() != pset.count()) throw ArgumentError("plan does not match the partitioning");
      fs::create_directories(r_dir);
      const fs::path dir = r_dir;
      write_to(dir / "error_histogram.csv",
               [&](auto& o) { write_histogram_csv(o, normalized_error_histogram(a, b, pset, p.ebs)); });
      write_to(dir / "sigma_comparison.csv", [&](auto& o) {
        write_sigma_csv(o, compare_fft_sigma(a, b, predict_fft_sigma(p.ebs, a.size()).sigma_3d));
      });
      const auto sv = verify_spectrum(a, b, static_cast<double>(std::min({a.dims().nx, a.dims().ny, a.dims().nz})) / 8.0);
      write_to(dir / "spectrum_ratio.csv", [&](auto& o) { write_spectrum_csv(o, sv); });
      const auto feats = extract_features(pset, a, r_tb);
      std::vector<PartitionRow> rows(pset.count());
      for (std::size_t id = 0; id < pset.count(); ++id) {
        rows[id].partition_id = id;
        rows[id].n_ref = feats[id].n_ref;
        rows[id].eb = p.ebs[id];
        rows[id].predicted_flips = feats[id].n_ref * p.ebs[id] / 4.0;
        rows[id].measured_flips = count_candidacy_changes(extract_block(a.values(), a.dims(), pset.blocks[id]),
                                                          extract_block(b.values(), b.dims(), pset.blocks[id]), r_tb)
                                      .total();
      }
      write_to(dir / "fault_cells.csv", [&](auto& o) { write_fault_cells_csv(o, rows); });
      if (role == Role::baryon_density) {
        const auto ca = find_halos(a, r_tb, 2.0 * r_tb);
        const auto cb = find_halos(b, r_tb, 2.0 * r_tb);
        write_to(dir / "halo_comparison.csv",
                 [&](auto& o) { write_comparison_csv(o, ca, cb, compare_catalogs(ca, cb)); });
      }
      std::cout << "report written to " << r_dir << '\n';
    } catch (const std::exception& e) {
      status = fail("report", e);
    }
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run the full extract-plan-compress-verify-report pipeline");
  ConfigOptions pl_cfg;
  pl_cfg.attach(pipe);
  pipe->callback([&] {
    PipelineConfig cfg;
    try {
      cfg = pl_cfg.load(pipe);
    } catch (const std::exception& e) {
      status = fail("config", e);
      return;
    }
    const auto outcome = run_pipeline(cfg, &std::cout);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    if (outcome.exit_code == kExitStageError) {
      std::cerr << "error [" << outcome.failed_stage << "]: " << outcome.message << '\n';
    } else {
      std::cout << (outcome.exit_code == kExitPass ? "PASS" : "FAIL") << " (report in " << cfg.output_dir.string()
                << ")\n";
    }
    status = outcome.exit_code;
  });

  // overhead
  auto* over = app.add_subcommand("overhead", "time feature extraction + planning against compression");
  ConfigOptions o_cfg;
  o_cfg.attach(over);
  std::size_t o_repeats = 3;
  std::string o_out;
  over->add_option("--repeats", o_repeats, "timing repeats (best is kept)");
  over->add_option("--csv", o_out, "write the timing row here");
  over->callback([&] {
    try {
      const auto cfg = o_cfg.load(over);
      const auto field = obtain_field(cfg);
      const auto r = measure_overhead(cfg, field, o_repeats);
      write_overhead_csv(std::cout, r);
      if (!o_out.empty()) write_to(o_out, [&](auto& o) { write_overhead_csv(o, r); });
    } catch (const std::exception& e) {
      status = fail("overhead", e);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  return status;
}
