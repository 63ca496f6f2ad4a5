#include "adeb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "adeb/codec.hpp"
#include "adeb/synth.hpp"

namespace adeb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto timed(std::vector<StageTiming>& timings, const std::string& stage, F&& fn) {
  const auto t0 = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings.push_back({stage, seconds_since(t0)});
    } else {
      auto result = fn();
      timings.push_back({stage, seconds_since(t0)});
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  fn(out);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void check_bounds(const Field3D& orig, const Field3D& recon, const PartitionSet& pset, std::span<const double> ebs) {
  for (std::size_t id = 0; id < pset.count(); ++id) {
    const auto a = extract_block(orig.values(), orig.dims(), pset.blocks[id]);
    const auto b = extract_block(recon.values(), recon.dims(), pset.blocks[id]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(std::fabs(static_cast<double>(b[i]) - static_cast<double>(a[i])) <= ebs[id])) {
        throw InvariantViolation("partition " + std::to_string(id) + " violates its error bound");
      }
    }
  }
}

double total_n_ref(std::span<const PartitionFeatures> features) {
  double n = 0.0;
  for (const auto& f : features) n += f.n_ref;
  return n;
}

}  // namespace

std::size_t snapshot_count(const PipelineConfig& cfg) {
  if (!cfg.field_path.empty()) return 1 + cfg.snapshot_paths.size();
  return std::max<std::size_t>(cfg.snapshots, 1 + cfg.snapshot_paths.size());
}

Field3D obtain_field(const PipelineConfig& cfg, std::size_t snapshot) {
  if (snapshot > 0 && snapshot <= cfg.snapshot_paths.size()) {
    return load_field(cfg.snapshot_paths[snapshot - 1], cfg.role);
  }
  if (!cfg.field_path.empty()) {
    if (snapshot != 0) throw ArgumentError("snapshot index out of range");
    return load_field(cfg.field_path, cfg.role);
  }
  // Synthetic sequence: structure grows more contrasted with each snapshot,
  // mimicking later (sparser) simulation times.
  auto spec = SynthesisSpec::preset(cfg.preset, cfg.role, cfg.dims);
  spec.log_sigma *= 1.0 + 0.1 * static_cast<double>(snapshot);
  return generate_synthetic(spec, cfg.seed);
}

double resolve_eb_avg(const PipelineConfig& cfg, const Field3D& field) {
  if (cfg.eb_avg) return *cfg.eb_avg;
  const auto cells = field.dims().cells();
  if (cfg.target_sigma) return eb_budget_from_sigma(*cfg.target_sigma, cells);
  const auto spectrum = power_spectrum(field);
  const double sigma = sigma_from_power_tolerance(spectrum, cells, cfg.k_cut_for(field.dims()), cfg.tol);
  const double eb = eb_budget_from_sigma(sigma, cells) * cfg.budget_margin;
  if (!(eb > 0.0)) {
    throw ArgumentError("tolerance heuristic gives a zero bound; pass eb_avg or target_sigma explicitly");
  }
  return eb;
}

CalibrationOptions calibration_options(const PipelineConfig& cfg, double eb_avg) {
  CalibrationOptions o;
  o.eb_grid = log_grid(eb_avg / kClampFactor, eb_avg * kClampFactor, cfg.calibration_points);
  o.sample_stride = cfg.calibration_stride;
  o.threads = cfg.threads;
  return o;
}

RateModel obtain_model(const PipelineConfig& cfg, const PartitionSet& pset, const Field3D& field, double eb_avg) {
  if (!cfg.rate_model_path.empty()) return load_rate_model(cfg.rate_model_path.string());
  return calibrate(pset, field, calibration_options(cfg, eb_avg));
}

PlanBundle make_plans(const PipelineConfig& cfg, const PartitionSet& pset, const Field3D& field,
                      std::span<const PartitionFeatures> features, const RateModel* model, double eb_avg) {
  PlanBundle b;
  PlanInputs in;
  in.features = features;
  in.model = model;
  in.t_boundary = cfg.t_boundary;
  if (model && cfg.probe) {
    b.probe_coefficients.resize(pset.count());
    for_each_block(pset.count(), cfg.threads, [&](std::size_t id) {
      const auto blk = extract_block(field.values(), field.dims(), pset.blocks[id]);
      b.probe_coefficients[id] = probe_C(blk, pset.blocks[id].extent, eb_avg, model->c);
    });
    in.coefficients = b.probe_coefficients;
  }
  b.uniform = plan_uniform(in, eb_avg);
  if (!model) {
    b.warnings.push_back("no rate model: adaptive plan falls back to uniform bounds");
    b.adaptive = b.uniform;
    return b;
  }

  auto strategy = cfg.strategy_for(field.role());
  const bool halo_aware = strategy == Strategy::halo || strategy == Strategy::combined;
  if (halo_aware) {
    b.mass_budget = cfg.mass_fault_budget.value_or(b.uniform.predicted_mass_fault);
    if (total_n_ref(features) <= 0.0 || !(b.mass_budget > 0.0)) {
      b.warnings.push_back("no cells near t_boundary: halo constraint dropped, planning for the spectrum only");
      b.mass_budget = 0.0;
      strategy = Strategy::fft;
    }
  }
  switch (strategy) {
    case Strategy::uniform: b.adaptive = b.uniform; break;
    case Strategy::fft: b.adaptive = plan_fft(in, eb_avg); break;
    case Strategy::halo: b.adaptive = plan_halo(in, b.mass_budget, eb_avg); break;
    case Strategy::combined: b.adaptive = plan_combined(in, eb_avg, b.mass_budget); break;
  }
  return b;
}

HaloVerdict verify_halos(const Field3D& orig, const Field3D& recon, const PipelineConfig& cfg, double budget) {
  HaloVerdict v;
  v.budget = budget;
  v.orig = find_halos(orig, cfg.t_boundary, cfg.halo_threshold());
  v.recon = find_halos(recon, cfg.t_boundary, cfg.halo_threshold());
  v.comparison = compare_catalogs(v.orig, v.recon);
  v.changes = count_candidacy_changes(orig.values(), recon.values(), cfg.t_boundary);
  v.measured_fault = cfg.t_boundary * static_cast<double>(v.changes.total());
  v.pass = v.measured_fault <= budget * (1.0 + kHaloFaultSlack);
  return v;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg, std::ostream* log) {
  PipelineOutcome out;
  auto say = [&](const std::string& s) {
    if (log) *log << s << '\n';
  };
  try {
    timed(out.timings, "config", [&] {
      cfg.validate();
      std::filesystem::create_directories(cfg.output_dir);
    });
    const auto field = timed(out.timings, "load", [&] { return obtain_field(cfg); });
    say("field " + field.name() + " " + to_string(field.dims()));

    const auto pset = timed(out.timings, "partition", [&] { return partition_field(field, cfg.block_dims); });
    const auto features = timed(out.timings, "features", [&] {
      return extract_features(pset, field, cfg.t_boundary, 1.0, cfg.threads);
    });
    out.eb_avg = timed(out.timings, "budget", [&] { return resolve_eb_avg(cfg, field); });
    say("eb_avg " + std::to_string(out.eb_avg));

    std::optional<RateModel> model;
    timed(out.timings, "calibrate", [&] {
      try {
        model = obtain_model(cfg, pset, field, out.eb_avg);
      } catch (const CalibrationError& e) {
        out.warnings.push_back(std::string("calibration failed (") + e.what() + ")");
      }
    });
    if (model && cfg.rate_model_path.empty()) save_rate_model(*model, (cfg.output_dir / "rate_model.json").string());

    auto plans = timed(out.timings, "plan", [&] {
      return make_plans(cfg, pset, field, features, model ? &*model : nullptr, out.eb_avg);
    });
    for (auto& w : plans.warnings) out.warnings.push_back(w);
    out.plan = plans.adaptive;
    out.uniform = plans.uniform;
    say("plan " + std::string(to_string(out.plan.strategy)) + " mean eb " + std::to_string(out.plan.mean_eb()));

    const auto archive = timed(out.timings, "compress", [&] {
      auto a = compress_field(field, cfg.block_dims, out.plan, cfg.threads);
      save_archive(a, cfg.output_dir / "archive.adlc");
      return a;
    });
    const auto uniform_archive = timed(out.timings, "compress_uniform", [&] {
      return compress_field(field, cfg.block_dims, out.uniform, cfg.threads);
    });
    out.adaptive_ratio = archive.compression_ratio();
    out.uniform_ratio = uniform_archive.compression_ratio();
    say("ratio adaptive " + std::to_string(out.adaptive_ratio) + " uniform " + std::to_string(out.uniform_ratio));

    const auto recon = timed(out.timings, "decompress", [&] {
      auto r = decompress_archive(load_archive(cfg.output_dir / "archive.adlc"), cfg.threads);
      check_bounds(field, r, pset, out.plan.ebs);
      return r;
    });
    const auto recon_uniform = timed(out.timings, "decompress_uniform", [&] {
      return decompress_archive(uniform_archive, cfg.threads);
    });

    const double k_cut = cfg.k_cut_for(field.dims());
    out.spectrum = timed(out.timings, "verify_spectrum", [&] { return verify_spectrum(field, recon, k_cut, cfg.tol); });
    const auto uniform_spectrum =
        timed(out.timings, "verify_spectrum_uniform", [&] { return verify_spectrum(field, recon_uniform, k_cut, cfg.tol); });
    for (auto& w : out.spectrum->warnings) out.warnings.push_back(w);
    say(std::string("spectrum ") + (out.spectrum->pass ? "PASS" : "FAIL") + " worst " +
        std::to_string(out.spectrum->worst_deviation));

    if (field.role() == Role::baryon_density) {
      const double budget = plans.mass_budget > 0.0 ? plans.mass_budget : out.uniform.predicted_mass_fault;
      out.halo = timed(out.timings, "verify_halo", [&] { return verify_halos(field, recon, cfg, budget); });
      say(std::string("halo ") + (out.halo->pass ? "PASS" : "FAIL") + " measured fault " +
          std::to_string(out.halo->measured_fault) + " budget " + std::to_string(budget));
    }

    // Multi-snapshot table: static bounds from snapshot 0 vs re-planning.
    const auto snapshots = snapshot_count(cfg);
    if (snapshots > 1) {
      timed(out.timings, "snapshots", [&] {
        for (std::size_t s = 0; s < snapshots; ++s) {
          const auto f = s == 0 ? field : obtain_field(cfg, s);
          if (f.dims() != field.dims()) throw ArgumentError("snapshot " + std::to_string(s) + " has different dims");
          const auto feats = extract_features(pset, f, cfg.t_boundary, 1.0, cfg.threads);
          const auto p = make_plans(cfg, pset, f, feats, model ? &*model : nullptr, out.eb_avg);
          SnapshotRow row;
          row.snapshot = s;
          row.source = s == 0 ? (cfg.field_path.empty() ? "synthetic" : cfg.field_path.string())
                              : (s <= cfg.snapshot_paths.size() ? cfg.snapshot_paths[s - 1].string() : "synthetic");
          row.uniform_ratio = compress_field(f, cfg.block_dims, p.uniform, cfg.threads).compression_ratio();
          row.static_ratio = compress_field(f, cfg.block_dims, out.plan, cfg.threads).compression_ratio();
          row.adaptive_ratio = compress_field(f, cfg.block_dims, p.adaptive, cfg.threads).compression_ratio();
          out.snapshots.push_back(row);
        }
      });
    }

    timed(out.timings, "report", [&] {
      const auto& dir = cfg.output_dir;
      save_plan(out.plan, (dir / "plan.csv").string());
      save_plan(out.uniform, (dir / "plan_uniform.csv").string());
      const RatioRow rows[] = {
          {"adaptive", out.plan.strategy, out.eb_avg, out.plan.mean_eb(), out.plan.predicted_bitrate,
           archive.measured_bitrate, out.spectrum->pass, out.spectrum->worst_deviation},
          {"uniform", Strategy::uniform, out.eb_avg, out.uniform.mean_eb(), out.uniform.predicted_bitrate,
           uniform_archive.measured_bitrate, uniform_spectrum.pass, uniform_spectrum.worst_deviation},
      };
      write_text(dir / "ratio_comparison.csv", [&](auto& o) { write_ratio_csv(o, rows); });
      write_text(dir / "spectrum_ratio.csv", [&](auto& o) { write_spectrum_csv(o, *out.spectrum); });
      write_text(dir / "spectrum_ratio_uniform.csv", [&](auto& o) { write_spectrum_csv(o, uniform_spectrum); });
      write_text(dir / "error_histogram.csv", [&](auto& o) {
        write_histogram_csv(o, normalized_error_histogram(field, recon, pset, out.plan.ebs));
      });
      write_text(dir / "sigma_comparison.csv", [&](auto& o) {
        write_sigma_csv(o, compare_fft_sigma(field, recon, out.plan.predicted_sigma3d));
      });

      std::vector<PartitionRow> prow(pset.count());
      const auto coeffs = out.plan.coefficients;
      for (std::size_t id = 0; id < pset.count(); ++id) {
        auto& r = prow[id];
        r.partition_id = id;
        r.mean = features[id].mean;
        r.n_ref = features[id].n_ref;
        r.eb = out.plan.ebs[id];
        r.C = id < coeffs.size() ? coeffs[id] : 0.0;
        r.predicted_bitrate = id < out.plan.predicted_bitrates.size() ? out.plan.predicted_bitrates[id] : 0.0;
        r.measured_bitrate = measure_bitrate(deserialize_block(archive.blocks[id]));
        r.marginal_cost = model && r.C > 0.0 ? marginal_cost(r.C, r.eb, model->c) : 0.0;
        r.predicted_flips = r.n_ref * r.eb / 4.0;
        const auto a = extract_block(field.values(), field.dims(), pset.blocks[id]);
        const auto b = extract_block(recon.values(), recon.dims(), pset.blocks[id]);
        r.measured_flips = count_candidacy_changes(a, b, cfg.t_boundary).total();
      }
      write_text(dir / "fault_cells.csv", [&](auto& o) { write_fault_cells_csv(o, prow); });
      write_text(dir / "bit_quality.csv", [&](auto& o) { write_bit_quality_csv(o, prow); });
      if (out.halo) {
        write_text(dir / "halo_comparison.csv", [&](auto& o) {
          write_comparison_csv(o, out.halo->orig, out.halo->recon, out.halo->comparison);
        });
        write_text(dir / "halo_catalog_orig.csv", [&](auto& o) { write_catalog_csv(o, out.halo->orig); });
        write_text(dir / "halo_catalog_recon.csv", [&](auto& o) { write_catalog_csv(o, out.halo->recon); });
      }
      if (!out.snapshots.empty()) {
        write_text(dir / "snapshots.csv", [&](auto& o) { write_snapshot_csv(o, out.snapshots); });
      }
    });
  } catch (const StageError& e) {
    out.exit_code = kExitStageError;
    out.failed_stage = e.stage();
    out.message = e.what();
  }

  const bool verified = out.exit_code == kExitPass && out.spectrum && out.spectrum->pass && (!out.halo || out.halo->pass);
  if (out.exit_code == kExitPass && !verified) {
    out.exit_code = kExitVerifyFail;
    out.message = "verification FAIL";
  }

  // Timing and summary are written even when a stage failed.
  try {
    if (std::filesystem::exists(cfg.output_dir)) {
      write_text(cfg.output_dir / "timing.csv", [&](auto& o) { write_timing_csv(o, out.timings); });
      write_text(cfg.output_dir / "summary.txt", [&](auto& o) {
        o.precision(10);
        o << "exit_code=" << out.exit_code << '\n';
        if (!out.failed_stage.empty()) o << "failed_stage=" << out.failed_stage << '\n';
        if (!out.message.empty()) o << "message=" << out.message << '\n';
        o << "eb_avg=" << out.eb_avg << '\n'
          << "strategy=" << to_string(out.plan.strategy) << '\n'
          << "adaptive_ratio=" << out.adaptive_ratio << '\n'
          << "uniform_ratio=" << out.uniform_ratio << '\n';
        if (out.spectrum) o << "spectrum=" << (out.spectrum->pass ? "PASS" : "FAIL") << '\n';
        if (out.halo) o << "halo=" << (out.halo->pass ? "PASS" : "FAIL") << '\n';
        for (const auto& w : out.warnings) o << "warning=" << w << '\n';
      });
    }
  } catch (const std::exception& e) {
    if (out.exit_code == kExitPass) {
      out.exit_code = kExitStageError;
      out.failed_stage = "report";
      out.message = e.what();
    }
  }
  return out;
}

double OverheadReport::overhead_ratio() const {
  return compression_seconds > 0.0 ? (feature_seconds + planning_seconds) / compression_seconds : 0.0;
}

double OverheadReport::feature_throughput() const {
  return feature_seconds > 0.0 ? static_cast<double>(cells) / feature_seconds : 0.0;
}

OverheadReport measure_overhead(const PipelineConfig& cfg, const Field3D& field, std::size_t repeats) {
  if (repeats == 0) throw ArgumentError("repeats must be >= 1");
  OverheadReport r;
  r.cells = field.size();
  r.repeats = repeats;
  const auto pset = partition_field(field, cfg.block_dims);
  r.partitions = pset.count();
  const double eb_avg = resolve_eb_avg(cfg, field);
  std::optional<RateModel> model;
  try {
    model = obtain_model(cfg, pset, field, eb_avg);
  } catch (const CalibrationError&) {
  }

  r.feature_seconds = r.planning_seconds = r.compression_seconds = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < repeats; ++k) {
    auto t0 = Clock::now();
    const auto features = extract_features(pset, field, cfg.t_boundary, 1.0, 1);
    r.feature_seconds = std::min(r.feature_seconds, seconds_since(t0));

    t0 = Clock::now();
    auto single = cfg;
    single.threads = 1;
    single.probe = 0;
    const auto plans = make_plans(single, pset, field, features, model ? &*model : nullptr, eb_avg);
    r.planning_seconds = std::min(r.planning_seconds, seconds_since(t0));

    t0 = Clock::now();
    const auto archive = compress_field(field, cfg.block_dims, plans.adaptive, 1);
    r.compression_seconds = std::min(r.compression_seconds, seconds_since(t0));
  }
  return r;
}

void write_overhead_csv(std::ostream& out, const OverheadReport& r) {
  const auto old = out.precision(10);
  out << "cells,partitions,repeats,feature_seconds,planning_seconds,compression_seconds,overhead_ratio,"
         "feature_cells_per_second\n"
      << r.cells << ',' << r.partitions << ',' << r.repeats << ',' << r.feature_seconds << ','
      << r.planning_seconds << ',' << r.compression_seconds << ',' << r.overhead_ratio() << ','
      << r.feature_throughput() << '\n';
  out.precision(old);
}

}  // namespace adeb
