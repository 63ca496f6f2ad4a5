#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adeb/archive.hpp"
#include "adeb/config.hpp"
#include "adeb/error.hpp"
#include "adeb/features.hpp"
#include "adeb/halo.hpp"
#include "adeb/planner.hpp"
#include "adeb/rate_model.hpp"
#include "adeb/report.hpp"
#include "adeb/spectrum.hpp"

namespace adeb {

inline constexpr int kExitPass = 0;
inline constexpr int kExitStageError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerifyFail = 3;

// Relative slack on the mass-fault budget when judging the measured fault;
// the predictor is an expectation and the measured count fluctuates.
inline constexpr double kHaloFaultSlack = 0.15;

// Wraps a failure with the name of the stage it happened in.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// The input field (snapshot 0) or a later snapshot of the sequence.
Field3D obtain_field(const PipelineConfig& cfg, std::size_t snapshot = 0);
std::size_t snapshot_count(const PipelineConfig& cfg);

// Mean bound from eb_avg, target_sigma, or the tolerance heuristic times the
// configured margin.
double resolve_eb_avg(const PipelineConfig& cfg, const Field3D& field);

// Calibration grid spans the planner's clamp band around eb_avg.
CalibrationOptions calibration_options(const PipelineConfig& cfg, double eb_avg);
RateModel obtain_model(const PipelineConfig& cfg, const PartitionSet& pset, const Field3D& field, double eb_avg);

struct PlanBundle {
  CompressionPlan adaptive;
  CompressionPlan uniform;
  double mass_budget = 0.0;  // 0 when no halo constraint applies
  std::vector<double> probe_coefficients;
  std::vector<std::string> warnings;
};
// model may be null (calibration failed): the adaptive plan is then uniform.
PlanBundle make_plans(const PipelineConfig& cfg, const PartitionSet& pset, const Field3D& field,
                      std::span<const PartitionFeatures> features, const RateModel* model, double eb_avg);

struct HaloVerdict {
  bool pass = true;
  double budget = 0.0;
  double measured_fault = 0.0;  // t_boundary * changed candidacies
  CandidacyChange changes;
  HaloCatalog orig;
  HaloCatalog recon;
  CatalogComparison comparison;
};
HaloVerdict verify_halos(const Field3D& orig, const Field3D& recon, const PipelineConfig& cfg, double budget);

struct PipelineOutcome {
  int exit_code = kExitPass;
  std::string failed_stage;
  std::string message;
  double eb_avg = 0.0;
  CompressionPlan plan;
  CompressionPlan uniform;
  double adaptive_ratio = 0.0;
  double uniform_ratio = 0.0;
  std::optional<SpectrumVerdict> spectrum;
  std::optional<HaloVerdict> halo;
  std::vector<StageTiming> timings;
  std::vector<SnapshotRow> snapshots;
  std::vector<std::string> warnings;
};

// extract -> calibrate -> plan -> compress -> decompress -> verify -> report.
// Writes the report bundle into cfg.output_dir; log receives progress lines.
PipelineOutcome run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr);

struct OverheadReport {
  std::size_t cells = 0;
  std::size_t partitions = 0;
  std::size_t repeats = 0;
  double feature_seconds = 0.0;  // best of repeats
  double planning_seconds = 0.0;
  double compression_seconds = 0.0;
  double overhead_ratio() const;
  double feature_throughput() const;  // cells per second
};
// Single-threaded timing of feature extraction + planning against compression
// of the same field. Calibration happens beforehand and is not timed.
OverheadReport measure_overhead(const PipelineConfig& cfg, const Field3D& field, std::size_t repeats = 3);
// cells,partitions,repeats,feature_seconds,planning_seconds,compression_seconds,overhead_ratio,feature_cells_per_second
void write_overhead_csv(std::ostream& out, const OverheadReport& r);

}  // namespace adeb
