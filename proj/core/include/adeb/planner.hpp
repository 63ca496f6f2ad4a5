#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adeb/features.hpp"
#include "adeb/rate_model.hpp"

namespace adeb {

enum class Strategy { uniform, fft, halo, combined };
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

// Clamp band around the reference mean bound.
inline constexpr double kClampFactor = 4.0;

struct CompressionPlan {
  Strategy strategy = Strategy::uniform;
  double eb_avg = 0.0;          // budgeted (fft/combined) or reference mean bound
  std::vector<double> ebs;
  std::vector<double> coefficients;        // C_m used for predictions (empty if unknown)
  std::vector<double> predicted_bitrates;  // per partition
  double predicted_bitrate = 0.0;
  double predicted_sigma3d = 0.0;
  double predicted_mass_fault = 0.0;
  std::size_t clamp_events = 0;

  double mean_eb() const;
  double predicted_ratio() const { return predicted_bitrate > 0.0 ? 32.0 / predicted_bitrate : 0.0; }
};

// What the planner knows about a dataset.
struct PlanInputs {
  std::span<const PartitionFeatures> features;
  const RateModel* model = nullptr;
  double t_boundary = kDefaultBoundaryThreshold;
  // Probe-mode coefficients; when empty C_m = estimate_C(mean_m).
  std::span<const double> coefficients;
};

std::vector<double> partition_coefficients(const PlanInputs& in);

// The bound that gives partition m the same bitrate as a partition with C_a
// at eb_avg: eb_avg * exp(ln(C_m / C_a) / c).
double equal_bitrate_bound(double C_m, double C_a, double c, double eb_avg);

// Marginal bit cost |d b / d eb| = |c| * C * eb^(c - 1).
double marginal_cost(double C, double eb, double c);

CompressionPlan plan_uniform(double eb, std::size_t partitions);
CompressionPlan plan_uniform(const PlanInputs& in, double eb);

// Minimizes predicted bitrate subject to mean(eb_m) = eb_avg and the clamp
// band [eb_avg / 4, 4 eb_avg]: equal marginal cost across unclamped partitions.
CompressionPlan plan_fft(const PlanInputs& in, double eb_avg);

// Minimizes predicted bitrate subject to t_boundary * sum n_ref(m) eb_m / 4 <=
// budget. The clamp band is centred on reference_eb, or on the uniform bound
// that exactly spends the budget when reference_eb <= 0.
CompressionPlan plan_halo(const PlanInputs& in, double mass_fault_budget, double reference_eb = 0.0);

// plan_fft if its predicted fault mass fits the budget, otherwise the
// per-partition minimum of plan_fft and plan_halo.
CompressionPlan plan_combined(const PlanInputs& in, double eb_avg, double mass_fault_budget);

// Fills the prediction fields of a plan from its bounds.
void annotate_plan(CompressionPlan& plan, const PlanInputs& in);

// Summary block of '#' key=value lines, then partition_id,eb,predicted_bitrate.
void write_plan_csv(std::ostream& out, const CompressionPlan& plan);
CompressionPlan read_plan_csv(std::istream& in);
void save_plan(const CompressionPlan& plan, const std::string& path);
CompressionPlan load_plan(const std::string& path);

}  // namespace adeb
