#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adeb/features.hpp"
#include "adeb/field.hpp"
#include "adeb/partition.hpp"

namespace adeb {

inline constexpr double kMeanEpsilon = 1e-30;

// ln b = slope * ln eb + intercept, least squares.
struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double coefficient() const;  // exp(intercept)
};
PowerLawFit fit_power_law(std::span<const double> ebs, std::span<const double> bitrates);

// Measured bitrate-vs-eb curve of one partition.
struct RateCurve {
  std::size_t partition_id = 0;
  double mean = 0.0;
  std::vector<double> ebs;
  std::vector<double> bitrates;
};

struct CalibrationPoint {
  std::size_t partition_id = 0;
  double mean = 0.0;
  double slope = 0.0;         // per-partition ln b / ln eb slope
  double coefficient = 0.0;   // C_m under the shared exponent
  double fitted = 0.0;        // C(mean) from the mean -> C map
  std::size_t points_used = 0;
};

struct CalibrationReport {
  std::vector<CalibrationPoint> points;
  std::vector<std::size_t> excluded;  // partitions with < 3 usable grid points
  double max_rel_residual = 0.0;
  double median_rel_residual = 0.0;
};

// b_m = C_m * eb^c with C(mean) = fit_alpha * ln(mean + 1e-30) + fit_beta.
struct RateModel {
  double c = -1.0;
  double fit_alpha = 0.0;
  double fit_beta = 1.0;
  double valid_bitrate_max = 2.0;
  double c_floor = 0.0;  // lower clamp for C(mean): smallest calibrated C_m / 4
  CalibrationReport report;
};

// Fits c as the median per-partition slope, C_m under that c, then the
// mean -> C map. Points at or above valid_bitrate_max are ignored.
RateModel fit_rate_model(std::span<const RateCurve> curves, double valid_bitrate_max = 2.0);

struct CalibrationOptions {
  std::vector<double> eb_grid;
  std::size_t sample_stride = 4;
  double valid_bitrate_max = 2.0;
  unsigned threads = 1;
};

// Compresses partitions with id % stride == 0 at every grid bound.
std::vector<RateCurve> measure_rate_curves(const PartitionSet& pset, const Field3D& field,
                                           const CalibrationOptions& options);
RateModel calibrate(const PartitionSet& pset, const Field3D& field, const CalibrationOptions& options);

// Log-spaced grid of `points` bounds from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

double estimate_C(double mean, const RateModel& model);

struct BitratePrediction {
  double bitrate = 0.0;
  bool extrapolated = false;  // above valid_bitrate_max
};
BitratePrediction predict_bitrate(double C, double eb, const RateModel& model);

struct PartitionRate {
  double C = 0.0;
  double eb = 0.0;
  std::size_t cells = 0;
};
// Cell-count-weighted mean of C_m * eb_m^c.
double predict_dataset_bitrate(std::span<const PartitionRate> plan, double c);

// Probe mode: C_m measured from one compression at eb_ref.
double probe_C(std::span<const float> block, const Dims3& dims, double eb_ref, double c);

std::string to_json(const RateModel& model);
RateModel rate_model_from_json(const std::string& text);
void save_rate_model(const RateModel& model, const std::string& path);
RateModel load_rate_model(const std::string& path);

}  // namespace adeb
