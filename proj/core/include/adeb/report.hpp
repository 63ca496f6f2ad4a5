#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "adeb/codec.hpp"
#include "adeb/features.hpp"
#include "adeb/field.hpp"
#include "adeb/partition.hpp"
#include "adeb/planner.hpp"

namespace adeb {

// Report CSV writers. Every file has a header row and deterministic row order.

struct RatioRow {
  std::string label;
  Strategy strategy = Strategy::uniform;
  double eb_avg = 0.0;
  double mean_eb = 0.0;
  double predicted_bitrate = 0.0;
  double measured_bitrate = 0.0;
  bool spectrum_pass = false;
  double worst_deviation = 0.0;
};
// label,strategy,eb_avg,mean_eb,predicted_bitrate,measured_bitrate,predicted_ratio,measured_ratio,spectrum_pass,worst_deviation
void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};
// stage,seconds
void write_timing_csv(std::ostream& out, std::span<const StageTiming> timings);

// Histogram of (recon - orig) / eb_m pooled over partitions, bins over [-1, 1].
ErrorHistogram normalized_error_histogram(const Field3D& orig, const Field3D& recon, const PartitionSet& pset,
                                          std::span<const double> ebs, std::size_t bins = 100);
// bin_center,count,expected_uniform
void write_histogram_csv(std::ostream& out, const ErrorHistogram& hist);

struct SigmaComparison {
  double predicted = 0.0;
  double measured_re = 0.0;  // stddev of Re(FFT(recon - orig)) over non-DC modes
  double measured_im = 0.0;
  double coverage_2sigma = 0.0;  // fraction of |Re| <= 2 * predicted
  std::size_t modes = 0;
};
SigmaComparison compare_fft_sigma(const Field3D& orig, const Field3D& recon, double predicted_sigma);
// predicted_sigma,measured_sigma_re,measured_sigma_im,relative_error,coverage_2sigma,modes
void write_sigma_csv(std::ostream& out, const SigmaComparison& s);

struct PartitionRow {
  std::size_t partition_id = 0;
  double mean = 0.0;
  double n_ref = 0.0;
  double C = 0.0;
  double eb = 0.0;
  double predicted_bitrate = 0.0;
  double measured_bitrate = 0.0;
  double marginal_cost = 0.0;    // |d b / d eb| from the rate model
  double predicted_flips = 0.0;  // n_ref * eb / 4
  std::size_t measured_flips = 0;
};
// partition_id,n_ref,eb,predicted_flips,measured_flips
void write_fault_cells_csv(std::ostream& out, std::span<const PartitionRow> rows);
// partition_id,mean,C,eb,predicted_bitrate,measured_bitrate,marginal_cost
void write_bit_quality_csv(std::ostream& out, std::span<const PartitionRow> rows);

struct SnapshotRow {
  std::size_t snapshot = 0;
  std::string source;
  double uniform_ratio = 0.0;
  double static_ratio = 0.0;    // bounds planned once on the first snapshot
  double adaptive_ratio = 0.0;  // re-planned for this snapshot
};
// snapshot,source,uniform_ratio,static_ratio,adaptive_ratio
void write_snapshot_csv(std::ostream& out, std::span<const SnapshotRow> rows);

}  // namespace adeb
