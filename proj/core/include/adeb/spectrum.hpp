#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "adeb/field.hpp"

namespace adeb {

// Radially binned power: bin i covers |k| in [i*w, (i+1)*w), P is the mean of
// |X(k)|^2 / (N^3)^2 over the modes in the bin.
struct SpectrumResult {
  double bin_width = 1.0;
  std::vector<double> k_center;
  std::vector<double> power;
  std::vector<std::size_t> mode_counts;

  std::size_t bins() const { return power.size(); }
  double k_low(std::size_t bin) const { return static_cast<double>(bin) * bin_width; }
};

SpectrumResult power_spectrum(const Field3D& field, double bin_width = 1.0);
SpectrumResult power_spectrum(std::span<const double> values, const Dims3& dims, double bin_width = 1.0);

// |sum |X|^2 / N^3 - sum |x|^2| / sum |x|^2.
double parseval_relative_error(const Field3D& field);

// Predicted spread of each unnormalized FFT coefficient's real (and
// imaginary) error under per-partition uniform errors U[-eb_m, eb_m].
struct FftErrorPrediction {
  double sigma_3d = 0.0;
  double mu = 0.0;
  double confidence_2sigma = 0.9545;
};

// sigma = sqrt(cells / 6) * mean(eb_m); `cells` is N^3.
FftErrorPrediction predict_fft_sigma(std::span<const double> ebs, std::size_t cells, std::size_t partitions);
inline FftErrorPrediction predict_fft_sigma(std::span<const double> ebs, std::size_t cells) {
  return predict_fft_sigma(ebs, cells, ebs.size());
}
// Exact inverse of predict_fft_sigma for a target spread.
double eb_budget_from_sigma(double target_sigma, std::size_t cells);
inline std::size_t cube(std::size_t n) { return n * n * n; }

// Heuristic: largest sigma for which every bin below k_cut keeps its power
// within tol at two standard deviations, accounting for the noise-power bias
// 2 sigma^2 and the cross-term scatter over the bin's modes.
double sigma_from_power_tolerance(const SpectrumResult& original, std::size_t cells, double k_cut, double tol);

struct BinRatio {
  double k_center = 0.0;
  double p_orig = 0.0;
  double p_recon = 0.0;
  double ratio = 1.0;
  std::size_t mode_count = 0;
  bool checked = false;
};

struct SpectrumVerdict {
  bool pass = true;
  double k_cut = 0.0;
  double tol = 0.0;
  double worst_deviation = 0.0;  // max |ratio - 1| over checked bins
  std::vector<BinRatio> bins;
  std::vector<std::string> warnings;
};

// PASS iff P'(k)/P(k) lies in [1 - tol, 1 + tol] for every bin with lower
// edge below k_cut. Bins with zero original power are skipped with a warning.
SpectrumVerdict verify_spectrum(const Field3D& orig, const Field3D& recon, double k_cut, double tol = 0.01);
SpectrumVerdict compare_spectra(const SpectrumResult& orig, const SpectrumResult& recon, double k_cut, double tol);

// CSV columns: k_bin_center,P_orig,P_recon,ratio,mode_count
void write_spectrum_csv(std::ostream& out, const SpectrumVerdict& verdict);

}  // namespace adeb
