#include "adeb/spectrum.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "adeb/error.hpp"
#include "adeb/fft.hpp"

namespace adeb {

SpectrumResult power_spectrum(std::span<const double> values, const Dims3& dims, double bin_width) {
  if (!(bin_width > 0.0)) throw ArgumentError("bin width must be positive");
  const auto X = fft3(values, dims);
  const double kmax = 0.5 * std::sqrt(static_cast<double>(dims.nx * dims.nx + dims.ny * dims.ny + dims.nz * dims.nz));
  const auto nbins = static_cast<std::size_t>(std::floor(kmax / bin_width)) + 1;
  SpectrumResult s;
  s.bin_width = bin_width;
  s.power.assign(nbins, 0.0);
  s.mode_counts.assign(nbins, 0);
  const double norm = static_cast<double>(dims.cells()) * static_cast<double>(dims.cells());
  for (std::size_t i = 0; i < dims.nx; ++i) {
    const double kx = static_cast<double>(signed_frequency(i, dims.nx));
    for (std::size_t j = 0; j < dims.ny; ++j) {
      const double ky = static_cast<double>(signed_frequency(j, dims.ny));
      for (std::size_t l = 0; l < dims.nz; ++l) {
        const double kz = static_cast<double>(signed_frequency(l, dims.nz));
        const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
        const auto bin = std::min(static_cast<std::size_t>(std::floor(k / bin_width)), nbins - 1);
        s.power[bin] += std::norm(X.data[dims.index(i, j, l)]) / norm;
        s.mode_counts[bin]++;
      }
    }
  }
  s.k_center.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    s.k_center[b] = (static_cast<double>(b) + 0.5) * bin_width;
    if (s.mode_counts[b]) s.power[b] /= static_cast<double>(s.mode_counts[b]);
  }
  return s;
}

SpectrumResult power_spectrum(const Field3D& field, double bin_width) {
  const auto v = field.values();
  std::vector<double> values(v.begin(), v.end());
  return power_spectrum(values, field.dims(), bin_width);
}

double parseval_relative_error(const Field3D& field) {
  const auto X = fft3(field);
  double freq = 0.0, space = 0.0;
  for (const auto& c : X.data) freq += std::norm(c);
  freq /= static_cast<double>(field.size());
  for (float v : field.values()) space += static_cast<double>(v) * v;
  if (space == 0.0) return freq == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::fabs(freq - space) / space;
}

FftErrorPrediction predict_fft_sigma(std::span<const double> ebs, std::size_t cells, std::size_t partitions) {
  if (ebs.empty() || partitions != ebs.size()) throw ArgumentError("predict_fft_sigma: M must equal the bound count");
  double sum = 0.0;
  for (double eb : ebs) {
    if (!(eb > 0.0)) throw ArgumentError("predict_fft_sigma: error bounds must be positive");
    sum += eb;
  }
  const double mean = sum / static_cast<double>(ebs.size());
  return {std::sqrt(static_cast<double>(cells) / 6.0) * mean, 0.0, 0.9545};
}

double eb_budget_from_sigma(double target_sigma, std::size_t cells) {
  if (!(target_sigma > 0.0)) throw ArgumentError("target sigma must be positive");
  return target_sigma / std::sqrt(static_cast<double>(cells) / 6.0);
}

double sigma_from_power_tolerance(const SpectrumResult& original, std::size_t cells, double k_cut, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("power tolerance must be positive");
  const double n3 = static_cast<double>(cells);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < original.bins(); ++b) {
    if (original.k_low(b) >= k_cut || original.mode_counts[b] == 0 || original.power[b] <= 0.0) continue;
    // S is the mean unnormalized power |X|^2 of the bin; u = sigma / sqrt(S)
    // solves 2u^2 + 2 * 2 sqrt(2/n) u = tol (bias + 2-sigma cross-term scatter).
    const double S = original.power[b] * n3 * n3;
    const double n = static_cast<double>(original.mode_counts[b]);
    const double a = 4.0 * std::sqrt(2.0 / n);
    const double u = (-a + std::sqrt(a * a + 8.0 * tol)) / 4.0;
    best = std::min(best, u * std::sqrt(S));
  }
  if (!std::isfinite(best)) throw ArgumentError("no spectrum bin with power below k_cut");
  return best;
}

SpectrumVerdict compare_spectra(const SpectrumResult& orig, const SpectrumResult& recon, double k_cut, double tol) {
  if (orig.bins() != recon.bins()) throw ArgumentError("spectra have different binning");
  if (!(tol >= 0.0)) throw ArgumentError("tolerance must be non-negative");
  SpectrumVerdict v;
  v.k_cut = k_cut;
  v.tol = tol;
  for (std::size_t b = 0; b < orig.bins(); ++b) {
    BinRatio r;
    r.k_center = orig.k_center[b];
    r.p_orig = orig.power[b];
    r.p_recon = recon.power[b];
    r.mode_count = orig.mode_counts[b];
    r.ratio = r.p_orig > 0.0 ? r.p_recon / r.p_orig : std::numeric_limits<double>::quiet_NaN();
    if (orig.k_low(b) < k_cut && r.mode_count > 0) {
      if (r.p_orig > 0.0) {
        r.checked = true;
        const double dev = std::fabs(r.ratio - 1.0);
        v.worst_deviation = std::max(v.worst_deviation, dev);
        if (!(r.ratio >= 1.0 - tol && r.ratio <= 1.0 + tol)) v.pass = false;
      } else {
        v.warnings.push_back("bin k=" + std::to_string(r.k_center) + " has zero original power; skipped");
      }
    }
    v.bins.push_back(r);
  }
  return v;
}

SpectrumVerdict verify_spectrum(const Field3D& orig, const Field3D& recon, double k_cut, double tol) {
  if (orig.dims() != recon.dims()) throw ArgumentError("verify_spectrum: dims differ");
  return compare_spectra(power_spectrum(orig), power_spectrum(recon), k_cut, tol);
}

void write_spectrum_csv(std::ostream& out, const SpectrumVerdict& verdict) {
  const auto old = out.precision(17);
  out << "k_bin_center,P_orig,P_recon,ratio,mode_count\n";
  for (const auto& b : verdict.bins) {
    out << b.k_center << ',' << b.p_orig << ',' << b.p_recon << ',';
    if (std::isnan(b.ratio)) out << "nan"; else out << b.ratio;
    out << ',' << b.mode_count << '\n';
  }
  out.precision(old);
}

}  // namespace adeb
