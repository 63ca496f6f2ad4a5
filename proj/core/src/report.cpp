#include "adeb/report.hpp"

#include <cmath>
#include <ostream>

#include "adeb/error.hpp"
#include "adeb/fft.hpp"

namespace adeb {

namespace {

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& o) : out(o), old(o.precision(10)) {}
  ~PrecisionGuard() { out.precision(old); }
  std::ostream& out;
  std::streamsize old;
};

double ratio_of(double bitrate) { return bitrate > 0.0 ? 32.0 / bitrate : 0.0; }

}  // namespace

void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows) {
  PrecisionGuard g(out);
  out << "label,strategy,eb_avg,mean_eb,predicted_bitrate,measured_bitrate,predicted_ratio,measured_ratio,"
         "spectrum_pass,worst_deviation\n";
  for (const auto& r : rows) {
    out << r.label << ',' << to_string(r.strategy) << ',' << r.eb_avg << ',' << r.mean_eb << ','
        << r.predicted_bitrate << ',' << r.measured_bitrate << ',' << ratio_of(r.predicted_bitrate) << ','
        << ratio_of(r.measured_bitrate) << ',' << (r.spectrum_pass ? "PASS" : "FAIL") << ','
        << r.worst_deviation << '\n';
  }
}

void write_timing_csv(std::ostream& out, std::span<const StageTiming> timings) {
  PrecisionGuard g(out);
  out << "stage,seconds\n";
  for (const auto& t : timings) out << t.stage << ',' << t.seconds << '\n';
}

ErrorHistogram normalized_error_histogram(const Field3D& orig, const Field3D& recon, const PartitionSet& pset,
                                          std::span<const double> ebs, std::size_t bins) {
  if (orig.dims() != recon.dims() || orig.dims() != pset.field_dims) throw ArgumentError("shape mismatch");
  if (ebs.size() != pset.count()) throw ArgumentError("one bound per partition required");
  if (bins == 0) throw ArgumentError("histogram needs at least one bin");
  ErrorHistogram h{1.0, std::vector<std::uint64_t>(bins, 0)};
  const double scale = static_cast<double>(bins) / 2.0;
  for (std::size_t id = 0; id < pset.count(); ++id) {
    const auto a = extract_block(orig.values(), orig.dims(), pset.blocks[id]);
    const auto b = extract_block(recon.values(), recon.dims(), pset.blocks[id]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double e = (static_cast<double>(b[i]) - static_cast<double>(a[i])) / ebs[id];
      if (!(std::fabs(e) <= 1.0)) {
        throw InvariantViolation("partition " + std::to_string(id) + " exceeds its error bound");
      }
      const auto bin = static_cast<std::size_t>(std::floor((e + 1.0) * scale));
      h.counts[std::min(bin, bins - 1)]++;
    }
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const ErrorHistogram& hist) {
  PrecisionGuard g(out);
  const double expected = static_cast<double>(hist.total()) / static_cast<double>(hist.counts.size());
  out << "bin_center,count,expected_uniform\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << hist.bin_center(i) << ',' << hist.counts[i] << ',' << expected << '\n';
  }
}

SigmaComparison compare_fft_sigma(const Field3D& orig, const Field3D& recon, double predicted_sigma) {
  if (orig.dims() != recon.dims()) throw ArgumentError("shape mismatch");
  std::vector<double> err(orig.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    err[i] = static_cast<double>(recon.values()[i]) - static_cast<double>(orig.values()[i]);
  }
  const auto X = dft3_forward(err, orig.dims());
  SigmaComparison s;
  s.predicted = predicted_sigma;
  double re2 = 0.0, im2 = 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 1; i < X.data.size(); ++i) {
    const double re = X.data[i].real(), im = X.data[i].imag();
    re2 += re * re;
    im2 += im * im;
    if (std::fabs(re) <= 2.0 * predicted_sigma) ++covered;
  }
  s.modes = X.data.size() - 1;
  if (s.modes > 0) {
    s.measured_re = std::sqrt(re2 / static_cast<double>(s.modes));
    s.measured_im = std::sqrt(im2 / static_cast<double>(s.modes));
    s.coverage_2sigma = static_cast<double>(covered) / static_cast<double>(s.modes);
  }
  return s;
}

void write_sigma_csv(std::ostream& out, const SigmaComparison& s) {
  PrecisionGuard g(out);
  const double rel = s.predicted > 0.0 ? (s.measured_re - s.predicted) / s.predicted : 0.0;
  out << "predicted_sigma,measured_sigma_re,measured_sigma_im,relative_error,coverage_2sigma,modes\n"
      << s.predicted << ',' << s.measured_re << ',' << s.measured_im << ',' << rel << ',' << s.coverage_2sigma
      << ',' << s.modes << '\n';
}

void write_fault_cells_csv(std::ostream& out, std::span<const PartitionRow> rows) {
  PrecisionGuard g(out);
  out << "partition_id,n_ref,eb,predicted_flips,measured_flips\n";
  for (const auto& r : rows) {
    out << r.partition_id << ',' << r.n_ref << ',' << r.eb << ',' << r.predicted_flips << ',' << r.measured_flips
        << '\n';
  }
}

void write_bit_quality_csv(std::ostream& out, std::span<const PartitionRow> rows) {
  PrecisionGuard g(out);
  out << "partition_id,mean,C,eb,predicted_bitrate,measured_bitrate,marginal_cost\n";
  for (const auto& r : rows) {
    out << r.partition_id << ',' << r.mean << ',' << r.C << ',' << r.eb << ',' << r.predicted_bitrate << ','
        << r.measured_bitrate << ',' << r.marginal_cost << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, std::span<const SnapshotRow> rows) {
  PrecisionGuard g(out);
  out << "snapshot,source,uniform_ratio,static_ratio,adaptive_ratio\n";
  for (const auto& r : rows) {
    out << r.snapshot << ',' << r.source << ',' << r.uniform_ratio << ',' << r.static_ratio << ','
        << r.adaptive_ratio << '\n';
  }
}

}  // namespace adeb
