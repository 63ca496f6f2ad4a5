#include <adeb/error.hpp>
#include <adeb/fft.hpp>
#include <adeb/spectrum.hpp>
#include <adeb/synth.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace adeb;

namespace {

// Uniform noise U[-eb_m, eb_m] with eb_m constant over slabs of `slab` x-planes.
std::vector<double> slab_noise(const Dims3& d, const std::vector<double>& ebs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> e(d.cells());
  const std::size_t slab = d.nx / ebs.size();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = u(rng) * ebs[(i / (d.ny * d.nz)) / slab];
  return e;
}

}  // namespace

TEST(FftSigma, ClosedFormExamples) {
  const std::size_t cells = cube(64);
  std::vector<double> one{1.0};
  auto p = predict_fft_sigma(one, cells);
  EXPECT_NEAR(p.sigma_3d, 209.02, 0.005);
  EXPECT_DOUBLE_EQ(p.sigma_3d, std::sqrt(262144.0 / 6.0));
  EXPECT_EQ(p.mu, 0.0);
  EXPECT_DOUBLE_EQ(p.confidence_2sigma, 0.9545);
  std::vector<double> two{0.5, 1.5};
  EXPECT_DOUBLE_EQ(predict_fft_sigma(two, cells).sigma_3d, p.sigma_3d);
  EXPECT_THROW(predict_fft_sigma(two, cells, 3), ArgumentError);
  EXPECT_THROW(predict_fft_sigma(std::vector<double>{1.0, 0.0}, cells), ArgumentError);
}

TEST(FftSigma, BudgetIsExactInverse) {
  const std::size_t cells = cube(64);
  EXPECT_NEAR(eb_budget_from_sigma(209.02, cells), 1.0, 1e-4);
  EXPECT_DOUBLE_EQ(eb_budget_from_sigma(2 * 37.5, cells), 2 * eb_budget_from_sigma(37.5, cells));
  for (double sigma : {1e-3, 0.7, 209.02, 5e6}) {
    const std::vector<double> eb{eb_budget_from_sigma(sigma, cells)};
    EXPECT_NEAR(predict_fft_sigma(eb, cells).sigma_3d, sigma, 1e-12 * sigma);
  }
  EXPECT_THROW(eb_budget_from_sigma(0.0, cells), ArgumentError);
}

TEST(FftSigma, DependsOnlyOnMeanBound) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::vector<double> ebs(64);
  for (auto& e : ebs) e = ln(rng);
  const double ref = predict_fft_sigma(ebs, cube(128)).sigma_3d;
  for (int i = 0; i < 20; ++i) {
    std::shuffle(ebs.begin(), ebs.end(), rng);
    EXPECT_NEAR(predict_fft_sigma(ebs, cube(128)).sigma_3d, ref, 1e-12 * ref);
  }
}

// Real part of one uniform error rotated by a uniform phase has variance eb^2 / 6.
TEST(FftSigma, IndividualContributionMonteCarlo) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  const double eb = 2.5;
  double sq = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double re = eb * u(rng) * std::cos(phase(rng));
    sq += re * re;
  }
  EXPECT_NEAR(std::sqrt(sq / n), std::sqrt(1.0 / 6.0) * eb, 0.01 * std::sqrt(1.0 / 6.0) * eb);
}

TEST(FftSigma, InjectedNoiseMatchesPrediction) {
  const Dims3 d{64, 64, 64};
  const std::vector<double> ebs{0.8, 1.0, 1.2, 1.0};  // four x-slab partitions
  auto e = slab_noise(d, ebs, 5);
  auto X = fft3(e, d);
  const double sigma = predict_fft_sigma(ebs, d.cells()).sigma_3d;
  double sq = 0.0;
  std::size_t modes = 0;
  for (std::size_t i = 1; i < X.data.size(); ++i) {
    sq += X.data[i].real() * X.data[i].real();
    ++modes;
  }
  EXPECT_NEAR(std::sqrt(sq / modes), sigma, 0.1 * sigma);
}

TEST(FftSigma, StandardizedErrorsAreNormal) {
  const Dims3 d{64, 64, 64};
  const std::vector<double> ebs{1.0};
  auto e = slab_noise(d, ebs, 6);
  auto X = fft3(e, d);
  const double sigma = predict_fft_sigma(ebs, d.cells()).sigma_3d;
  // kz in (0, N/2) picks one mode of every conjugate pair and no real-valued mode
  std::vector<double> z;
  std::size_t within = 0;
  for (std::size_t i = 0; i < d.nx; ++i)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t k = 1; k < d.nz / 2; ++k) {
        const double re = X.data[d.index(i, j, k)].real() / sigma;
        z.push_back(re);
        within += std::abs(re) <= 2.0;
      }
  EXPECT_LT(oracle::ks_statistic_normal(z), oracle::ks_critical_0001(z.size()));
  EXPECT_GE(static_cast<double>(within) / z.size(), 0.93);
}

TEST(VerifySpectrum, IdentityPasses) {
  auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {32, 32, 32}), 1);
  auto v = verify_spectrum(f, f, 4.0, 0.01);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.worst_deviation, 0.0);
  for (const auto& b : v.bins) {
    if (b.p_orig > 0) EXPECT_EQ(b.ratio, 1.0);
  }
  EXPECT_TRUE(v.warnings.empty());
}

TEST(VerifySpectrum, HugeNoiseFails) {
  auto f = generate_synthetic(SynthesisSpec::preset("smooth", Role::temperature, {32, 32, 32}), 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<float> n(0.0f, 1e5f);
  std::vector<float> noisy(f.values().begin(), f.values().end());
  for (auto& x : noisy) x += n(rng);
  auto v = verify_spectrum(f, Field3D("n", Role::temperature, f.dims(), noisy), 4.0, 0.01);
  EXPECT_FALSE(v.pass);
  EXPECT_GT(v.worst_deviation, 0.01);
  EXPECT_THROW(verify_spectrum(f, Field3D("s", Role::generic, {16, 16, 16}, std::vector<float>(4096)), 4.0),
               ArgumentError);
}

TEST(VerifySpectrum, ZeroPowerBinsAreSkippedWithWarning) {
  const std::size_t n = 16;
  Dims3 d{n, n, n};
  std::vector<float> v(d.cells());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        v[d.index(i, j, k)] = static_cast<float>(std::cos(2.0 * std::numbers::pi * 3.0 * i / n));
  Field3D f("cos", Role::generic, d, v);
  auto s = power_spectrum(f);
  // zero out numerically tiny leakage so the skip path is deterministic
  for (std::size_t b = 0; b < s.bins(); ++b)
    if (b != 3) s.power[b] = 0.0;
  auto verdict = compare_spectra(s, s, 5.0, 0.01);
  EXPECT_TRUE(verdict.pass);
  EXPECT_EQ(verdict.warnings.size(), 4u);  // bins 0, 1, 2, 4
  EXPECT_TRUE(verdict.bins[3].checked);
  EXPECT_FALSE(verdict.bins[1].checked);
}

TEST(VerifySpectrum, OnlyBinsBelowCutAreChecked) {
  SpectrumResult a;
  a.power = {1.0, 1.0, 1.0, 1.0};
  a.mode_counts = {1, 6, 12, 8};
  a.k_center = {0.5, 1.5, 2.5, 3.5};
  SpectrumResult b = a;
  b.power[3] = 2.0;  // far off, but above the cut
  EXPECT_TRUE(compare_spectra(a, b, 3.0, 0.01).pass);
  EXPECT_FALSE(compare_spectra(a, b, 3.5, 0.01).pass);
  b.power[3] = 1.01;
  EXPECT_TRUE(compare_spectra(a, b, 10.0, 0.0100001).pass);
  // zero tolerance passes only exact agreement
  EXPECT_FALSE(compare_spectra(a, b, 10.0, 0.0).pass);
  EXPECT_TRUE(compare_spectra(a, a, 10.0, 0.0).pass);
}

// White uniform noise at the heuristic bound keeps every checked bin in band.
TEST(ToleranceHeuristic, WhiteNoiseAtBoundPasses) {
  auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {64, 64, 64}), 3);
  const double k_cut = 8.0, tol = 0.01;
  const double sigma = sigma_from_power_tolerance(power_spectrum(f), f.size(), k_cut, tol);
  ASSERT_GT(sigma, 0.0);
  const double eb = eb_budget_from_sigma(sigma, f.size());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-eb, eb);
    std::vector<float> noisy(f.values().begin(), f.values().end());
    for (auto& x : noisy) x = static_cast<float>(x + u(rng));
    auto v = verify_spectrum(f, Field3D("n", f.role(), f.dims(), noisy), k_cut, tol);
    EXPECT_TRUE(v.pass) << "seed " << seed << " worst " << v.worst_deviation;
  }
  EXPECT_LT(sigma_from_power_tolerance(power_spectrum(f), f.size(), k_cut, tol / 4), sigma);
}

TEST(SpectrumCsv, HeaderAndRows) {
  auto f = generate_synthetic(SynthesisSpec::preset("smooth", Role::generic, {16, 16, 16}), 1);
  auto v = verify_spectrum(f, f, 2.0);
  std::ostringstream out;
  write_spectrum_csv(out, v);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k_bin_center,P_orig,P_recon,ratio,mode_count");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, v.bins.size());
}
