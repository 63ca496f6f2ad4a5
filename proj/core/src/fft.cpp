#include "adeb/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "adeb/error.hpp"

namespace adeb {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void run_c2c(ComplexGrid& grid, int sign) {
  static_assert(sizeof(Complex) == sizeof(fftw_complex));
  auto* buf = reinterpret_cast<fftw_complex*>(grid.data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_3d(static_cast<int>(grid.dims.nx), static_cast<int>(grid.dims.ny),
                            static_cast<int>(grid.dims.nz), buf, buf, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw Error("FFTW failed to create a plan for dims " + to_string(grid.dims));
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

ComplexGrid dft3_forward(std::span<const double> values, const Dims3& dims) {
  if (values.size() != dims.cells()) throw ArgumentError("value count does not match dims");
  ComplexGrid grid{dims, std::vector<Complex>(values.begin(), values.end())};
  run_c2c(grid, FFTW_FORWARD);
  return grid;
}

void dft3_inverse_inplace(ComplexGrid& grid) { run_c2c(grid, FFTW_BACKWARD); }

ComplexGrid fft3(std::span<const double> values, const Dims3& dims) {
  if (!is_power_of_two(dims.nx) || !is_power_of_two(dims.ny) || !is_power_of_two(dims.nz)) {
    throw ArgumentError("fft3 requires power-of-two dims, got " + to_string(dims));
  }
  return dft3_forward(values, dims);
}

ComplexGrid fft3(const Field3D& field) {
  const auto v = field.values();
  std::vector<double> values(v.begin(), v.end());
  return fft3(values, field.dims());
}

}  // namespace adeb
