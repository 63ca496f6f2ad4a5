#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adeb {

enum class Role : std::uint8_t {
  generic = 0,
  baryon_density,
  dark_matter_density,
  temperature,
  velocity_x,
  velocity_y,
  velocity_z,
};

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);
bool is_density(Role role);
bool is_velocity(Role role);

// Declared physical value range of a role (generic is unbounded).
std::pair<double, double> default_range(Role role);

struct Dims3 {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t cells() const { return nx * ny * nz; }
  std::size_t operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  // Row-major: z varies fastest.
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return (x * ny + y) * nz + z; }
  std::array<std::size_t, 3> coords(std::size_t linear) const {
    return {linear / (ny * nz), (linear / nz) % ny, linear % nz};
  }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

std::string to_string(const Dims3& dims);
// Parses "X,Y,Z" (or a single "N" meaning N,N,N).
Dims3 parse_dims(std::string_view text);

class Field3D {
 public:
  Field3D() = default;
  Field3D(std::string name, Role role, Dims3 dims, std::vector<float> values,
          std::pair<double, double> value_range);
  // Range defaults to the role's declared range.
  Field3D(std::string name, Role role, Dims3 dims, std::vector<float> values);

  const std::string& name() const { return name_; }
  Role role() const { return role_; }
  const Dims3& dims() const { return dims_; }
  std::span<const float> values() const { return values_; }
  std::pair<double, double> value_range() const { return range_; }
  std::size_t size() const { return values_.size(); }

  float at(std::size_t x, std::size_t y, std::size_t z) const { return values_[dims_.index(x, y, z)]; }

  // Number of finite values outside the declared range.
  std::size_t count_out_of_range() const;

 private:
  std::string name_;
  Role role_ = Role::generic;
  Dims3 dims_;
  std::vector<float> values_;
  std::pair<double, double> range_{};
};

struct LoadDiagnostics {
  std::size_t out_of_range = 0;
};

// Raw container: "F3D1", dtype byte (0 = f32), 3 x u32 LE dims, LE f32 payload.
Field3D load_field(const std::filesystem::path& path, Role expected_role,
                   LoadDiagnostics* diagnostics = nullptr);
void save_field(const Field3D& field, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_field(const Field3D& field);
Field3D decode_field(std::span<const std::uint8_t> bytes, Role role, std::string name,
                     LoadDiagnostics* diagnostics = nullptr);

}  // namespace adeb
