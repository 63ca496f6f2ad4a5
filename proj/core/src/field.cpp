#include "adeb/field.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "adeb/bytes.hpp"
#include "adeb/error.hpp"

namespace adeb {

namespace {

constexpr std::array<char, 4> kFieldMagic{'F', '3', 'D', '1'};
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::size_t kHeaderBytes = 4 + 1 + 3 * 4;

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::generic: return "generic";
    case Role::baryon_density: return "baryon_density";
    case Role::dark_matter_density: return "dark_matter_density";
    case Role::temperature: return "temperature";
    case Role::velocity_x: return "velocity_x";
    case Role::velocity_y: return "velocity_y";
    case Role::velocity_z: return "velocity_z";
  }
  return "generic";
}

Role role_from_string(std::string_view name) {
  for (auto role : {Role::generic, Role::baryon_density, Role::dark_matter_density, Role::temperature,
                    Role::velocity_x, Role::velocity_y, Role::velocity_z}) {
    if (to_string(role) == name) return role;
  }
  throw ArgumentError("unknown field role '" + std::string(name) + "'");
}

bool is_density(Role role) { return role == Role::baryon_density || role == Role::dark_matter_density; }

bool is_velocity(Role role) {
  return role == Role::velocity_x || role == Role::velocity_y || role == Role::velocity_z;
}

std::pair<double, double> default_range(Role role) {
  switch (role) {
    case Role::baryon_density: return {0.0, 1e5};
    case Role::dark_matter_density: return {0.0, 1e4};
    case Role::temperature: return {1e2, 1e7};
    case Role::velocity_x:
    case Role::velocity_y:
    case Role::velocity_z: return {-1e8, 1e8};
    case Role::generic: break;
  }
  const double big = std::numeric_limits<float>::max();
  return {-big, big};
}

std::string to_string(const Dims3& dims) {
  std::ostringstream os;
  os << dims.nx << ',' << dims.ny << ',' << dims.nz;
  return os.str();
}

Dims3 parse_dims(std::string_view text) {
  std::vector<long long> parts;
  std::string token;
  std::istringstream is{std::string(text)};
  while (std::getline(is, token, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoll(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ArgumentError("bad dimension list '" + std::string(text) + "'");
    }
  }
  if (parts.size() == 1) parts = {parts[0], parts[0], parts[0]};
  if (parts.size() != 3) throw ArgumentError("expected X,Y,Z dimensions, got '" + std::string(text) + "'");
  for (auto p : parts) {
    if (p <= 0) throw ArgumentError("dimensions must be positive: '" + std::string(text) + "'");
  }
  return {static_cast<std::size_t>(parts[0]), static_cast<std::size_t>(parts[1]),
          static_cast<std::size_t>(parts[2])};
}

Field3D::Field3D(std::string name, Role role, Dims3 dims, std::vector<float> values,
                 std::pair<double, double> value_range)
    : name_(std::move(name)), role_(role), dims_(dims), values_(std::move(values)), range_(value_range) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) throw ArgumentError("field dims must be positive");
  if (values_.size() != dims_.cells()) {
    throw ArgumentError("field '" + name_ + "' has " + std::to_string(values_.size()) + " values for dims " +
                        to_string(dims_));
  }
  if (!(range_.first <= range_.second)) throw ArgumentError("field value range must satisfy lo <= hi");
}

Field3D::Field3D(std::string name, Role role, Dims3 dims, std::vector<float> values)
    : Field3D(std::move(name), role, dims, std::move(values), default_range(role)) {}

std::size_t Field3D::count_out_of_range() const {
  std::size_t n = 0;
  for (float v : values_) {
    if (std::isfinite(v) && (v < range_.first || v > range_.second)) ++n;
  }
  return n;
}

std::vector<std::uint8_t> encode_field(const Field3D& field) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + field.size() * sizeof(float));
  for (char c : kFieldMagic) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kDtypeF32);
  for (int axis = 0; axis < 3; ++axis) bytes::put(out, static_cast<std::uint32_t>(field.dims()[axis]));
  const auto values = field.values();
  const auto* raw = reinterpret_cast<const std::uint8_t*>(values.data());
  out.insert(out.end(), raw, raw + values.size_bytes());
  return out;
}

Field3D decode_field(std::span<const std::uint8_t> data, Role role, std::string name,
                     LoadDiagnostics* diagnostics) {
  bytes::Reader<LengthError> reader(data);
  if (data.size() < 4 || !std::equal(kFieldMagic.begin(), kFieldMagic.end(), data.begin())) {
    throw FormatError("bad field magic (expected F3D1)");
  }
  reader.take(4);
  const auto dtype = reader.get<std::uint8_t>();
  if (dtype != kDtypeF32) throw FormatError("unsupported dtype code " + std::to_string(dtype));
  Dims3 dims{reader.get<std::uint32_t>(), reader.get<std::uint32_t>(), reader.get<std::uint32_t>()};
  if (dims.cells() == 0) throw FormatError("field header declares an empty grid");
  const std::size_t want = dims.cells() * sizeof(float);
  if (reader.remaining() < want) {
    throw LengthError("payload holds " + std::to_string(reader.remaining() / sizeof(float)) + " values, dims " +
                      to_string(dims) + " need " + std::to_string(dims.cells()));
  }
  if (reader.remaining() > want) throw LengthError("trailing bytes after field payload");
  std::vector<float> values(dims.cells());
  std::memcpy(values.data(), data.data() + reader.position(), want);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw FormatError("non-finite value at cell index " + std::to_string(i));
    }
  }
  Field3D field(std::move(name), role, dims, std::move(values));
  if (diagnostics) diagnostics->out_of_range = field.count_out_of_range();
  return field;
}

Field3D load_field(const std::filesystem::path& path, Role expected_role, LoadDiagnostics* diagnostics) {
  const auto data = bytes::read_file(path.string());
  try {
    return decode_field(data, expected_role, path.stem().string(), diagnostics);
  } catch (const LengthError& e) {
    throw LengthError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_field(const Field3D& field, const std::filesystem::path& path) {
  bytes::write_file(path.string(), encode_field(field));
}

}  // namespace adeb
