#include "adeb/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "adeb/error.hpp"

namespace adeb {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ArgumentError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ArgumentError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double PipelineConfig::k_cut_for(const Dims3& d) const {
  if (k_cut) return *k_cut;
  return static_cast<double>(std::min({d.nx, d.ny, d.nz})) / 8.0;
}

Strategy PipelineConfig::strategy_for(Role r) const {
  if (strategy) return *strategy;
  return r == Role::baryon_density ? Strategy::combined : Strategy::fft;
}

void PipelineConfig::validate() const {
  if (eb_avg && target_sigma) throw ArgumentError("give either eb_avg or target_sigma, not both");
  if (eb_avg && !(*eb_avg > 0.0)) throw ArgumentError("eb_avg must be positive");
  if (target_sigma && !(*target_sigma > 0.0)) throw ArgumentError("target_sigma must be positive");
  if (mass_fault_budget && !(*mass_fault_budget > 0.0)) throw ArgumentError("mass_fault_budget must be positive");
  // tol = 0 is accepted: it demands a lossless spectrum and so forces the
  // verification-failure path for any lossy plan.
  if (!(tol >= 0.0)) throw ArgumentError("tol must be non-negative");
  if (!(budget_margin > 0.0 && budget_margin <= 1.0)) throw ArgumentError("budget_margin must be in (0, 1]");
  if (!(t_boundary > 0.0)) throw ArgumentError("t_boundary must be positive");
  if (t_halo && !(*t_halo >= t_boundary)) throw ArgumentError("t_halo must be at least t_boundary");
  if (k_cut && !(*k_cut > 0.0)) throw ArgumentError("k_cut must be positive");
  if (block_dims.cells() == 0) throw ArgumentError("block dims must be positive");
  if (calibration_stride == 0) throw ArgumentError("calibration_stride must be >= 1");
  if (calibration_points < 3) throw ArgumentError("calibration_points must be >= 3");
  if (snapshots == 0) throw ArgumentError("snapshots must be >= 1");
  if (threads == 0) throw ArgumentError("threads must be >= 1");
  if (probe > 1) throw ArgumentError("probe must be 0 or 1");
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("config line " + std::to_string(lineno) + " has an empty key");
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(PipelineConfig& cfg, const ConfigMap& entries) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto opt = [](std::optional<double>& slot) {
    return Setter([&slot](const std::string& k, const std::string& v) {
      if (v.empty() || v == "auto") slot.reset(); else slot = to_double(k, v);
    });
  };
  const std::map<std::string, Setter> setters = {
      {"field", [&](auto&, auto& v) { cfg.field_path = v; }},
      {"role", [&](auto&, auto& v) { cfg.role = role_from_string(v); }},
      {"preset", [&](auto&, auto& v) { cfg.preset = v; }},
      {"dims", [&](auto&, auto& v) { cfg.dims = parse_dims(v); }},
      {"seed", [&](auto& k, auto& v) { cfg.seed = to_uint(k, v); }},
      {"snapshots", [&](auto& k, auto& v) { cfg.snapshots = to_uint(k, v); }},
      {"snapshot_paths",
       [&](auto&, auto& v) {
         cfg.snapshot_paths.clear();
         std::istringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (!item.empty()) cfg.snapshot_paths.emplace_back(item);
         }
       }},
      {"block", [&](auto&, auto& v) { cfg.block_dims = parse_dims(v); }},
      {"t_boundary", [&](auto& k, auto& v) { cfg.t_boundary = to_double(k, v); }},
      {"t_halo", opt(cfg.t_halo)},
      {"eb_avg", opt(cfg.eb_avg)},
      {"target_sigma", opt(cfg.target_sigma)},
      {"mass_fault_budget", opt(cfg.mass_fault_budget)},
      {"k_cut", opt(cfg.k_cut)},
      {"tol", [&](auto& k, auto& v) { cfg.tol = to_double(k, v); }},
      {"budget_margin", [&](auto& k, auto& v) { cfg.budget_margin = to_double(k, v); }},
      {"strategy",
       [&](auto&, auto& v) {
         if (v.empty() || v == "auto") cfg.strategy.reset(); else cfg.strategy = strategy_from_string(v);
       }},
      {"rate_model", [&](auto&, auto& v) { cfg.rate_model_path = v; }},
      {"calibration_stride", [&](auto& k, auto& v) { cfg.calibration_stride = to_uint(k, v); }},
      {"calibration_points", [&](auto& k, auto& v) { cfg.calibration_points = to_uint(k, v); }},
      {"probe", [&](auto& k, auto& v) { cfg.probe = to_uint(k, v); }},
      {"output", [&](auto&, auto& v) { cfg.output_dir = v; }},
      {"threads", [&](auto& k, auto& v) { cfg.threads = static_cast<unsigned>(to_uint(k, v)); }},
  };
  for (const auto& [key, value] : entries) {
    auto normalized = key;
    std::replace(normalized.begin(), normalized.end(), '-', '_');
    const auto it = setters.find(normalized);
    if (it == setters.end()) throw ArgumentError("unknown config key '" + key + "'");
    it->second(normalized, value);
  }
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigMap& overrides) {
  PipelineConfig cfg;
  if (file) apply_config(cfg, read_config_file(*file));
  apply_config(cfg, overrides);
  cfg.validate();
  return cfg;
}

std::string to_config_text(const PipelineConfig& cfg) {
  std::ostringstream os;
  auto line = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto optline = [&](const char* k, const std::optional<double>& v) { line(k, v ? fmt(*v) : "auto"); };
  line("field", cfg.field_path.string());
  line("role", std::string(to_string(cfg.role)));
  line("preset", cfg.preset);
  line("dims", to_string(cfg.dims));
  line("seed", std::to_string(cfg.seed));
  line("snapshots", std::to_string(cfg.snapshots));
  std::string paths;
  for (const auto& p : cfg.snapshot_paths) paths += (paths.empty() ? "" : ",") + p.string();
  line("snapshot_paths", paths);
  line("block", to_string(cfg.block_dims));
  line("t_boundary", fmt(cfg.t_boundary));
  optline("t_halo", cfg.t_halo);
  optline("eb_avg", cfg.eb_avg);
  optline("target_sigma", cfg.target_sigma);
  optline("mass_fault_budget", cfg.mass_fault_budget);
  optline("k_cut", cfg.k_cut);
  line("tol", fmt(cfg.tol));
  line("budget_margin", fmt(cfg.budget_margin));
  line("strategy", cfg.strategy ? std::string(to_string(*cfg.strategy)) : "auto");
  line("rate_model", cfg.rate_model_path.string());
  line("calibration_stride", std::to_string(cfg.calibration_stride));
  line("calibration_points", std::to_string(cfg.calibration_points));
  line("probe", std::to_string(cfg.probe));
  line("output", cfg.output_dir.string());
  line("threads", std::to_string(cfg.threads));
  return os.str();
}

}  // namespace adeb
