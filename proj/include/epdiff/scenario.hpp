#pragma once

// Scenario configuration, the built-in initial data families, and the run
// driver that writes one '#'-prefixed metadata block followed by CSV rows.
//
// Config files are flat "key = value" lines; '#' starts a comment.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epdiff/certifier.hpp"
#include "epdiff/grid.hpp"
#include "epdiff/hunter_saxton.hpp"
#include "epdiff/kernel.hpp"
#include "epdiff/solver.hpp"

#ifndef EPDIFF_VERSION
#define EPDIFF_VERSION "0.0.0"
#endif

namespace epdiff {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { neg_bump, neg_poly_bump, hs_mixed_sign };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::neg_bump: return "neg_bump";
    case Family::neg_poly_bump: return "neg_poly_bump";
    case Family::hs_mixed_sign: return "hs_mixed_sign";
  }
  return "unknown";
}

inline Family parse_family(const std::string& s) {
  if (s == "neg_bump") return Family::neg_bump;
  if (s == "neg_poly_bump") return Family::neg_poly_bump;
  if (s == "hs_mixed_sign") return Family::hs_mixed_sign;
  throw ConfigError("unknown family '" + s + "' (expected neg_bump, neg_poly_bump or hs_mixed_sign)");
}

struct DataParams {
  Family family = Family::neg_bump;
  double amplitude = 1.0;
  double r_lo = 1.0;
  double r_hi = 3.0;
  double mix = 1.0;           // hs_mixed_sign: weight of the negative outer lobe
  double perturbation = 0.0;  // relative size of the seeded smooth modulation
  std::uint64_t seed = 0;

  bool operator==(const DataParams&) const = default;
};

struct ScenarioConfig {
  KernelSpec spec{0, 1, 3};
  std::size_t nodes = 1024;
  double r_max = 10.0;
  bool graded = false;
  double grading = 1.0;
  DataParams data;
  double dt = 1e-3;
  std::optional<double> horizon;  // empty: 1.05 T_bound from the certificate
  double epsilon = 0.05;
  std::size_t record_every = 1;
  std::string output;

  bool operator==(const ScenarioConfig&) const = default;

  void validate() const;
  RadialGrid grid() const { return graded ? RadialGrid::graded(nodes, r_max, grading) : RadialGrid::uniform(nodes, r_max); }

  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig load(const std::string& path);
  std::string serialize() const;
  /// Replaces one key, as the sweep verb does.
  ScenarioConfig with(const std::string& key, const std::string& value) const;
};

namespace scenario_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
  }
  return out;
}

template <class I>
inline I to_integer(const std::string& key, const std::string& v) {
  I out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

inline void apply(ScenarioConfig& c, const std::string& key, const std::string& v) {
  if (key == "sigma") c.spec.sigma = to_integer<int>(key, v);
  else if (key == "k") c.spec.k = to_integer<int>(key, v);
  else if (key == "n") c.spec.n = to_integer<int>(key, v);
  else if (key == "nodes") c.nodes = to_integer<std::size_t>(key, v);
  else if (key == "r_max") c.r_max = to_double(key, v);
  else if (key == "spacing") {
    if (v == "uniform") c.graded = false;
    else if (v == "graded") c.graded = true;
    else throw ConfigError("key 'spacing': expected uniform or graded, got '" + v + "'");
  } else if (key == "grading") c.grading = to_double(key, v);
  else if (key == "family") c.data.family = parse_family(v);
  else if (key == "amplitude") c.data.amplitude = to_double(key, v);
  else if (key == "r_lo") c.data.r_lo = to_double(key, v);
  else if (key == "r_hi") c.data.r_hi = to_double(key, v);
  else if (key == "mix") c.data.mix = to_double(key, v);
  else if (key == "perturbation") c.data.perturbation = to_double(key, v);
  else if (key == "seed") c.data.seed = to_integer<std::uint64_t>(key, v);
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "horizon") {
    if (v == "auto") c.horizon.reset();
    else c.horizon = to_double(key, v);
  } else if (key == "epsilon") c.epsilon = to_double(key, v);
  else if (key == "record_every") c.record_every = to_integer<std::size_t>(key, v);
  else if (key == "output") c.output = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace scenario_detail

inline void ScenarioConfig::validate() const {
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (nodes < 128) throw ConfigError("nodes must be >= 128, got " + std::to_string(nodes));
  if (!(r_max > 0.0)) throw ConfigError("r_max must be > 0");
  if (spec.sigma == 1 && r_max > 600.0) throw ConfigError("r_max must be <= 600 for sigma = 1");
  if (graded && !(grading >= 1.0 && grading <= 2.0)) throw ConfigError("grading must lie in [1, 2]");
  if (!(data.amplitude >= 0.0)) throw ConfigError("amplitude must be >= 0");
  if (!(data.r_lo >= 0.0 && data.r_lo < data.r_hi)) throw ConfigError("need 0 <= r_lo < r_hi");
  if (data.r_hi > 0.6 * r_max) {
    throw ConfigError("r_hi = " + scenario_detail::fmt(data.r_hi) + " exceeds 0.6 r_max = " +
                      scenario_detail::fmt(0.6 * r_max) + "; raise r_max or shrink the support");
  }
  if (!(data.mix >= 0.0)) throw ConfigError("mix must be >= 0");
  if (!(data.perturbation >= 0.0 && data.perturbation < 1.0)) throw ConfigError("perturbation must lie in [0, 1)");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (horizon && !(*horizon > 0.0)) throw ConfigError("horizon must be > 0 or 'auto'");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
}

inline ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, int> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = scenario_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    }
    const auto key = scenario_detail::trim(line.substr(0, eq));
    const auto value = scenario_detail::trim(line.substr(eq + 1));
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    scenario_detail::apply(c, key, value);
  }
  c.validate();
  return c;
}

inline ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

inline std::string ScenarioConfig::serialize() const {
  using scenario_detail::fmt;
  std::ostringstream os;
  os << "sigma = " << spec.sigma << '\n'
     << "k = " << spec.k << '\n'
     << "n = " << spec.n << '\n'
     << "nodes = " << nodes << '\n'
     << "r_max = " << fmt(r_max) << '\n'
     << "spacing = " << (graded ? "graded" : "uniform") << '\n'
     << "grading = " << fmt(grading) << '\n'
     << "family = " << to_string(data.family) << '\n'
     << "amplitude = " << fmt(data.amplitude) << '\n'
     << "r_lo = " << fmt(data.r_lo) << '\n'
     << "r_hi = " << fmt(data.r_hi) << '\n'
     << "mix = " << fmt(data.mix) << '\n'
     << "perturbation = " << fmt(data.perturbation) << '\n'
     << "seed = " << data.seed << '\n'
     << "dt = " << fmt(dt) << '\n'
     << "horizon = " << (horizon ? fmt(*horizon) : std::string("auto")) << '\n'
     << "epsilon = " << fmt(epsilon) << '\n'
     << "record_every = " << record_every << '\n';
  if (!output.empty()) os << "output = " << output << '\n';
  return os.str();
}

inline ScenarioConfig ScenarioConfig::with(const std::string& key, const std::string& value) const {
  ScenarioConfig c = *this;
  scenario_detail::apply(c, key, value);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Initial data

/// Smooth compactly supported bump on [lo, hi] with peak value 1.
inline double smooth_bump(double r, double lo, double hi) {
  const double x = (2.0 * r - lo - hi) / (hi - lo);
  return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

/// (r - lo)^3 (hi - r)^3 scaled to peak 1.
inline double poly_bump(double r, double lo, double hi) {
  if (r <= lo || r >= hi) return 0.0;
  const double half = 0.5 * (hi - lo);
  return std::pow((r - lo) * (hi - r) / (half * half), 3);
}

inline std::vector<double> builtin_omega(const DataParams& p, const RadialGrid& grid) {
  std::vector<double> w(grid.size(), 0.0);
  const double mid = 0.5 * (p.r_lo + p.r_hi);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = grid[i];
    switch (p.family) {
      case Family::neg_bump: w[i] = -p.amplitude * smooth_bump(r, p.r_lo, p.r_hi); break;
      case Family::neg_poly_bump: w[i] = -p.amplitude * poly_bump(r, p.r_lo, p.r_hi); break;
      case Family::hs_mixed_sign:
        w[i] = p.amplitude * (smooth_bump(r, p.r_lo, mid) - p.mix * smooth_bump(r, mid, p.r_hi));
        break;
    }
  }
  if (p.perturbation > 0.0) {
    // 1 + eps * sum_m c_m sin(m pi x), |sum| <= 1, keeps the sign of omega0
    std::mt19937_64 rng(p.seed);
    constexpr int kModes = 4;
    double c[kModes];
    for (double& v : c) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double x = (grid[i] - p.r_lo) / (p.r_hi - p.r_lo);
      double s = 0.0;
      for (int m = 0; m < kModes; ++m) s += c[m] * std::sin((m + 1) * M_PI * x) / kModes;
      w[i] *= 1.0 + p.perturbation * s;
    }
  }
  return w;
}

inline InitialData builtin_initial_data(const DataParams& p, const RadialGrid& grid, int n) {
  return InitialData::from_omega(grid, n, builtin_omega(p, grid));
}

// ---------------------------------------------------------------------------
// Runs

struct RunOutput {
  ScenarioConfig config;
  std::optional<BlowupCertificate> certificate;
  RunResult result;
  double horizon = 0.0;
  std::string header;  // '#' block
  std::string body;    // CSV header + rows

  std::string text() const { return header + body; }
  int exit_code() const { return result.status == RunStatus::guard_tripped ? 2 : 0; }
};

inline constexpr const char* kCsvColumns = "t,min_rho,argmin_rho_r,energy,margin,status";
inline constexpr const char* kCsvUnits =
    "t: time; min_rho: dimensionless; argmin_rho_r: length; energy: energy; margin: dimensionless (q~ - q)";

inline std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Prefix of the config echo lines in output headers.
inline constexpr const char* kEchoPrefix = "# config: ";

inline std::string config_echo(const ScenarioConfig& c) {
  std::istringstream in(c.serialize());
  std::ostringstream os;
  std::string line;
  while (std::getline(in, line)) os << kEchoPrefix << line << '\n';
  return os.str();
}

/// Recovers the config from the echo lines of an output file.
inline ScenarioConfig config_from_output(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream cfg;
  std::string line;
  const std::string prefix = kEchoPrefix;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) cfg << line.substr(prefix.size()) << '\n';
  }
  return ScenarioConfig::parse(cfg.str());
}

inline std::string csv_body(const TrajectoryRecord& rec, RunStatus status) {
  using scenario_detail::fmt;
  std::ostringstream os;
  os << kCsvColumns << '\n';
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const auto& r = rec.rows[i];
    os << fmt(r.t) << ',' << fmt(r.min_rho) << ',' << fmt(r.argmin_rho_r) << ',' << fmt(r.energy) << ','
       << (std::isnan(r.margin) ? std::string("nan") : fmt(r.margin)) << ','
       << (i + 1 == rec.rows.size() ? to_string(status) : "running") << '\n';
  }
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

/// Builds grid and data, certifies when omega0 <= 0, runs the solver with the
/// dominance margin attached, and writes `config.output` when it is set.
inline RunOutput run_scenario(const ScenarioConfig& config, bool write = true) {
  using scenario_detail::fmt;
  config.validate();
  RunOutput out;
  out.config = config;
  const RadialGrid grid = config.grid();
  const auto omega = builtin_omega(config.data, grid);
  InitialData init = InitialData::from_omega(grid, config.spec.n, omega);

  if (init.all_nonpositive) out.certificate = certify(config.spec, grid, omega);
  const BlowupCertificate* cert =
      (out.certificate && out.certificate->applicable && out.certificate->pass) ? &*out.certificate : nullptr;

  if (config.horizon) {
    out.horizon = *config.horizon;
  } else if (cert) {
    out.horizon = 1.05 * cert->T_bound;
  } else {
    throw ConfigError("horizon = auto needs a passing blowup certificate (omega0 <= 0, not identically zero)");
  }

  LagrangianSolver solver(config.spec, grid, std::move(init));
  RunOptions opt;
  opt.dt = config.dt;
  opt.horizon = out.horizon;
  opt.epsilon = config.epsilon;
  opt.record_every = config.record_every;
  if (cert) opt.margin = [cert](const FlowState& s) { return dominance_margin(*cert, s); };
  out.result = solver.run(opt);

  std::ostringstream h;
  h << "# epdiff run\n"
    << "# version: " << EPDIFF_VERSION << '\n'
    << "# timestamp: " << timestamp_utc() << '\n'
    << config_echo(config);
  if (out.certificate) h << out.certificate->to_text("# ");
  const auto& res = out.result;
  h << "# result.status: " << to_string(res.status) << '\n'
    << "# result.horizon: " << fmt(out.horizon) << '\n'
    << "# result.t_end: " << fmt(res.final_state.t) << '\n'
    << "# result.t_blowup_estimate: " << fmt(res.t_blowup_estimate) << '\n'
    << "# result.steps: " << res.steps << '\n'
    << "# result.rejected_steps: " << res.rejected << '\n';
  if (cert) {
    const auto dom = check_dominance(res.trajectory);
    h << "# result.dominance_pass: " << (dom.pass ? "true" : "false") << '\n'
      << "# result.dominance_worst_margin: " << fmt(dom.worst_margin) << '\n';
  }
  if (!res.diagnostic.empty()) h << "# result.diagnostic: " << res.diagnostic << '\n';
  h << "# units: " << kCsvUnits << '\n';
  out.header = h.str();
  out.body = csv_body(res.trajectory, res.status);
  if (write && !config.output.empty()) write_text(config.output, out.text());
  return out;
}

/// Certificate report for the config's kernel and data.
inline std::string certify_scenario(const ScenarioConfig& config) {
  config.validate();
  const RadialGrid grid = config.grid();
  const auto omega = builtin_omega(config.data, grid);
  std::ostringstream os;
  os << "# epdiff certificate\n# version: " << EPDIFF_VERSION << '\n' << config_echo(config);
  os << certify(config.spec, grid, omega).to_text();
  return os.str();
}

/// Exact radial Hunter-Saxton table (uses n from the config; sigma and k are
/// ignored). Eleven equally spaced times up to min(horizon, T*), at most
/// about 200 radial rows per time.
inline std::string exact_hs_table(const ScenarioConfig& config) {
  using scenario_detail::fmt;
  config.validate();
  const RadialGrid grid = config.grid();
  const auto omega = builtin_omega(config.data, grid);
  const HSExactSolution hs(grid, config.spec.n, omega);
  const double T = hs.breakdown_time();
  double t_end = config.horizon ? *config.horizon : (std::isfinite(T) ? T : 1.0);
  if (std::isfinite(T)) t_end = std::min(t_end, T);
  std::ostringstream os;
  os << "# epdiff exact-hs\n# version: " << EPDIFF_VERSION << '\n'
     << config_echo(config) << "# hs.n: " << config.spec.n << '\n'
     << "# hs.breakdown_time: " << fmt(T) << '\n'
     << "# hs.breakdown_radius: " << fmt(std::isfinite(T) ? hs.breakdown_radius() : std::nan("")) << '\n'
     << "t,r,gamma,rho,q\n";
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 200);
  for (int j = 0; j <= 10; ++j) {
    const double t = t_end * j / 10.0;
    const auto f = hs.flow(t);
    const auto q = hs.q(t);
    for (std::size_t i = 0; i < grid.size(); i += stride) {
      os << fmt(t) << ',' << fmt(grid[i]) << ',' << fmt(f.gamma[i]) << ',' << fmt(f.rho[i]) << ',' << fmt(q[i])
         << '\n';
    }
  }
  return os.str();
}

/// "runs/out.csv" + ("dt", "1e-3") -> "runs/out_dt-1e-3.csv".
inline std::string sweep_output_path(const std::string& base, const std::string& key, const std::string& value) {
  const std::string stem_base = base.empty() ? std::string("sweep.csv") : base;
  const auto slash = stem_base.find_last_of('/');
  const auto dot = stem_base.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? stem_base.substr(0, dot) : stem_base;
  const std::string ext = has_ext ? stem_base.substr(dot) : std::string();
  return stem + "_" + key + "-" + value + ext;
}

}  // namespace epdiff
