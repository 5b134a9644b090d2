// epdiff command line: run | certify | exact-hs | sweep

#include <CLI11.hpp>

#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "epdiff/epdiff.hpp"

namespace {

struct Common {
  std::string config_pos;
  std::string config_opt;
  std::string output;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config_file", c.config_pos, "Scenario config file");
  cmd->add_option("--config", c.config_opt, "Scenario config file");
  cmd->add_option("--output", c.output, "Output file (overrides the config's output key)");
  cmd->add_flag("--quiet", c.quiet, "Suppress the summary on stderr");
}

epdiff::ScenarioConfig load(const Common& c) {
  if (c.config_pos.empty() && c.config_opt.empty()) throw epdiff::ConfigError("no config file given");
  if (!c.config_pos.empty() && !c.config_opt.empty() && c.config_pos != c.config_opt) {
    throw epdiff::ConfigError("config given twice with different paths");
  }
  auto cfg = epdiff::ScenarioConfig::load(c.config_pos.empty() ? c.config_opt : c.config_pos);
  if (!c.output.empty()) cfg.output = c.output;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    epdiff::write_text(path, text);
  }
}

std::string summary(const epdiff::RunOutput& out) {
  std::ostringstream os;
  const auto& r = out.result;
  os << out.config.spec.label() << ": " << epdiff::to_string(r.status) << " at t = " << r.final_state.t
     << " (min rho = " << r.final_state.min_rho() << ", " << r.steps << " steps)";
  if (out.certificate && out.certificate->pass && out.certificate->applicable) {
    os << ", T_bound = " << out.certificate->T_bound;
  }
  if (!std::isnan(r.t_blowup_estimate)) os << ", extrapolated blowup t = " << r.t_blowup_estimate;
  if (!r.diagnostic.empty()) os << "\n  " << r.diagnostic;
  return os.str();
}

int do_run(const Common& c) {
  auto cfg = load(c);
  auto out = epdiff::run_scenario(cfg, false);
  emit(cfg.output, out.text());
  if (!c.quiet) std::cerr << summary(out) << '\n';
  return out.exit_code();
}

int do_certify(const Common& c) {
  const auto cfg = load(c);
  emit(cfg.output, epdiff::certify_scenario(cfg));
  return 0;
}

int do_exact_hs(const Common& c) {
  const auto cfg = load(c);
  emit(cfg.output, epdiff::exact_hs_table(cfg));
  return 0;
}

std::vector<std::string> split_values(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string v;
    while (std::getline(ss, v, ',')) {
      if (!v.empty()) out.push_back(v);
    }
  }
  return out;
}

int do_sweep(const Common& c, const std::string& key, const std::vector<std::string>& raw) {
  const auto base = load(c);
  const auto values = split_values(raw);
  if (values.empty()) throw epdiff::ConfigError("--values is empty");
  std::vector<epdiff::ScenarioConfig> cfgs;
  for (const auto& v : values) {
    auto cfg = base.with(key, v);
    cfg.output = epdiff::sweep_output_path(base.output, key, v);
    cfgs.push_back(cfg);
  }
  std::vector<std::future<epdiff::RunOutput>> jobs;
  for (const auto& cfg : cfgs) {
    jobs.push_back(std::async(std::launch::async, [cfg] { return epdiff::run_scenario(cfg, true); }));
  }
  int code = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      const auto out = jobs[i].get();
      code = std::max(code, out.exit_code());
      if (!c.quiet) std::cerr << key << " = " << values[i] << " -> " << cfgs[i].output << ": " << summary(out) << '\n';
    } catch (const std::exception& e) {
      std::cerr << "error (" << key << " = " << values[i] << "): " << e.what() << '\n';
      code = 1;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial EPDiff Lagrangian solver"};
  app.set_version_flag("--version", std::string(EPDIFF_VERSION));
  app.require_subcommand(1);

  Common run_c, cert_c, hs_c, sweep_c;
  auto* run = app.add_subcommand("run", "Integrate a scenario and write the trajectory CSV");
  add_common(run, run_c);
  auto* cert = app.add_subcommand("certify", "Write the blowup certificate only");
  add_common(cert, cert_c);
  auto* hs = app.add_subcommand("exact-hs", "Write the exact Hunter-Saxton table");
  add_common(hs, hs_c);
  auto* sweep = app.add_subcommand("sweep", "Run one scenario per value of a config key, in parallel");
  add_common(sweep, sweep_c);
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "Config key to vary")->required();
  sweep->add_option("--values", values, "Comma separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return do_run(run_c);
    if (*cert) return do_certify(cert_c);
    if (*hs) return do_exact_hs(hs_c);
    if (*sweep) return do_sweep(sweep_c, param, values);
  } catch (const epdiff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
