#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "covband/runio.hpp"

namespace {

struct RawOptions {
  std::string cutoff = "1";
  std::string omega_grid;
  std::string r_grid;
  std::string threads = "1";
  std::string config_path;
  covband::RunConfig cfg;
};

void add_common(CLI::App* sub, RawOptions& raw) {
  sub->add_option("--cutoff", raw.cutoff, "UV cutoff Lambda in 1/tau; 'inf' allowed");
  sub->add_option("--omega", raw.cfg.omega, "detector gap Omega in 1/tau");
  sub->add_option("--omega-grid", raw.omega_grid, "Omega grid a:b:n[:log]");
  sub->add_option("--r-grid", raw.r_grid, "separation grid a:b:n[:log]");
  sub->add_option("--t", raw.cfg.t, "time separation in tau");
  sub->add_option("--sigma", raw.cfg.sigma, "smearing width in tau");
  sub->add_option("--tau", raw.cfg.tau, "switching width (fixed internal unit)");
  sub->add_option("--sep", raw.cfg.sep, "detector center separation d");
  sub->add_option("--out", raw.cfg.out_path, "CSV output path");
  sub->add_option("--json", raw.cfg.json_path, "JSON output path");
  sub->add_option("--cache-dir", raw.cfg.cache_dir, "per-row result cache directory");
  sub->add_option("--threads", raw.threads, "worker threads, N or 'auto'");
  sub->add_option("--seed", raw.cfg.seed, "RNG seed for MC validation");
  sub->add_option("--config", raw.config_path,
                  "flat 'key = value' config file; flags override");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// flat key = value lines, '#' comments; keys are the long flag names without
// the leading dashes; values already given as flags win
void apply_config_file(CLI::App* sub, RawOptions& raw) {
  std::ifstream in(raw.config_path);
  if (!in) throw std::invalid_argument("cannot read config file '" + raw.config_path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto overridden = [&](const std::string& flag) {
    return sub->count(flag) > 0;
  };
  for (const auto& [key, value] : kv) {
    if (key == "cutoff") {
      if (!overridden("--cutoff")) raw.cutoff = value;
    } else if (key == "omega") {
      if (!overridden("--omega")) raw.cfg.omega = std::stod(value);
    } else if (key == "omega-grid") {
      if (!overridden("--omega-grid")) raw.omega_grid = value;
    } else if (key == "r-grid") {
      if (!overridden("--r-grid")) raw.r_grid = value;
    } else if (key == "t") {
      if (!overridden("--t")) raw.cfg.t = std::stod(value);
    } else if (key == "sigma") {
      if (!overridden("--sigma")) raw.cfg.sigma = std::stod(value);
    } else if (key == "tau") {
      if (!overridden("--tau")) raw.cfg.tau = std::stod(value);
    } else if (key == "sep") {
      if (!overridden("--sep")) raw.cfg.sep = std::stod(value);
    } else if (key == "out") {
      if (!overridden("--out")) raw.cfg.out_path = value;
    } else if (key == "json") {
      if (!overridden("--json")) raw.cfg.json_path = value;
    } else if (key == "cache-dir") {
      if (!overridden("--cache-dir")) raw.cfg.cache_dir = value;
    } else if (key == "threads") {
      if (!overridden("--threads")) raw.threads = value;
    } else if (key == "seed") {
      if (!overridden("--seed")) raw.cfg.seed = std::stoull(value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"observables of a massless scalar field under a covariant UV cutoff"};
  app.require_subcommand(1);

  RawOptions raw;
  for (const char* name : {"acausal", "decay", "signal", "negativity",
                           "boundary", "range-diff", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, raw);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    raw.cfg.command = sub->get_name();
    if (!raw.config_path.empty()) apply_config_file(sub, raw);
    raw.cfg.cutoff = covband::parse_cutoff(raw.cutoff);
    if (!raw.omega_grid.empty())
      raw.cfg.omega_grid = covband::parse_grid(raw.omega_grid);
    if (!raw.r_grid.empty()) raw.cfg.r_grid = covband::parse_grid(raw.r_grid);
    if (raw.threads == "auto") {
      raw.cfg.threads = 0;
    } else {
      raw.cfg.threads = std::stoi(raw.threads);
      if (raw.cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
    }
    if (raw.cfg.tau != 1.0)
      throw std::invalid_argument("tau is the unit of time and must be 1");
    if (raw.cfg.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  }

  try {
    covband::ResultRecord rec = covband::run(raw.cfg);
    for (const std::string& m : rec.messages) std::printf("%s\n", m.c_str());
    if (!raw.cfg.out_path.empty())
      covband::write_atomic(raw.cfg.out_path, covband::format_csv(rec));
    if (!raw.cfg.json_path.empty())
      covband::write_atomic(raw.cfg.json_path, covband::format_json(rec));
    if (raw.cfg.out_path.empty() && raw.cfg.json_path.empty() &&
        rec.messages.empty())
      std::fputs(covband::format_csv(rec).c_str(), stdout);
    return covband::exit_code_for(rec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
