#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitrade/harness.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("BITRADE_OUT_DIR");
  return env && *env ? env : ".";
}

struct Common {
  std::string mode = "stochastic";
  std::string env = "uniform";
  std::string sequence_file;
  double delta = 1e-3;
  std::uint64_t seed = 1;
  std::string out = default_out_dir();
};

void add_config(CLI::App* cmd) {
  // Consumed by expand_config before parsing; registered for --help only.
  cmd->add_option("--config", "flat key=value file; command-line flags override it");
}

std::string flag_name(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return {};
  return arg.substr(2, arg.find('=') - 2);
}

// Rewrites "--config FILE" into "--key=value" arguments placed right after the
// subcommand, skipping keys that are also given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::set<std::string> given;
  for (const auto& a : args) given.insert(flag_name(a));
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line without '=': " + line);
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t\r");
      const auto e = x.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!given.contains(key)) injected.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  const auto at = args.size() > 1 ? args.begin() + 2 : args.end();
  args.insert(at, injected.begin(), injected.end());
  return args;
}

void add_common(CLI::App* cmd, Common& c) {
  add_config(cmd);
  cmd->add_option("--mode", c.mode, "stochastic | adversarial")->capture_default_str();
  cmd->add_option("--env", c.env, "uniform | point:s,b | sequence | sequence-cyclic | hard:N,k")
      ->capture_default_str();
  cmd->add_option("--sequence-file", c.sequence_file, "\"s,b\" per line, for --env sequence");
  cmd->add_option("--delta", c.delta, "confidence parameter in (0,1)")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed for environment and learner")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory (default: $BITRADE_OUT_DIR or .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated bilateral trade with a budget-balance violation budget"};
  app.require_subcommand(1);

  Common run_opts;
  std::uint64_t T = 10000;
  double beta = 0.75;
  auto* run = app.add_subcommand("run", "single run: writes transcript.csv and summary.csv");
  add_common(run, run_opts);
  run->add_option("--T", T, "horizon")->capture_default_str();
  run->add_option("--beta", beta, "violation exponent in [3/4, 6/7]")->capture_default_str();

  Common sweep_opts;
  sweep_opts.mode = "adversarial";
  std::vector<std::uint64_t> Ts{10000, 100000, 1000000};
  std::vector<double> betas{6.0 / 7.0};
  std::uint64_t replicas = 5;
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "grid of (T, beta, replica) runs: writes sweep.csv");
  add_common(sweep, sweep_opts);
  sweep->add_option("--T", Ts, "horizons")->delimiter(',')->capture_default_str();
  sweep->add_option("--beta", betas, "violation exponents")->delimiter(',')->capture_default_str();
  sweep->add_option("--replicas", replicas, "runs per cell; seed = base seed + replica")
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();

  std::vector<std::int64_t> Ns{2, 4, 8, 16};
  double g = 1.0 / 24.0;
  double eps = -1.0;
  double ell = 1.0 / 8.0;
  std::string lb_out = default_out_dir();
  auto* lb = app.add_subcommand("verify-lb", "check the lower-bound instance family: writes lb_report.csv");
  add_config(lb);
  lb->add_option("--N", Ns, "grid sizes")->delimiter(',')->capture_default_str();
  lb->add_option("--g", g, "total mass scale of the perturbed sets")->capture_default_str();
  lb->add_option("--eps", eps, "perturbation size (negative: gamma1/3)")->capture_default_str();
  lb->add_option("--ell", ell, "price offset")->capture_default_str();
  lb->add_option("--out", lb_out, "output directory (default: $BITRADE_OUT_DIR or .)");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<char*> ptrs;
  for (auto& a : args) ptrs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(ptrs.size()), ptrs.data());

  try {
    if (*run) {
      bitrade::RunConfig cfg;
      cfg.mode = bitrade::parse_mode(run_opts.mode);
      cfg.env = {run_opts.env, run_opts.sequence_file};
      cfg.T = T;
      cfg.beta = beta;
      cfg.delta = run_opts.delta;
      cfg.seed = run_opts.seed;
      cfg.out_dir = run_opts.out;
      const auto s = bitrade::cmd_run(cfg);
      std::cout << bitrade::kSummaryHeader << '\n'
                << bitrade::summary_row(cfg.mode, cfg.beta, cfg.delta, cfg.seed, s) << '\n';
    } else if (*sweep) {
      bitrade::SweepConfig cfg;
      cfg.mode = bitrade::parse_mode(sweep_opts.mode);
      cfg.env = {sweep_opts.env, sweep_opts.sequence_file};
      cfg.Ts = Ts;
      cfg.betas = betas;
      cfg.replicas = replicas;
      cfg.delta = sweep_opts.delta;
      cfg.base_seed = sweep_opts.seed;
      cfg.jobs = jobs;
      cfg.out_dir = sweep_opts.out;
      const auto cells = bitrade::cmd_sweep(cfg);
      std::cout << cells.size() << " cells written to " << cfg.out_dir << "/sweep.csv\n";
    } else if (*lb) {
      bitrade::LbReport report;
      const bool ok = bitrade::cmd_verify_lb(Ns, g, eps, ell, lb_out, &report);
      std::size_t failed = 0;
      for (const auto& r : report.rows)
        if (!r.pass) {
          if (failed++ < 10)
            std::cerr << "FAIL N=" << r.N << " k=" << r.k << ' ' << r.check << " (" << r.i << ',' << r.j
                      << ") expected " << bitrade::fmt17(r.expected) << " got " << bitrade::fmt17(r.actual)
                      << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
        }
      std::cout << report.rows.size() - failed << '/' << report.rows.size() << " checks passed\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
