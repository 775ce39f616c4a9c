#pragma once

// Run configuration, CSV emission, sweeps and lower-bound verification.
// Everything that touches the filesystem lives here; the learners stay pure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bitrade/environment.hpp"
#include "bitrade/hard_instance.hpp"
#include "bitrade/learners.hpp"

namespace bitrade {

enum class Mode { Stochastic, Adversarial };

inline const char* mode_name(Mode m) { return m == Mode::Stochastic ? "stochastic" : "adversarial"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "stochastic") return Mode::Stochastic;
  if (s == "adversarial") return Mode::Adversarial;
  throw std::invalid_argument("unknown mode: " + s + " (expected stochastic or adversarial)");
}

/// Textual environment description:
///   uniform | point:s,b | sequence | sequence-cyclic | hard:N,k
/// "sequence" reads the valuations from `sequence_file`.
struct EnvSpec {
  std::string text = "uniform";
  std::string sequence_file;
};

struct RunConfig {
  Mode mode = Mode::Stochastic;
  EnvSpec env;
  std::uint64_t T = 10000;
  double beta = 0.75;
  double delta = 1e-3;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct SweepConfig {
  Mode mode = Mode::Adversarial;
  EnvSpec env;
  std::vector<std::uint64_t> Ts;
  std::vector<double> betas;
  std::uint64_t replicas = 1;
  double delta = 1e-3;
  std::uint64_t base_seed = 1;
  unsigned jobs = 1;
  std::string out_dir = ".";
};

namespace detail {
inline std::vector<double> split_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number in " + what + ": '" + item + "'");
    }
  }
  return out;
}
}  // namespace detail

/// Builds the environment described by `spec`; `seed` drives stochastic draws.
inline Environment make_environment(const EnvSpec& spec, std::uint64_t seed) {
  const auto colon = spec.text.find(':');
  const std::string kind = spec.text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.text.substr(colon + 1);
  if (kind == "uniform") return Environment(IndependentUniform{}, seed);
  if (kind == "point") {
    const auto v = detail::split_numbers(args, "point");
    if (v.size() != 2 || v[0] < 0 || v[0] > 1 || v[1] < 0 || v[1] > 1)
      throw std::invalid_argument("point environment expects point:s,b with s,b in [0,1]");
    return Environment(PointMass{{v[0], v[1]}}, seed);
  }
  if (kind == "sequence" || kind == "sequence-cyclic") {
    if (spec.sequence_file.empty()) throw std::invalid_argument("sequence environment needs --sequence-file");
    return Environment(FixedSequence{load_sequence_file(spec.sequence_file), kind == "sequence-cyclic"},
                       seed);
  }
  if (kind == "hard") {
    const auto v = detail::split_numbers(args, "hard");
    if (v.size() != 2) throw std::invalid_argument("hard environment expects hard:N,k");
    const auto h = HardInstanceParams::make(static_cast<std::int64_t>(v[0]), 1.0 / 24.0);
    return Environment(build_hard_instance(h, static_cast<std::int64_t>(v[1])), seed);
  }
  throw std::invalid_argument("unknown environment: " + spec.text);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_transcript_csv(std::ostream& out, const std::vector<RoundRecord>& records) {
  out << "t,p,q,traded,gft,rev\n";
  for (const auto& r : records)
    out << r.t << ',' << fmt17(r.posted.p) << ',' << fmt17(r.posted.q) << ',' << (r.traded ? 1 : 0)
        << ',' << fmt17(r.gft) << ',' << fmt17(r.rev) << '\n';
}

inline constexpr const char* kSummaryHeader = "mode,T,beta,delta,seed,R_T,V_T,grid_leaves,explore_rounds";
inline constexpr const char* kSweepHeader = "T,beta,seed,R_T,V_T,grid_leaves,explore_rounds";

inline std::string summary_row(Mode mode, double beta, double delta, std::uint64_t seed, const Summary& s) {
  std::ostringstream out;
  out << mode_name(mode) << ',' << s.T << ',' << fmt17(beta) << ',' << fmt17(delta) << ',' << seed << ','
      << fmt17(s.regret) << ',' << fmt17(s.violation) << ',' << s.grid_leaves << ',' << s.explore_rounds;
  return out.str();
}

inline std::string sweep_row(double beta, std::uint64_t seed, const Summary& s) {
  std::ostringstream out;
  out << s.T << ',' << fmt17(beta) << ',' << seed << ',' << fmt17(s.regret) << ',' << fmt17(s.violation)
      << ',' << s.grid_leaves << ',' << s.explore_rounds;
  return out.str();
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// Runs

/// Runs one learner; the environment seed and the learner seed are both `seed`.
inline Transcript run_once(Mode mode, const EnvSpec& spec, std::uint64_t T, double beta, double delta,
                           std::uint64_t seed) {
  const Environment env = make_environment(spec, seed);
  if (mode == Mode::Stochastic) return run_stochastic(env, T, beta, delta, seed).transcript;
  return run_adversarial(env, T, beta, delta, seed).transcript;
}

/// Writes transcript.csv and summary.csv into cfg.out_dir.
inline Summary cmd_run(const RunConfig& cfg) {
  const Transcript tr = run_once(cfg.mode, cfg.env, cfg.T, cfg.beta, cfg.delta, cfg.seed);
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "transcript.csv");
    write_transcript_csv(out, tr.records);
    if (!out) throw std::runtime_error("write failed: transcript.csv");
  }
  {
    auto out = open_output(dir / "summary.csv");
    out << kSummaryHeader << '\n' << summary_row(cfg.mode, cfg.beta, cfg.delta, cfg.seed, tr.summary) << '\n';
    if (!out) throw std::runtime_error("write failed: summary.csv");
  }
  return tr.summary;
}

struct SweepCell {
  std::uint64_t T = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  Summary summary;
  std::string error;
};

/// Runs every (T, beta, replica) cell on up to cfg.jobs threads and writes
/// sweep.csv in canonical cell order. Throws if any cell failed, after the
/// successful rows have been written.
inline std::vector<SweepCell> cmd_sweep(const SweepConfig& cfg) {
  if (cfg.Ts.empty()) throw std::invalid_argument("sweep: empty T list");
  if (cfg.betas.empty()) throw std::invalid_argument("sweep: empty beta list");
  if (cfg.replicas < 1) throw std::invalid_argument("sweep: replicas must be >= 1");

  std::vector<SweepCell> cells;
  for (auto T : cfg.Ts)
    for (double beta : cfg.betas)
      for (std::uint64_t r = 0; r < cfg.replicas; ++r) cells.push_back({T, beta, cfg.base_seed + r, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& c = cells[i];
      try {
        c.summary = run_once(cfg.mode, cfg.env, c.T, c.beta, cfg.delta, c.seed).summary;
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  auto out = open_output(dir / "sweep.csv");
  out << kSweepHeader << '\n';
  std::string failures;
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      failures += "\n  T=" + std::to_string(c.T) + " beta=" + fmt17(c.beta) + " seed=" + std::to_string(c.seed) +
                  ": " + c.error;
      continue;
    }
    out << sweep_row(c.beta, c.seed, c.summary) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: sweep.csv");
  if (!failures.empty()) throw std::runtime_error("sweep cells failed:" + failures);
  return cells;
}

// ---------------------------------------------------------------------------
// Lower-bound verification

struct LbCheck {
  std::int64_t N = 0;
  std::int64_t k = 0;
  std::string check;  ///< normalization | gft_closed_form | perturbation | diagonal_revenue
  std::int64_t i = -1;
  std::int64_t j = -1;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct LbReport {
  std::vector<LbCheck> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const LbCheck& r) { return r.pass; });
  }
};

/// Checks the instance family for one parameter set and appends to `report`.
inline void verify_lower_bound(const HardInstanceParams& h, LbReport& report) {
  auto add = [&](std::int64_t k, std::string check, std::int64_t i, std::int64_t j, double expected,
                 double actual, double tol, std::string detail = {}) {
    const bool pass = detail.empty() && std::abs(actual - expected) <= tol;
    report.rows.push_back({h.N, k, std::move(check), i, j, expected, actual, tol, pass, std::move(detail)});
  };

  std::vector<DiscreteDistribution> mu;
  for (std::int64_t k = 0; k < h.N; ++k) {
    try {
      mu.push_back(build_hard_instance(h, k));
      add(k, "normalization", -1, -1, 1.0, mu.back().total_mass(), DiscreteDistribution::kMassTolerance);
    } catch (const std::exception& e) {
      double total = 0.0;
      for (const auto& lm : hard_instance_masses(h, k)) total += lm.point.mass;
      add(k, "normalization", -1, -1, 1.0, total, DiscreteDistribution::kMassTolerance, e.what());
      return;
    }
  }

  for (std::int64_t i = 0; i <= h.N; ++i)
    for (std::int64_t j = 0; j <= h.N; ++j) {
      const auto x = exploitation_point(h, i, j);
      add(0, "gft_closed_form", i, j, base_gft_closed_form(h, i, j), exact_gft_expectation(mu[0], x), 1e-10);
    }

  for (std::int64_t k = 1; k < h.N; ++k)
    for (std::int64_t i = 0; i <= h.N; ++i)
      for (std::int64_t j = 0; j <= h.N; ++j) {
        const auto x = exploitation_point(h, i, j);
        add(k, "perturbation", i, j, perturbation_gain(h, k, i, j),
            exact_gft_expectation(mu[k], x) - exact_gft_expectation(mu[0], x), 1e-10);
      }

  for (std::int64_t k = 0; k < h.N; ++k)
    for (std::int64_t i = 0; i <= h.N; ++i)
      add(k, "diagonal_revenue", i, i, 0.0, exact_rev_expectation(mu[k], exploitation_point(h, i, i)), 0.0);
}

inline void write_lb_report(std::ostream& out, const LbReport& report) {
  out << "N,k,check,i,j,expected,actual,tolerance,pass,detail\n";
  for (const auto& r : report.rows)
    out << r.N << ',' << r.k << ',' << r.check << ',' << r.i << ',' << r.j << ',' << fmt17(r.expected) << ','
        << fmt17(r.actual) << ',' << fmt17(r.tolerance) << ',' << (r.pass ? 1 : 0) << ",\"" << r.detail
        << "\"\n";
}

/// Verifies every N in `Ns` and writes lb_report.csv; true iff all checks pass.
inline bool cmd_verify_lb(const std::vector<std::int64_t>& Ns, double g, double eps, double ell,
                          const std::string& out_dir, LbReport* report_out = nullptr) {
  LbReport report;
  for (auto N : Ns) verify_lower_bound(HardInstanceParams::make(N, g, eps, ell), report);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  auto out = open_output(dir / "lb_report.csv");
  write_lb_report(out, report);
  if (!out) throw std::runtime_error("write failed: lb_report.csv");
  const bool ok = report.all_pass();
  if (report_out) *report_out = std::move(report);
  return ok;
}

}  // namespace bitrade
