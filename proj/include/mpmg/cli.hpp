#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpmg/hierarchy.hpp"

namespace mpmg::cli {

struct ProblemSpec {
  std::string name = "poisson1d";
  int size = 63;
  std::string rhs = "manufactured";  // manufactured | random
};

struct PrecisionSpec {
  std::string policy = "uniform";
  int high = 53;
  int work = 24;
  int low = 11;
  double target = 1.0 / 16.0;
  int floor_bits = 8;
  std::vector<int> ladder;
};

/// Exactly one of the two lists is non-empty.
struct SweepSpec {
  std::vector<int> sizes;
  std::vector<int> precisions;  // work precision bits
};

struct ExperimentConfig {
  ProblemSpec problem;
  int levels = 0;  // 0: coarsen to one unknown per direction
  SmootherConfig smoother;
  PrecisionSpec precision;
  std::string solver = "ir-v";  // ir-v | ir-tg | fmg
  int N = 0;                    // FMG cycles per level, 0: n_min
  double tol = 1e-12;           // relative to ‖b‖
  int max_iter = 60;
  int trials = 20;              // random errors for measured cycle factors
  std::optional<SweepSpec> sweep;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

/// Parses and validates a JSON config. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

PrecisionPolicy policy_from(const PrecisionSpec& p);
ModelProblem problem_from(const ProblemSpec& p, std::uint64_t seed);

struct RunContext {
  std::filesystem::path out_dir = ".";
  bool trace = false;
  int threads = 1;
  std::uint64_t seed = 42;
  std::ostream* log = nullptr;  // human-readable output, may be null
};

/// Builds the configured hierarchy. Warnings go to ctx.log.
Hierarchy hierarchy_from(const ExperimentConfig& c, std::uint64_t seed);

struct SweepPoint {
  int n = 0;  // finest-level unknowns
  int work_bits = 0;
  double kappa = 0;
  double tau = 0;  // κ^(1/2) ε
  double floor = 0;
  double measured_rho = 0;
  double predicted_chi = 0;             // χ with ρ = measured_rho
  double predicted_rho_plus_delta = 0;  // measured_rho + δ_ρ_ir
  int iterations = 0;
  bool diverged = false;
};

/// One IR solve for the configured problem (size and work precision as
/// given in c).
SweepPoint run_sweep_point(const ExperimentConfig& c, std::uint64_t seed);
/// All points of c.sweep in order.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& c, int threads, std::uint64_t seed);

int cmd_solve(const ExperimentConfig& c, const RunContext& ctx);
int cmd_sweep(const ExperimentConfig& c, const RunContext& ctx);
int cmd_bounds(const ExperimentConfig& c, const RunContext& ctx);
int cmd_fmg(const ExperimentConfig& c, const RunContext& ctx);
int cmd_gen(const ExperimentConfig& c, const RunContext& ctx);

/// Runs `count` independent jobs on up to `threads` workers. job(i) must only
/// write to slot i of its own output.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

/// Least-squares slope of log(y) against log(x) over positive pairs.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Command-line entry point. Returns the process exit code:
/// 0 success, 1 usage or I/O error, 2 mathematical failure.
int run(int argc, char** argv);

}  // namespace mpmg::cli
