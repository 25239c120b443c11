#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mpmg/bounds.hpp"
#include "mpmg/cli.hpp"
#include "mpmg/error.hpp"
#include "mpmg/io.hpp"
#include "mpmg/refine.hpp"

namespace mpmg::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// JSON has no inf/NaN; store them as null.
ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

template <class T>
ordered_json jopt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return jnum(*v);
  } else {
    return *v;
  }
}

ordered_json jvec(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

std::ostream& log_of(const RunContext& ctx) {
  static std::ostringstream sink;
  if (ctx.log) return *ctx.log;
  sink.str("");
  return sink;
}

void prepare_out(const RunContext& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + ctx.out_dir.string() + "'");
}

ordered_json hierarchy_json(const Hierarchy& h) {
  ordered_json levels = ordered_json::array();
  for (const GridLevel& lvl : h.levels) {
    const SpectralStats& s = lvl.A.stats();
    levels.push_back({{"level", lvl.j},
                      {"n", lvl.A.n()},
                      {"grid_side", lvl.grid_side},
                      {"nnz", lvl.A.csr().nnz()},
                      {"m_A", lvl.A.m_A()},
                      {"norm_A", jnum(s.norm_A)},
                      {"norm_Ainv", jnum(s.norm_Ainv)},
                      {"kappa", jnum(s.kappa)},
                      {"psi", jnum(s.psi)},
                      {"h", jnum(lvl.h)},
                      {"theta", jnum(h.theta[lvl.j - 1])},
                      {"zeta", jnum(h.zeta[lvl.j - 1])},
                      {"kappa_PtP", jnum(lvl.kappa_PtP)},
                      {"m_P", lvl.m_P},
                      {"high_bits", lvl.prec.high.bits()},
                      {"work_bits", lvl.prec.work.bits()},
                      {"low_bits", lvl.prec.low.bits()},
                      {"smoother", lvl.smoother.name()}});
  }
  return {{"levels", levels},
          {"m", h.m},
          {"q", h.disc_q},
          {"dimension", h.dimension},
          {"vartheta", jnum(h.vartheta)},
          {"warnings", h.warnings}};
}

ordered_json report_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"diverged", r.diverged},
          {"measured_rho", jnum(r.measured_rho)},
          {"floor", jnum(r.floor)},
          {"final_rel_energy_error", jnum(r.rel_energy_error.back())},
          {"rel_energy_error", jvec(r.rel_energy_error)},
          {"residual_norm", jvec(r.residual_norm)}};
}

std::string history_csv(const SolveReport& r) {
  std::ostringstream s;
  s << "iteration,rel_energy_error,residual_norm\n";
  const std::size_t rows = std::min(r.rel_energy_error.size(), r.residual_norm.size());
  for (std::size_t i = 0; i < rows; ++i) {
    s << i << ',' << num(r.rel_energy_error[i]) << ',' << num(r.residual_norm[i]) << '\n';
  }
  return s.str();
}

std::string trace_csv(const CycleTrace& t) {
  std::ostringstream s;
  s << "visit,cycle,level,low_bits,rhs_norm,relaxed_norm,residual_norm,correction_norm\n";
  for (std::size_t i = 0; i < t.visits.size(); ++i) {
    const LevelVisit& v = t.visits[i];
    s << i << ',' << v.cycle << ',' << v.level << ',' << v.low_bits << ',' << num(v.rhs_norm) << ','
      << num(v.relaxed_norm) << ',' << (v.residual_norm ? num(*v.residual_norm) : "") << ','
      << (v.correction_norm ? num(*v.correction_norm) : "") << '\n';
  }
  return s.str();
}

InnerSolver inner_for(const ExperimentConfig& c, const Hierarchy& h, CycleTrace* trace) {
  if (c.solver == "ir-tg") return tg_cycle_solver(h, trace);
  return v_cycle_solver(h, trace);
}

IrResult solve_hierarchy(const ExperimentConfig& c, const Hierarchy& h, CycleTrace* trace) {
  const GridLevel& fine = h.finest();
  IrOptions opt;
  opt.tol = c.tol * std::max(norm2(fine.b), std::numeric_limits<double>::min());
  opt.max_iter = c.max_iter;
  opt.reference = &fine.x_ref;
  return ir_solve(fine.A, fine.b, inner_for(c, h, trace), fine.prec, opt);
}

void print_warnings(const Hierarchy& h, std::ostream& log) {
  for (const std::string& w : h.warnings) log << "warning: " << w << '\n';
}

}  // namespace

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

Hierarchy hierarchy_from(const ExperimentConfig& c, std::uint64_t seed) {
  return build_hierarchy(problem_from(c.problem, seed), c.levels, policy_from(c.precision),
                         c.smoother);
}

SweepPoint run_sweep_point(const ExperimentConfig& c, std::uint64_t seed) {
  const Hierarchy h = hierarchy_from(c, seed);
  const IrResult res = solve_hierarchy(c, h, nullptr);
  const SolveReport& r = res.report;
  const GridLevel& fine = h.finest();
  const SpectralStats& s = fine.A.stats();

  SweepPoint p;
  p.n = fine.A.n();
  p.work_bits = fine.prec.work.bits();
  p.kappa = s.kappa;
  p.tau = std::sqrt(s.kappa) * fine.prec.work.unit_roundoff();
  p.floor = r.floor;
  p.measured_rho = r.measured_rho;
  p.iterations = r.iterations;
  p.diverged = r.diverged;
  if (r.diverged || !(r.measured_rho < 1.0)) {
    throw MathError("sweep point n = " + std::to_string(p.n) + ", p = " +
                    std::to_string(p.work_bits) + ": IR diverged");
  }
  const IrBounds b = eval_ir_bounds(s, fine.A.m_A(), r.measured_rho, fine.prec);
  p.predicted_chi = b.chi;
  p.predicted_rho_plus_delta = r.measured_rho + b.delta_rho_ir;
  return p;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& c, int threads, std::uint64_t seed) {
  if (!c.sweep) throw Error("sweep: config has no 'sweep' section");
  std::vector<ExperimentConfig> configs;
  for (int n : c.sweep->sizes) {
    ExperimentConfig k = c;
    k.problem.size = n;
    configs.push_back(k);
  }
  for (int bits : c.sweep->precisions) {
    ExperimentConfig k = c;
    k.precision.work = bits;
    k.precision.low = std::min(k.precision.low, bits);
    if (k.precision.high < bits) throw Error("sweep.precisions: work precision above high");
    configs.push_back(k);
  }
  std::vector<SweepPoint> points(configs.size());
  parallel_for(static_cast<int>(configs.size()), threads,
               [&](int i) { points[i] = run_sweep_point(configs[i], seed); });
  return points;
}

int cmd_solve(const ExperimentConfig& c, const RunContext& ctx) {
  if (c.solver == "fmg") return cmd_fmg(c, ctx);
  std::ostream& log = log_of(ctx);
  prepare_out(ctx);
  const Hierarchy h = hierarchy_from(c, ctx.seed);
  print_warnings(h, log);
  CycleTrace trace;
  const IrResult res = solve_hierarchy(c, h, ctx.trace ? &trace : nullptr);
  const SolveReport& r = res.report;

  write_text(ctx.out_dir / "history.csv", history_csv(r));
  if (ctx.trace) write_text(ctx.out_dir / "trace.csv", trace_csv(trace));
  ordered_json j{{"command", "solve"},
                 {"solver", c.solver},
                 {"seed", ctx.seed},
                 {"hierarchy", hierarchy_json(h)},
                 {"report", report_json(r)}};
  write_json(ctx.out_dir / "report.json", j);

  log << "iterations " << r.iterations << ", final relative energy error "
      << r.rel_energy_error.back() << ", measured rate " << r.measured_rho << ", floor "
      << r.floor << '\n';
  if (r.diverged) {
    log << "IR diverged\n";
    return 2;
  }
  if (!r.converged && r.floor == 0) {
    log << "warning: max_iter reached before the tolerance or a floor\n";
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& c, const RunContext& ctx) {
  std::ostream& log = log_of(ctx);
  prepare_out(ctx);
  const std::vector<SweepPoint> points = run_sweep(c, ctx.threads, ctx.seed);

  std::ostringstream csv;
  csv << "n,kappa,tau,floor,measured_rho,predicted_chi,predicted_rho_plus_delta\n";
  std::vector<double> tau, floor;
  ordered_json jp = ordered_json::array();
  for (const SweepPoint& p : points) {
    csv << p.n << ',' << num(p.kappa) << ',' << num(p.tau) << ',' << num(p.floor) << ','
        << num(p.measured_rho) << ',' << num(p.predicted_chi) << ','
        << num(p.predicted_rho_plus_delta) << '\n';
    tau.push_back(p.tau);
    floor.push_back(p.floor);
    jp.push_back({{"n", p.n},
                  {"work_bits", p.work_bits},
                  {"kappa", jnum(p.kappa)},
                  {"tau", jnum(p.tau)},
                  {"floor", jnum(p.floor)},
                  {"measured_rho", jnum(p.measured_rho)},
                  {"predicted_chi", jnum(p.predicted_chi)},
                  {"predicted_rho_plus_delta", jnum(p.predicted_rho_plus_delta)},
                  {"iterations", p.iterations}});
  }
  const double slope = loglog_slope(tau, floor);
  write_text(ctx.out_dir / "sweep.csv", csv.str());
  write_json(ctx.out_dir / "sweep.json",
             {{"command", "sweep"},
              {"axis", c.sweep->sizes.empty() ? "precision" : "size"},
              {"seed", ctx.seed},
              {"points", jp},
              {"slope_log_floor_vs_log_tau", jnum(slope)}});
  log << csv.str() << "slope of log(floor) vs log(tau): " << slope << '\n';
  return 0;
}

int cmd_bounds(const ExperimentConfig& c, const RunContext& ctx) {
  std::ostream& log = log_of(ctx);
  prepare_out(ctx);
  const Hierarchy h = hierarchy_from(c, ctx.seed);
  print_warnings(h, log);
  BoundOptions opt;
  opt.N = c.N;
  const BoundReport b = make_bound_report(h, opt);

  const SparseSpd& a = h.finest().A;
  std::optional<double> tg_measured;
  if (h.size() >= 2) tg_measured = worst_cycle_factor(a, tg_cycle_solver(h), c.trials, ctx.seed);
  const double v_measured = worst_cycle_factor(a, v_cycle_solver(h), c.trials, ctx.seed);
  const IrResult ir = solve_hierarchy(c, h, nullptr);

  struct Row {
    std::string name;
    std::optional<double> predicted;
    std::optional<double> measured;
  };
  std::vector<Row> rows;
  if (b.tg) rows.push_back({"tg_factor", b.rho_star_tg + b.tg->delta_rho_tg, tg_measured});
  rows.push_back({"v_factor", b.rho_star_v + b.v->delta_rho_v, v_measured});
  rows.push_back({"ir_rate", b.rho + b.delta_rho_ir, ir.report.measured_rho});
  rows.push_back({"ir_floor", b.chi, ir.report.floor});

  std::optional<FmgResult> fmg_run;
  if (b.fmg_error) log << "fmg condition not evaluated: " << *b.fmg_error << '\n';
  if (b.fmg) {
    fmg_run = fmg(h, b.N);
    for (const FmgLevelCheck& l : b.fmg->levels) {
      rows.push_back({"fmg_level_" + std::to_string(l.level), l.lhs,
                      fmg_run->levels[l.level - 1].rel_energy_error});
    }
  }

  log << std::left << std::setw(16) << "quantity" << std::setw(16) << "predicted" << "measured\n";
  ordered_json table = ordered_json::array();
  for (const Row& r : rows) {
    auto cell = [](const std::optional<double>& v) {
      std::ostringstream s;
      if (v) s << std::setprecision(6) << *v;
      else s << "-";
      return s.str();
    };
    log << std::left << std::setw(16) << r.name << std::setw(16) << cell(r.predicted)
        << cell(r.measured) << '\n';
    table.push_back({{"quantity", r.name}, {"predicted", jopt(r.predicted)},
                     {"measured", jopt(r.measured)}});
  }

  ordered_json tg = nullptr;
  if (b.tg) {
    tg = {{"tau_dot", jnum(b.tg->tau_dot)}, {"mu_dot", jnum(b.tg->mu_dot)},
          {"sigma", jnum(b.tg->sigma)},     {"beta", jnum(b.tg->beta)},
          {"phi", jnum(b.tg->phi)},         {"delta_rho_tg", jnum(b.tg->delta_rho_tg)}};
  }
  ordered_json v = nullptr;
  if (b.v) {
    v = {{"vartheta", jnum(b.v->vartheta)},
         {"prefactor", jnum(b.v->prefactor)},
         {"mu_dot", jnum(b.v->tg.mu_dot)},
         {"sigma", jnum(b.v->tg.sigma)},
         {"beta", jnum(b.v->tg.beta)},
         {"delta_rho_tg", jnum(b.v->tg.delta_rho_tg)},
         {"delta_rho_tg_per_level", jvec(b.v->delta_tg_level)},
         {"delta_rho_v", jnum(b.v->delta_rho_v)}};
  }
  ordered_json fmg_json = nullptr;
  if (b.fmg) {
    ordered_json lv = ordered_json::array();
    for (const FmgLevelCheck& l : b.fmg->levels) {
      lv.push_back({{"level", l.level}, {"h", jnum(l.h)}, {"theta", jnum(l.theta)},
                    {"mu", jnum(l.mu)}, {"rho_v", jnum(l.rho_v)},
                    {"delta_rho_ir", jnum(l.delta_rho_ir)}, {"chi", jnum(l.chi)},
                    {"fmg_lhs", jnum(l.lhs)}, {"fmg_rhs", jnum(l.rhs)}, {"holds", l.holds}});
    }
    fmg_json = {{"levels", lv}, {"all_hold", b.fmg->all_hold}};
  }
  ordered_json report{
      {"kappa", jvec(b.kappa)},
      {"tau", jvec(b.tau)},
      {"tau_dot", jvec(b.tau_dot)},
      {"tau_bar", jvec(b.tau_bar)},
      {"mu_j", jvec(b.mu_j)},
      {"theta", jvec(b.theta)},
      {"vartheta", jnum(b.vartheta)},
      {"gamma", jnum(b.gamma)},
      {"rho", jnum(b.rho)},
      {"chi", jnum(b.chi)},
      {"delta_rho_ir", jnum(b.delta_rho_ir)},
      {"chi_worst", jopt(b.chi_worst)},
      {"delta_rho_ir_worst", jopt(b.delta_rho_ir_worst)},
      {"tg", tg},
      {"v", v},
      {"rho_star_tg", jnum(b.rho_star_tg)},
      {"rho_star_v", jnum(b.rho_star_v)},
      {"dense_level", b.dense_level},
      {"C", jnum(b.C)},
      {"q", jnum(b.q)},
      {"N", b.N},
      {"n_min", b.n_min},
      {"fmg", fmg_json},
      {"fmg_error", jopt(b.fmg_error)}};
  write_json(ctx.out_dir / "bounds.json", {{"command", "bounds"},
                                           {"seed", ctx.seed},
                                           {"hierarchy", hierarchy_json(h)},
                                           {"bounds", report},
                                           {"table", table}});
  return 0;
}

int cmd_fmg(const ExperimentConfig& c, const RunContext& ctx) {
  std::ostream& log = log_of(ctx);
  prepare_out(ctx);
  const Hierarchy h = hierarchy_from(c, ctx.seed);
  print_warnings(h, log);
  const double C = measure_C(h);
  const RhoStar rs = measure_rho_star(h);
  const int n_min = fmg_n_min(h, rs.rho_star_v);
  const int N = c.N > 0 ? c.N : n_min;
  const FmgResult res = fmg(h, N);

  std::ostringstream csv;
  csv << "level,h,rel_energy_error,c_h_q,pass\n";
  ordered_json rows = ordered_json::array();
  bool all = true;
  log << std::left << std::setw(7) << "level" << std::setw(14) << "h" << std::setw(14)
      << "rel_error" << std::setw(14) << "C h^q" << "pass\n";
  for (const FmgLevelReport& l : res.levels) {
    const double target = C * std::pow(l.h, h.disc_q);
    const bool pass = l.rel_energy_error <= target;
    all = all && pass;
    csv << l.level << ',' << num(l.h) << ',' << num(l.rel_energy_error) << ',' << num(target)
        << ',' << (pass ? 1 : 0) << '\n';
    log << std::left << std::setw(7) << l.level << std::setw(14) << l.h << std::setw(14)
        << l.rel_energy_error << std::setw(14) << target << (pass ? "yes" : "no") << '\n';
    rows.push_back({{"level", l.level},
                    {"h", jnum(l.h)},
                    {"rel_energy_error", jnum(l.rel_energy_error)},
                    {"c_h_q", jnum(target)},
                    {"pass", pass},
                    {"history", jvec(l.history)}});
  }
  write_text(ctx.out_dir / "fmg.csv", csv.str());
  write_json(ctx.out_dir / "fmg.json", {{"command", "fmg"},
                                        {"seed", ctx.seed},
                                        {"C", jnum(C)},
                                        {"q", jnum(h.disc_q)},
                                        {"N", N},
                                        {"n_min", n_min},
                                        {"rho_star_v", jnum(rs.rho_star_v)},
                                        {"v_cycles", res.v_cycles},
                                        {"all_pass", all},
                                        {"levels", rows},
                                        {"hierarchy", hierarchy_json(h)}});
  return 0;
}

int cmd_gen(const ExperimentConfig& c, const RunContext& ctx) {
  std::ostream& log = log_of(ctx);
  prepare_out(ctx);
  const Hierarchy h = hierarchy_from(c, ctx.seed);
  for (const GridLevel& lvl : h.levels) {
    const std::string j = std::to_string(lvl.j);
    write_matrix_market((ctx.out_dir / ("A_" + j + ".mtx")).string(), lvl.A.csr());
    write_vector((ctx.out_dir / ("b_" + j + ".txt")).string(), lvl.b);
    if (lvl.P) write_matrix_market((ctx.out_dir / ("P_" + j + ".mtx")).string(), *lvl.P);
  }
  write_json(ctx.out_dir / "hierarchy.json", hierarchy_json(h));
  log << "wrote " << h.size() << " levels to " << ctx.out_dir.string() << '\n';
  return 0;
}

}  // namespace mpmg::cli
