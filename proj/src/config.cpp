#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpmg/cli.hpp"
#include "mpmg/error.hpp"

namespace mpmg::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw Error(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(where + "." + key + ": wrong type");
  }
}

int positive_int(const json& obj, const std::string& key, const std::string& where, int min) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw Error(where + "." + key + ": expected an integer");
  const long long x = v.get<long long>();
  if (x < min || x > 1'000'000'000) {
    throw Error(where + "." + key + ": must be >= " + std::to_string(min));
  }
  return static_cast<int>(x);
}

int precision_bits(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Precision(v.get<int>()).bits();
  if (v.is_string()) return Precision::from_name(v.get<std::string>()).bits();
  throw Error(where + ": expected a bit count or one of fp64, fp32, fp16, bf16");
}

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw Error(where + ": expected a non-empty array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (e.is_number_integer()) {
      out.push_back(e.get<int>());
    } else {
      throw Error(where + ": expected integers");
    }
  }
  return out;
}

ProblemSpec parse_problem(const json& j) {
  const std::string w = "problem";
  check_keys(j, w, {"name", "size", "rhs"});
  ProblemSpec p;
  if (j.contains("name")) p.name = get<std::string>(j, "name", w);
  if (j.contains("size")) p.size = positive_int(j, "size", w, 2);
  if (j.contains("rhs")) p.rhs = get<std::string>(j, "rhs", w);
  if (p.name != "poisson1d" && p.name != "poisson1d-reaction" && p.name != "poisson2d") {
    throw Error("problem.name: unknown problem '" + p.name + "'");
  }
  if (p.rhs != "manufactured" && p.rhs != "random") {
    throw Error("problem.rhs: expected 'manufactured' or 'random'");
  }
  return p;
}

SmootherConfig parse_smoother(const json& j) {
  const std::string w = "smoother";
  check_keys(j, w, {"kind", "omega", "inner", "interval_fraction"});
  SmootherConfig s;
  if (j.contains("kind")) s.kind = get<std::string>(j, "kind", w);
  if (j.contains("omega")) s.omega = get<double>(j, "omega", w);
  if (j.contains("inner")) s.inner = get<std::string>(j, "inner", w);
  if (j.contains("interval_fraction")) s.interval_fraction = get<double>(j, "interval_fraction", w);
  static const std::set<std::string> kinds{"richardson", "jacobi", "double", "cheb2",
                                           "cheb2-jacobi"};
  if (!kinds.contains(s.kind)) throw Error("smoother.kind: unknown smoother '" + s.kind + "'");
  if (!kinds.contains(s.inner)) throw Error("smoother.inner: unknown smoother '" + s.inner + "'");
  return s;
}

PrecisionSpec parse_precision(const json& j) {
  const std::string w = "precision";
  check_keys(j, w, {"policy", "high", "work", "low", "target", "floor_bits", "ladder"});
  PrecisionSpec p;
  if (j.contains("policy")) p.policy = get<std::string>(j, "policy", w);
  if (j.contains("high")) p.high = precision_bits(j.at("high"), w + ".high");
  if (j.contains("work")) p.work = precision_bits(j.at("work"), w + ".work");
  if (j.contains("low")) p.low = precision_bits(j.at("low"), w + ".low");
  if (j.contains("target")) p.target = get<double>(j, "target", w);
  if (j.contains("floor_bits")) p.floor_bits = precision_bits(j.at("floor_bits"), w + ".floor_bits");
  if (j.contains("ladder")) {
    for (const auto& e : j.at("ladder")) p.ladder.push_back(precision_bits(e, w + ".ladder"));
  }
  PrecisionPolicy::kind_from_name(p.policy);
  if (!(p.high >= p.work && p.work >= p.low)) {
    throw Error("precision: expected high >= work >= low");
  }
  if (!(p.target > 0)) throw Error("precision.target must be positive");
  return p;
}

SweepSpec parse_sweep(const json& j) {
  const std::string w = "sweep";
  check_keys(j, w, {"sizes", "precisions"});
  SweepSpec s;
  if (j.contains("sizes")) s.sizes = int_list(j.at("sizes"), "sweep.sizes");
  if (j.contains("precisions")) {
    for (const auto& e : j.at("precisions")) s.precisions.push_back(precision_bits(e, "sweep.precisions"));
    if (s.precisions.empty()) throw Error("sweep.precisions: expected a non-empty array");
  }
  if (s.sizes.empty() == s.precisions.empty()) {
    throw Error("sweep: give exactly one of 'sizes' or 'precisions'");
  }
  return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  const std::string w = "config";
  check_keys(j, w,
             {"problem", "levels", "smoother", "precision", "solver", "N", "tol", "max_iter",
              "trials", "sweep", "seed", "output_dir"});
  ExperimentConfig c;
  if (j.contains("problem")) c.problem = parse_problem(j.at("problem"));
  if (j.contains("levels")) c.levels = positive_int(j, "levels", w, 0);
  if (j.contains("smoother")) c.smoother = parse_smoother(j.at("smoother"));
  if (j.contains("precision")) c.precision = parse_precision(j.at("precision"));
  if (j.contains("solver")) c.solver = get<std::string>(j, "solver", w);
  if (c.solver != "ir-v" && c.solver != "ir-tg" && c.solver != "fmg") {
    throw Error("config.solver: expected ir-v, ir-tg or fmg");
  }
  if (j.contains("N")) c.N = positive_int(j, "N", w, 0);
  if (j.contains("tol")) {
    c.tol = get<double>(j, "tol", w);
    if (!(c.tol > 0)) throw Error("config.tol must be positive");
  }
  if (j.contains("max_iter")) c.max_iter = positive_int(j, "max_iter", w, 0);
  if (j.contains("trials")) c.trials = positive_int(j, "trials", w, 1);
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw Error("config.seed: expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", w);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

PrecisionPolicy policy_from(const PrecisionSpec& p) {
  PrecisionPolicy pol;
  pol.kind = PrecisionPolicy::kind_from_name(p.policy);
  pol.finest = PrecisionTriple{Precision(p.high), Precision(p.work), Precision(p.low)};
  pol.target = p.target;
  pol.floor_bits = p.floor_bits;
  pol.ladder = p.ladder;
  return pol;
}

ModelProblem problem_from(const ProblemSpec& p, std::uint64_t seed) {
  ModelProblem prob = make_problem(p.name, p.size);
  if (p.rhs == "random") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (double& v : prob.b) v = normal(rng);
    prob.exact_solution.reset();
  }
  return prob;
}

}  // namespace mpmg::cli
