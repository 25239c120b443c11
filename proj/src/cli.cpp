#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpmg/cli.hpp"
#include "mpmg/error.hpp"

namespace mpmg::cli {

namespace {

int default_threads() {
  if (const char* env = std::getenv("MPMG_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw Error("MPMG_THREADS must be a positive integer");
  }
  return 1;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Mixed-precision multigrid laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool trace = false;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const ExperimentConfig&, const RunContext&);
  };
  const Sub subs[] = {
      {"solve", "Iterative refinement with a V-cycle or two-grid inner solver", cmd_solve},
      {"sweep", "One solve per size or precision; floor scaling table", cmd_sweep},
      {"bounds", "Evaluate the rounding-error bounds against measurements", cmd_bounds},
      {"fmg", "Full multigrid with a per-level discretization-accuracy table", cmd_fmg},
      {"gen", "Write the hierarchy matrices in Matrix Market format", cmd_gen},
  };
  std::vector<CLI::App*> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--trace", trace, "Write per-level cycle traces (solve)");
    sub->add_option("--threads", threads, "Worker threads (default: MPMG_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed (default 42)")
        ->each([&](const std::string&) { seed_given = true; });
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig config = load_config(config_path);
    RunContext ctx;
    ctx.out_dir = !out_dir.empty() ? out_dir : config.output_dir.value_or(".");
    ctx.trace = trace;
    ctx.threads = threads > 0 ? threads : default_threads();
    ctx.seed = seed_given ? seed : config.seed.value_or(42);
    ctx.log = &std::cout;
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (apps[i]->parsed()) return subs[i].fn(config, ctx);
    }
    return 1;
  } catch (const MathError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mpmg::cli
