// sparsemap: find s-sparse solutions of Mx = p by alternating projections and
// certify local linear convergence (rate and basin radius) ahead of time.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "sparsemap/cli.hpp"

namespace {

void add_common(CLI::App* cmd, sparsemap::cli::CommonOptions& opt, bool with_seed = true) {
  cmd->add_option("--tol", opt.tol, "residual tolerance on ||a_k - b_k||")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", opt.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  if (with_seed) cmd->add_option("--seed", opt.seed, "seed for randomized choices");
  cmd->add_option("--trace", opt.trace_path, "write the iterate trace CSV to this path");
  cmd->add_option("--json", opt.json_path, "write the JSON output to this path instead of stdout");
  cmd->add_option("--delta", opt.delta, "certificate radius in (0, delta_bar]");
  cmd->add_option("--max-enum", opt.max_enum, "cap on enumerated supports")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse affine feasibility by alternating projections, with "
               "a-priori linear-convergence certificates"};
  app.require_subcommand(1);

  sparsemap::cli::CommonOptions opt;

  // solve
  std::string solve_instance, solve_start = "random";
  CLI::App* solve = app.add_subcommand("solve", "run alternating projections on an instance");
  solve->add_option("instance", solve_instance, "instance JSON file")->required();
  solve->add_option("--start", solve_start, "comma-separated start vector, or \"random\"");
  add_common(solve, opt);

  // certify
  std::string certify_instance;
  std::optional<std::string> certify_at;
  CLI::App* cert = app.add_subcommand("certify", "certificate at a feasible point");
  cert->add_option("instance", certify_instance, "instance JSON file")->required();
  cert->add_option("--at", certify_at,
                   "comma-separated feasible point (default: planted_solution)");
  add_common(cert, opt);

  // example
  int example_starts = 100;
  std::string example_solution = "x";
  CLI::App* example = app.add_subcommand(
      "example", "reproduce the worked 3-dimensional example end to end");
  example->add_option("--starts", example_starts, "number of seeded runs")
      ->check(CLI::PositiveNumber);
  example->add_option("--solution", example_solution, "which solution to run around: x or y")
      ->check(CLI::IsMember({"x", "y"}));
  add_common(example, opt);

  // gen
  int gen_n = 0, gen_m = 0, gen_s = 0, gen_k = 0;
  std::uint64_t gen_seed = 0;
  std::optional<std::string> gen_out;
  CLI::App* gen = app.add_subcommand("gen", "generate a seeded random instance");
  gen->add_option("n", gen_n, "ambient dimension")->required();
  gen->add_option("m", gen_m, "number of equations (m < n)")->required();
  gen->add_option("s", gen_s, "sparsity bound")->required();
  gen->add_option("k", gen_k, "nonzeros of the planted solution (k <= s)")->required();
  gen->add_option("seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "write the instance here instead of stdout");

  // bench
  int bench_count = 0, bench_n = 0, bench_m = 0, bench_s = 0;
  std::uint64_t bench_seed = 0;
  std::optional<std::string> bench_out;
  CLI::App* bench = app.add_subcommand(
      "bench", "batch of generated instances checked against their certificates");
  bench->add_option("count", bench_count, "number of instances")->required();
  bench->add_option("n", bench_n, "ambient dimension")->required();
  bench->add_option("m", bench_m, "number of equations")->required();
  bench->add_option("s", bench_s, "sparsity bound")->required();
  bench->add_option("seed", bench_seed, "base seed")->required();
  bench->add_option("--out", bench_out, "write the CSV here instead of stdout");
  add_common(bench, opt, /*with_seed=*/false);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return sparsemap::cli::run_solve(solve_instance, solve_start, opt, std::cout, std::cerr);
  if (cert->parsed())
    return sparsemap::cli::run_certify(certify_instance, certify_at, opt, std::cout, std::cerr);
  if (example->parsed())
    return sparsemap::cli::run_example(example_starts, example_solution == "y" ? 'y' : 'x', opt,
                                       std::cout, std::cerr);
  if (gen->parsed())
    return sparsemap::cli::run_gen(gen_n, gen_m, gen_s, gen_k, gen_seed, gen_out, std::cout,
                                   std::cerr);
  if (bench->parsed())
    return sparsemap::cli::run_bench(bench_count, bench_n, bench_m, bench_s, bench_seed,
                                     bench_out, opt, std::cout, std::cerr);
  return 1;
}
