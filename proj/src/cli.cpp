// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mortau/harness.hpp"
#include "mortau/verification.hpp"

namespace mortau
{

namespace
{

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void emit(const std::string &text, const std::string &out_path)
{
  std::cout << text;
  if (!out_path.empty())
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << text))
    {
      throw InvalidArgument("cannot write '" + out_path + "'");
    }
  }
}

std::string format_rows(const std::vector<ResultRow> &rows, const std::string &format)
{
  return format == "json" ? to_json(rows) : to_csv(rows);
}

std::string residual_text(const OptimalityResiduals &res, const std::string &format)
{
  auto cell = [](const std::optional<double> &v) {
    if (!v)
    {
      return std::string("undefined");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return std::string(buf);
  };
  if (format == "json")
  {
    nlohmann::json rows = nlohmann::json::array();
    auto value = [](const std::optional<double> &v) -> nlohmann::json {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    for (std::size_t k = 0; k < res.shifts.size(); ++k)
    {
      rows.push_back({{"shift_re", res.shifts[k].real()},
                      {"shift_im", res.shifts[k].imag()},
                      {"right_tangential", value(res.right_tangential[k])},
                      {"left_tangential", value(res.left_tangential[k])},
                      {"bitangential", value(res.bitangential[k])}});
    }
    return nlohmann::json{{"schema_version", kSchemaVersion}, {"residuals", rows}}.dump(2) +
           "\n";
  }
  std::ostringstream os;
  os << "k,shift_re,shift_im,right_tangential,left_tangential,bitangential\n";
  for (std::size_t k = 0; k < res.shifts.size(); ++k)
  {
    char shift[80];
    std::snprintf(shift, sizeof shift, "%.17g,%.17g", res.shifts[k].real(),
                  res.shifts[k].imag());
    os << k << "," << shift << "," << cell(res.right_tangential[k]) << ","
       << cell(res.left_tangential[k]) << "," << cell(res.bitangential[k]) << "\n";
  }
  return os.str();
}

}  // namespace

int cli_main(int argc, char **argv)
{
  CLI::App app{"Time-limited H2-optimal model order reduction (LT-IRKA, IRKA, TL-TSIA)"};
  app.require_subcommand(1);

  std::string model, algo = "lt-irka", out, format = "csv", save_model, trajectory;
  std::string reduced, spec_path, suite = "all";
  Eigen::Index order = 0;
  double tau = 0.0, tol = 1e-5;
  int max_iters = 200;
  std::uint64_t seed = 0;

  auto add_format = [&](CLI::App *cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", out, "Also write the output to this file");
  };

  CLI::App *reduce = app.add_subcommand("reduce", "Reduce one model and print its result row");
  reduce->add_option("--model", model, "Model source (fom, synthetic:n[:m[:p[:seed]]], "
                                       "directory, A,B,C files or data name)")
      ->required();
  reduce->add_option("--order", order, "Reduced order r")->required();
  CLI::Option *tau_opt = reduce->add_option("--tau", tau, "Time horizon tau");
  reduce->add_option("--algo", algo, "Algorithm")
      ->check(CLI::IsMember({"lt-irka", "irka", "tl-tsia"}))
      ->capture_default_str();
  reduce->add_option("--tol", tol, "Shift-change tolerance")->capture_default_str();
  reduce->add_option("--max-iters", max_iters, "Iteration limit")->capture_default_str();
  CLI::Option *seed_reduce = reduce->add_option("--seed", seed, "Random seed (else MORTAU_SEED)");
  reduce->add_option("--save-model", save_model, "Write the reduced A, B, C to this directory");
  reduce->add_option("--trajectory", trajectory, "Write the impulse-error trajectory here");
  add_format(reduce);

  CLI::App *bench = app.add_subcommand("bench", "Run a benchmark specification file");
  bench->add_option("spec,--spec", spec_path, "Benchmark spec (JSON)")->required();
  CLI::Option *bench_out = bench->add_option("--output-path", out, "Override output_path");
  bench->add_option("--format", format, "Format of the table printed to stdout")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  CLI::App *verify = app.add_subcommand("verify", "Run the theorem verification suite");
  verify->add_option("--suite", suite, "prop1, theorem2, theorem3, trend or all")
      ->check(CLI::IsMember({"prop1", "theorem2", "theorem3", "trend", "all"}))
      ->capture_default_str();
  CLI::Option *seed_verify = verify->add_option("--seed", seed, "Suite seed (else MORTAU_SEED)");

  CLI::App *residuals =
      app.add_subcommand("residuals", "Print optimality residuals of a stored reduced model");
  residuals->add_option("--model", model, "Full model source")->required();
  residuals->add_option("--reduced", reduced, "Reduced model source (directory or A,B,C)")
      ->required();
  residuals->add_option("--tau", tau, "Time horizon tau")->required();
  add_format(residuals);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try
  {
    if (reduce->parsed())
    {
      if (tau_opt->count() == 0)
      {
        std::cerr << "reduce: --tau is required (the H2(tau) error is always reported)\n"
                  << reduce->help();
        return kExitUsage;
      }
      ReductionConfig config;
      config.reduced_order = order;
      config.tau = tau;
      config.tolerance = tol;
      config.max_iterations = max_iters;
      config.seed = seed_reduce->count() ? seed : seed_from_environment(0);
      const StateSpaceSystem full = load_system(model);
      config.validate(full.order(), true);
      const HorizonContext ctx(full, tau);
      const RunOutput run = run_algorithm(full, algo, config, ctx);
      if (run.model && !save_model.empty())
      {
        save_system(run.model->system, save_model);
      }
      if (run.model && !trajectory.empty())
      {
        std::ofstream f(trajectory);
        f << trajectory_text(ctx.errors().trajectory(*run.model));
      }
      emit(format_rows({run.row}, format), out);
      return run.row.failed() ? kExitFailure : 0;
    }
    if (bench->parsed())
    {
      BenchmarkSpec spec = read_benchmark_spec(spec_path);
      if (bench_out->count())
      {
        spec.output_path = out;
      }
      const BenchmarkOutcome outcome = run_benchmark(spec);
      std::cout << format_rows(outcome.rows, format);
      for (const std::string &f : outcome.written_files)
      {
        std::cerr << "wrote " << f << "\n";
      }
      for (const ResultRow &row : outcome.rows)
      {
        if (row.failed())
        {
          return kExitFailure;
        }
      }
      return 0;
    }
    if (verify->parsed())
    {
      const std::uint64_t s = seed_verify->count() ? seed : seed_from_environment(1);
      const std::vector<TheoremCheckResult> results = run_suite(suite, s);
      bool ok = true;
      for (const TheoremCheckResult &r : results)
      {
        std::printf("%s %-9s discrepancy=%.3e tol=%.1e  %s\n", r.pass ? "PASS" : "FAIL",
                    r.theorem_id.c_str(), r.max_relative_discrepancy, r.tolerance_used,
                    r.instance_description.c_str());
        ok = ok && r.pass;
      }
      return ok ? 0 : kExitFailure;
    }
    if (residuals->parsed())
    {
      const StateSpaceSystem full = load_system(model);
      const ReducedModel rom{load_system(reduced), false};
      emit(residual_text(optimality_residuals(full, rom, tau), format), out);
      return 0;
    }
  }
  catch (const InvalidArgument &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (const ParseError &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mortau
