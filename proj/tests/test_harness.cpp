// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mortau/harness.hpp"
#include "mortau/models.hpp"
#include "oracles.hpp"

using namespace mortau;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("mortau_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "mortau");
  std::vector<char *> argv;
  for (std::string &a : args)
  {
    argv.push_back(a.data());
  }
  // Keep the test log readable.
  std::ostringstream sink;
  auto *old_out = std::cout.rdbuf(sink.rdbuf());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  return code;
}

ResultRow sample_row()
{
  ResultRow r;
  r.model = "synthetic-8-1x1-1";
  r.algorithm = "lt-irka";
  r.tau = 0.1;
  r.order = 4;
  r.abs_error = 1.2345678901234567e-9;
  r.rel_error = 3.0e-11;
  r.error_method = "quadrature";
  r.iterations = 17;
  r.converged = true;
  r.status = "converged";
  r.wall_time_s = 0.25;
  r.max_rt_residual = 1e-12;
  r.max_bitangential_residual = 2.5e-3;
  r.message = "a, \"quoted\"\nmessage";
  return r;
}

}  // namespace

TEST(ParseMatrix, DenseWhitespaceAndCommas)
{
  const Matrix M = parse_matrix("# comment\n1 2 3\n4,5,6\n\n% another\n7 8e-1 -9\n");
  Matrix E(3, 3);
  E << 1, 2, 3, 4, 5, 6, 7, 0.8, -9;
  EXPECT_EQ(M, E);
}

TEST(ParseMatrix, MatrixMarketCoordinateSymmetric)
{
  const Matrix M = parse_matrix("%%MatrixMarket matrix coordinate real symmetric\n"
                                "% comment\n"
                                "3 3 3\n"
                                "1 1 2.0\n"
                                "3 1 -1.5\n"
                                "2 2 4\n");
  Matrix E = Matrix::Zero(3, 3);
  E(0, 0) = 2.0;
  E(1, 1) = 4.0;
  E(2, 0) = E(0, 2) = -1.5;
  EXPECT_EQ(M, E);
}

TEST(ParseMatrix, MatrixMarketArraySkewSymmetric)
{
  const Matrix M = parse_matrix("%%MatrixMarket matrix array real skew-symmetric\n"
                                "3 3\n1\n2\n3\n");
  Matrix E = Matrix::Zero(3, 3);
  E(1, 0) = 1;
  E(2, 0) = 2;
  E(2, 1) = 3;
  E -= E.transpose().eval();
  EXPECT_EQ(M, E);
}

TEST(ParseMatrix, ErrorsCarryPosition)
{
  try
  {
    parse_matrix("1 2\n3 x\n", "m.txt");
    FAIL() << "expected ParseError";
  }
  catch (const ParseError &e)
  {
    EXPECT_EQ(e.file(), "m.txt");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
  EXPECT_THROW(parse_matrix("1 2\n3\n"), ParseError);
  EXPECT_THROW(parse_matrix(""), ParseError);
  EXPECT_THROW(parse_matrix("1 inf\n"), ParseError);
  EXPECT_THROW(parse_matrix("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
               ParseError);
  EXPECT_THROW(parse_matrix("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
               ParseError);
  EXPECT_THROW(parse_matrix("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
               ParseError);
}

TEST(MatrixMarket, RoundTripIsExact)
{
  oracle::Generator g(81);
  const Matrix M = g.matrix(5, 3) * 1e-7;
  EXPECT_EQ(parse_matrix(format_matrix_market(M)), M);
  const fs::path dir = scratch_dir("mm");
  write_matrix_market((dir / "M.mtx").string(), M);
  EXPECT_EQ(read_matrix((dir / "M.mtx").string()), M);
  EXPECT_THROW(read_matrix((dir / "missing.mtx").string()), InvalidArgument);
}

TEST(LoadSystem, Sources)
{
  const StateSpaceSystem syn = load_system("synthetic:12:2:3:9");
  EXPECT_EQ(syn.order(), 12);
  EXPECT_EQ(syn.inputs(), 2);
  EXPECT_EQ(syn.outputs(), 3);
  EXPECT_EQ(syn.A(), synthetic_system(12, 2, 3, 9).A());
  EXPECT_EQ(load_system("synthetic:6").inputs(), 1);
  EXPECT_EQ(load_system("fom").order(), 1006);
  EXPECT_THROW(load_system("synthetic:x"), InvalidArgument);
  EXPECT_THROW(load_system("no-such-model"), InvalidArgument);

  const fs::path dir = scratch_dir("load");
  save_system(syn, (dir / "sys").string());
  const StateSpaceSystem back = load_system((dir / "sys").string());
  EXPECT_EQ(back.A(), syn.A());
  EXPECT_EQ(back.B(), syn.B());
  EXPECT_EQ(back.C(), syn.C());

  const std::string files = (dir / "sys" / "A.mtx").string() + "," +
                            (dir / "sys" / "B.mtx").string() + "," +
                            (dir / "sys" / "C.mtx").string();
  EXPECT_EQ(load_system(files).C(), syn.C());

  // Mismatched dimensions surface as a DimensionMismatch.
  write_matrix_market((dir / "sys" / "B.mtx").string(), Matrix::Ones(5, 1));
  EXPECT_THROW(load_system((dir / "sys").string()), DimensionMismatch);
}

TEST(ResultRows, CsvRoundTrip)
{
  ResultRow failed;
  failed.model = "m";
  failed.algorithm = "irka";
  failed.tau = 2.0;
  failed.order = 3;
  failed.abs_error = std::numeric_limits<double>::quiet_NaN();
  failed.rel_error = std::numeric_limits<double>::quiet_NaN();
  failed.status = "failed";
  failed.message = "singular shift";
  const std::vector<ResultRow> rows{sample_row(), failed};
  const std::string text = to_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), csv_header());
  const std::vector<ResultRow> back = rows_from_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(same_fields(back[0], rows[0]));
  EXPECT_TRUE(same_fields(back[1], rows[1]));
  EXPECT_TRUE(back[1].failed());
  EXPECT_FALSE(back[0].max_lt_residual.has_value());
  EXPECT_EQ(to_csv(back), text);
}

TEST(ResultRows, JsonRoundTrip)
{
  const std::vector<ResultRow> rows{sample_row()};
  const std::vector<ResultRow> back = rows_from_json(to_json(rows));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(same_fields(back[0], rows[0]));
  EXPECT_EQ(to_json(back), to_json(rows));
}

TEST(ResultRows, MalformedInput)
{
  EXPECT_THROW(rows_from_csv(""), ParseError);
  EXPECT_THROW(rows_from_csv("model,algorithm\nx,y\n"), ParseError);
  std::string text = to_csv({sample_row()});
  text.replace(text.find("\n1,") + 1, 1, "9");
  EXPECT_THROW(rows_from_csv(text), ParseError);
  EXPECT_THROW(rows_from_json("{"), ParseError);
  EXPECT_THROW(rows_from_json("{\"schema_version\": 99, \"rows\": []}"), ParseError);
}

TEST(BenchmarkSpec, ParseAndValidate)
{
  const BenchmarkSpec spec = parse_benchmark_spec(R"({
    "model_source": "synthetic:10", "reduced_order": 2, "horizons": [0.5, 1],
    "algorithms": ["irka", "lt-irka"], "tolerance": 1e-6, "seed": 4})");
  EXPECT_EQ(spec.model_source, "synthetic:10");
  EXPECT_EQ(spec.reduced_order, 2);
  EXPECT_EQ(spec.horizons, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(spec.seed, 4u);
  EXPECT_EQ(spec.tolerance, 1e-6);
  EXPECT_EQ(spec.max_iterations, 200);

  EXPECT_THROW(parse_benchmark_spec("[1]"), ParseError);
  EXPECT_THROW(parse_benchmark_spec("{bad"), ParseError);
  EXPECT_THROW(parse_benchmark_spec(R"({"model_source": "fom", "reduced_order": 2,
      "horizons": [1], "algorithms": ["newton"]})"),
               InvalidArgument);
  EXPECT_THROW(parse_benchmark_spec(R"({"model_source": "fom", "reduced_order": 2,
      "horizons": [-1], "algorithms": ["irka"]})"),
               InvalidArgument);
  EXPECT_THROW(parse_benchmark_spec(R"({"model_source": "fom", "reduced_order": 2,
      "horizons": [1], "algorithms": ["irka"], "colour": 3})"),
               InvalidArgument);
  EXPECT_TRUE(is_known_algorithm("tl-tsia"));
  EXPECT_FALSE(is_known_algorithm("bt"));
}

TEST(RunBenchmark, WritesTablesAndTrajectories)
{
  BenchmarkSpec spec;
  spec.model_source = "synthetic:16:1:1:3";
  spec.reduced_order = 4;
  spec.horizons = {0.5, 2.0};
  spec.algorithms = {"irka", "lt-irka"};
  spec.seed = 3;
  spec.output_path = scratch_dir("bench").string();
  const BenchmarkOutcome a = run_benchmark(spec);
  ASSERT_EQ(a.rows.size(), 4u);
  for (const ResultRow &row : a.rows)
  {
    EXPECT_EQ(row.order, 4);
    if (!row.failed())
    {
      EXPECT_GT(row.rel_error, 0.0);
      EXPECT_LT(row.rel_error, 1.0);
    }
  }
  EXPECT_TRUE(fs::exists(fs::path(spec.output_path) / "results.csv"));
  EXPECT_TRUE(fs::exists(fs::path(spec.output_path) / "results.json"));

  // Reproducible up to wall time.
  spec.output_path.clear();
  const BenchmarkOutcome b = run_benchmark(spec);
  ASSERT_EQ(b.rows.size(), a.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k)
  {
    ResultRow x = a.rows[k], y = b.rows[k];
    x.wall_time_s = y.wall_time_s = 0.0;
    EXPECT_TRUE(same_fields(x, y));
  }
  EXPECT_TRUE(b.written_files.empty());

  std::size_t trajectories = 0;
  for (const std::string &f : a.written_files)
  {
    if (f.find("results.") != std::string::npos)
    {
      continue;
    }
    ++trajectories;
    std::ifstream in(f);
    std::string line;
    std::size_t samples = 0;
    while (std::getline(in, line))
    {
      if (!line.empty() && line[0] != '#' && line[0] != 't')
      {
        ++samples;
      }
    }
    EXPECT_EQ(samples, 1000u) << f;
  }
  EXPECT_GE(trajectories, 1u);
}

TEST(RunAlgorithm, FailureBecomesRow)
{
  const StateSpaceSystem full = synthetic_system(20, 1, 1, 2);
  ReductionConfig c;
  c.reduced_order = 4;
  c.tau = 1.0;
  c.tolerance = 1e-15;
  c.max_iterations = 1;
  const HorizonContext ctx(full, 1.0);
  const RunOutput out = run_algorithm(full, "irka", c, ctx);
  EXPECT_EQ(out.row.status, "max_iterations");
  EXPECT_FALSE(out.row.converged);
  EXPECT_TRUE(out.model.has_value());
  EXPECT_TRUE(std::isfinite(out.row.rel_error));
}

TEST(Environment, SeedFallback)
{
  ::unsetenv("MORTAU_SEED");
  EXPECT_EQ(seed_from_environment(5), 5u);
  ::setenv("MORTAU_SEED", "77", 1);
  EXPECT_EQ(seed_from_environment(5), 77u);
  ::setenv("MORTAU_SEED", "junk", 1);
  EXPECT_EQ(seed_from_environment(5), 5u);
  ::unsetenv("MORTAU_SEED");
}

TEST(Cli, ExitCodes)
{
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_EQ(run_cli({"frobnicate"}), 2);
  EXPECT_EQ(run_cli({"reduce", "--model", "synthetic:10", "--order", "2"}), 2);
  EXPECT_EQ(run_cli({"reduce", "--model", "synthetic:10", "--order", "20", "--tau", "1"}), 2);
  EXPECT_EQ(run_cli({"reduce", "--model", "synthetic:16:1:1:3", "--order", "4", "--tau", "1",
                     "--algo", "irka", "--seed", "3"}),
            0);
  EXPECT_EQ(run_cli({"verify", "--suite", "theorem2", "--seed", "1"}), 0);
  EXPECT_EQ(run_cli({"verify", "--suite", "bogus"}), 2);
  EXPECT_EQ(run_cli({"bench", "/nonexistent/spec.json"}), 2);
}

TEST(Cli, ReduceSaveAndResiduals)
{
  const fs::path dir = scratch_dir("cli");
  const std::string rom = (dir / "rom").string(), out = (dir / "row.json").string();
  ASSERT_EQ(run_cli({"reduce", "--model", "synthetic:16:1:1:3", "--order", "4", "--tau", "0.5",
                     "--algo", "lt-irka", "--seed", "3", "--save-model", rom, "--format",
                     "json", "--out", out}),
            0);
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::vector<ResultRow> rows = rows_from_json(buf.str());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].algorithm, "lt-irka");
  EXPECT_EQ(load_system(rom).order(), 4);
  EXPECT_EQ(run_cli({"residuals", "--model", "synthetic:16:1:1:3", "--reduced", rom, "--tau",
                     "0.5"}),
            0);
}
