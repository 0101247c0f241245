// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_HARNESS_HPP
#define MORTAU_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mortau/metrics.hpp"
#include "mortau/reducers.hpp"

namespace mortau
{

//
// Matrix files
//

// Reads a Matrix Market file (coordinate or array; real/integer; general, symmetric or
// skew-symmetric) or, when the first line is not a Matrix Market banner, a dense text
// matrix with one row per line and entries separated by whitespace or commas. Lines
// starting with '%' or '#' are comments. Throws ParseError with 1-based line/column.
Matrix read_matrix(const std::string &path);
Matrix parse_matrix(const std::string &text, const std::string &name = "<text>");

// Array-format Matrix Market with round-trip precision.
void write_matrix_market(const std::string &path, const Matrix &M);
std::string format_matrix_market(const Matrix &M);

//
// Models
//

// Accepted forms:
//   fom                          built-in order-1006 test system
//   synthetic:n[:m[:p[:seed]]]   seeded stable random system
//   A_file,B_file,C_file         three matrix files
//   <directory>                  containing A, B, C with extension .mtx, .txt or .csv
//   <name>                       a directory <name> under $MORTAU_DATA_DIR (default: the
//                                data/ folder of the source tree)
StateSpaceSystem load_system(const std::string &source);

// Writes A.mtx, B.mtx, C.mtx into `directory` (created if missing).
void save_system(const StateSpaceSystem &sys, const std::string &directory);

std::string data_directory();

//
// Results
//

inline constexpr int kSchemaVersion = 1;

struct ResultRow
{
  std::string model;
  std::string algorithm;
  double tau = 0.0;
  Eigen::Index order = 0;
  double abs_error = 0.0;  // NaN when no model was produced
  double rel_error = 0.0;
  std::string error_method;  // "vanloan", "quadrature" or empty
  int iterations = 0;
  bool converged = false;
  std::string status;  // converged, max_iterations, failed
  double wall_time_s = 0.0;
  std::optional<double> max_rt_residual;
  std::optional<double> max_lt_residual;
  std::optional<double> max_bitangential_residual;
  std::string message;  // failure reason, empty otherwise

  bool failed() const { return status == "failed"; }
};

bool same_fields(const ResultRow &a, const ResultRow &b);

// Fixed header:
// schema_version,model,algorithm,tau,order,abs_error,rel_error,error_method,iterations,
// converged,status,wall_time_s,max_rt_residual,max_lt_residual,max_bitangential_residual,
// message
std::string csv_header();
std::string to_csv(const std::vector<ResultRow> &rows);
std::vector<ResultRow> rows_from_csv(const std::string &text);
std::string to_json(const std::vector<ResultRow> &rows);
std::vector<ResultRow> rows_from_json(const std::string &text);

//
// Benchmarks
//

struct BenchmarkSpec
{
  std::string model_source;
  Eigen::Index reduced_order = 0;
  std::vector<double> horizons;
  std::vector<std::string> algorithms;  // lt-irka, irka, tl-tsia
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
  std::string output_path;  // directory; empty writes nothing
  int max_iterations = 200;

  void validate() const;  // throws InvalidArgument
};

// JSON object whose keys match the field names above.
BenchmarkSpec parse_benchmark_spec(const std::string &text);
BenchmarkSpec read_benchmark_spec(const std::string &path);

bool is_known_algorithm(const std::string &name);

// Full-system data reused across rows at one horizon.
class HorizonContext
{
public:
  HorizonContext(const StateSpaceSystem &full, double tau);

  const H2TauErrorEvaluator &errors() const { return errors_; }
  const LimitedTransferEvaluator &transfer() const { return transfer_; }

private:
  H2TauErrorEvaluator errors_;
  LimitedTransferEvaluator transfer_;
};

// Scores a reduced model at the context's horizon into `row` (errors and residuals).
void score_row(const HorizonContext &ctx, const ReducedModel &model, ResultRow &row);

struct RunOutput
{
  ResultRow row;
  std::optional<ReducedModel> model;
};

// One algorithm at one horizon. Never throws for algorithm failures: they become a row with
// status "failed" (or "max_iterations" with the best iterate scored).
RunOutput run_algorithm(const StateSpaceSystem &full, const std::string &algorithm,
                        const ReductionConfig &config, const HorizonContext &ctx);

struct BenchmarkOutcome
{
  std::vector<ResultRow> rows;
  std::vector<std::string> written_files;
};

// Runs every (algorithm, horizon) pair. With an output_path, writes results.csv,
// results.json and one trajectory file per produced model (columns: t error_norm, 1000
// uniform samples of ||g(t) - g_hat(t)||_F over [0, tau]).
BenchmarkOutcome run_benchmark(const BenchmarkSpec &spec);

std::string trajectory_text(const std::vector<std::pair<double, double>> &samples);

// Seed from MORTAU_SEED when set and parseable, else `fallback`.
std::uint64_t seed_from_environment(std::uint64_t fallback);

int cli_main(int argc, char **argv);

}  // namespace mortau

#endif  // MORTAU_HARNESS_HPP
