// SPDX-License-Identifier: Apache-2.0

#include "mortau/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mortau/models.hpp"

#ifndef MORTAU_DEFAULT_DATA_DIR
#define MORTAU_DEFAULT_DATA_DIR "data"
#endif

namespace mortau
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InvalidArgument("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text)
{
  const fs::path p(path);
  if (p.has_parent_path())
  {
    fs::create_directories(p.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
  {
    throw InvalidArgument("cannot write '" + path + "'");
  }
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string format_double(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Token
{
  std::string text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(const std::string &line, bool commas)
{
  std::vector<Token> out;
  std::size_t i = 0;
  auto separator = [&](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || (commas && c == ',');
  };
  while (i < line.size())
  {
    while (i < line.size() && separator(line[i]))
    {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && !separator(line[i]))
    {
      ++i;
    }
    if (i > start)
    {
      out.push_back({line.substr(start, i - start), start + 1});
    }
  }
  return out;
}

struct Lines
{
  std::vector<std::string> text;

  explicit Lines(const std::string &all)
  {
    std::string cur;
    std::istringstream in(all);
    while (std::getline(in, cur))
    {
      if (!cur.empty() && cur.back() == '\r')
      {
        cur.pop_back();
      }
      text.push_back(cur);
    }
  }
};

bool is_comment_or_blank(const std::string &line)
{
  const auto pos = line.find_first_not_of(" \t");
  return pos == std::string::npos || line[pos] == '%' || line[pos] == '#';
}

double parse_number(const Token &tok, const std::string &name, std::size_t line)
{
  const char *begin = tok.text.c_str();
  char *end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
  {
    throw ParseError(name, line, tok.column, "expected a number, found '" + tok.text + "'");
  }
  if (!std::isfinite(v))
  {
    throw ParseError(name, line, tok.column, "non-finite entry '" + tok.text + "'");
  }
  return v;
}

long parse_count(const Token &tok, const std::string &name, std::size_t line)
{
  const char *begin = tok.text.c_str();
  char *end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0' || v < 0)
  {
    throw ParseError(name, line, tok.column,
                     "expected a nonnegative integer, found '" + tok.text + "'");
  }
  return v;
}

Matrix parse_matrix_market(const Lines &lines, const std::string &name)
{
  const std::vector<Token> banner = tokenize(lines.text[0], false);
  if (banner.size() < 5)
  {
    throw ParseError(name, 1, 1, "incomplete Matrix Market banner");
  }
  const std::string object = lower(banner[1].text);
  const std::string format = lower(banner[2].text);
  const std::string field = lower(banner[3].text);
  const std::string symmetry = lower(banner[4].text);
  if (object != "matrix")
  {
    throw ParseError(name, 1, banner[1].column, "unsupported object '" + banner[1].text + "'");
  }
  if (format != "coordinate" && format != "array")
  {
    throw ParseError(name, 1, banner[2].column, "unsupported format '" + banner[2].text + "'");
  }
  if (field != "real" && field != "integer" && field != "double")
  {
    throw ParseError(name, 1, banner[3].column,
                     "unsupported field '" + banner[3].text + "' (real entries required)");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
  {
    throw ParseError(name, 1, banner[4].column,
                     "unsupported symmetry '" + banner[4].text + "'");
  }
  const bool coordinate = format == "coordinate";
  const bool mirrored = symmetry != "general";
  const double mirror_sign = symmetry == "skew-symmetric" ? -1.0 : 1.0;

  std::size_t ln = 1;
  while (ln < lines.text.size() && is_comment_or_blank(lines.text[ln]))
  {
    ++ln;
  }
  if (ln >= lines.text.size())
  {
    throw ParseError(name, ln, 1, "missing size line");
  }
  const std::vector<Token> size = tokenize(lines.text[ln], false);
  if (size.size() != (coordinate ? 3u : 2u))
  {
    throw ParseError(name, ln + 1, 1,
                     coordinate ? "size line must hold rows, cols, nnz"
                                : "size line must hold rows, cols");
  }
  const long rows = parse_count(size[0], name, ln + 1);
  const long cols = parse_count(size[1], name, ln + 1);
  if (rows < 1 || cols < 1)
  {
    throw ParseError(name, ln + 1, 1, "matrix dimensions must be positive");
  }
  if (mirrored && rows != cols)
  {
    throw ParseError(name, ln + 1, 1, "symmetric storage requires a square matrix");
  }
  Matrix M = Matrix::Zero(rows, cols);
  ++ln;

  if (coordinate)
  {
    const long nnz = parse_count(size[2], name, ln);
    long seen = 0;
    for (; ln < lines.text.size(); ++ln)
    {
      if (is_comment_or_blank(lines.text[ln]))
      {
        continue;
      }
      const std::vector<Token> t = tokenize(lines.text[ln], false);
      if (t.size() != 3)
      {
        throw ParseError(name, ln + 1, t.empty() ? 1 : t.front().column,
                         "coordinate entry needs row, column and value");
      }
      const long i = parse_count(t[0], name, ln + 1);
      const long j = parse_count(t[1], name, ln + 1);
      if (i < 1 || i > rows)
      {
        throw ParseError(name, ln + 1, t[0].column, "row index out of range");
      }
      if (j < 1 || j > cols)
      {
        throw ParseError(name, ln + 1, t[1].column, "column index out of range");
      }
      if (seen == nnz)
      {
        throw ParseError(name, ln + 1, 1, "more entries than declared");
      }
      const double v = parse_number(t[2], name, ln + 1);
      M(i - 1, j - 1) += v;
      if (mirrored && i != j)
      {
        M(j - 1, i - 1) += mirror_sign * v;
      }
      ++seen;
    }
    if (seen != nnz)
    {
      throw ParseError(name, lines.text.size(), 1,
                       "declared " + std::to_string(nnz) + " entries, found " +
                           std::to_string(seen));
    }
    return M;
  }

  // Array format: column-major; symmetric storage lists the lower triangle only.
  std::vector<std::pair<long, long>> slots;
  for (long j = 0; j < cols; ++j)
  {
    const long first = !mirrored ? 0 : (symmetry == "skew-symmetric" ? j + 1 : j);
    for (long i = first; i < rows; ++i)
    {
      slots.emplace_back(i, j);
    }
  }
  std::size_t next = 0;
  for (; ln < lines.text.size(); ++ln)
  {
    if (is_comment_or_blank(lines.text[ln]))
    {
      continue;
    }
    for (const Token &tok : tokenize(lines.text[ln], false))
    {
      if (next == slots.size())
      {
        throw ParseError(name, ln + 1, tok.column, "more values than the declared size");
      }
      const double v = parse_number(tok, name, ln + 1);
      const auto [i, j] = slots[next++];
      M(i, j) = v;
      if (mirrored && i != j)
      {
        M(j, i) = mirror_sign * v;
      }
    }
  }
  if (next != slots.size())
  {
    throw ParseError(name, lines.text.size(), 1,
                     "expected " + std::to_string(slots.size()) + " values, found " +
                         std::to_string(next));
  }
  return M;
}

Matrix parse_dense(const Lines &lines, const std::string &name)
{
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (std::size_t ln = 0; ln < lines.text.size(); ++ln)
  {
    if (is_comment_or_blank(lines.text[ln]))
    {
      continue;
    }
    const std::vector<Token> t = tokenize(lines.text[ln], true);
    if (!rows.empty() && t.size() != width)
    {
      throw ParseError(name, ln + 1, t.empty() ? 1 : t.back().column,
                       "row has " + std::to_string(t.size()) + " entries, expected " +
                           std::to_string(width));
    }
    width = t.size();
    std::vector<double> row;
    row.reserve(t.size());
    for (const Token &tok : t)
    {
      row.push_back(parse_number(tok, name, ln + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
  {
    throw ParseError(name, 1, 1, "no matrix entries");
  }
  Matrix M(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    for (std::size_t j = 0; j < width; ++j)
    {
      M(i, j) = rows[i][j];
    }
  }
  return M;
}

}  // namespace

Matrix parse_matrix(const std::string &text, const std::string &name)
{
  const Lines lines(text);
  if (lines.text.empty())
  {
    throw ParseError(name, 1, 1, "empty input");
  }
  if (lower(lines.text[0]).rfind("%%matrixmarket", 0) == 0)
  {
    return parse_matrix_market(lines, name);
  }
  return parse_dense(lines, name);
}

Matrix read_matrix(const std::string &path) { return parse_matrix(read_file(path), path); }

std::string format_matrix_market(const Matrix &M)
{
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(M.rows()) + " " + std::to_string(M.cols()) + "\n";
  for (Eigen::Index j = 0; j < M.cols(); ++j)
  {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
    {
      out += format_double(M(i, j));
      out += '\n';
    }
  }
  return out;
}

void write_matrix_market(const std::string &path, const Matrix &M)
{
  write_file(path, format_matrix_market(M));
}

std::string data_directory()
{
  if (const char *env = std::getenv("MORTAU_DATA_DIR"); env && *env)
  {
    return env;
  }
  return MORTAU_DEFAULT_DATA_DIR;
}

namespace
{

std::string find_matrix_file(const fs::path &dir, const std::string &stem)
{
  for (const char *ext : {".mtx", ".txt", ".csv", ""})
  {
    for (const std::string &s : {stem, lower(stem)})
    {
      const fs::path p = dir / (s + ext);
      if (fs::is_regular_file(p))
      {
        return p.string();
      }
    }
  }
  throw InvalidArgument("no " + stem + " matrix file in '" + dir.string() + "'");
}

StateSpaceSystem load_directory(const fs::path &dir, const std::string &label)
{
  return StateSpaceSystem(read_matrix(find_matrix_file(dir, "A")),
                          read_matrix(find_matrix_file(dir, "B")),
                          read_matrix(find_matrix_file(dir, "C")), label);
}

long parse_field(const std::string &s, const std::string &source)
{
  char *end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || v < 0)
  {
    throw InvalidArgument("bad synthetic model spec '" + source + "'");
  }
  return v;
}

}  // namespace

StateSpaceSystem load_system(const std::string &source)
{
  if (source == "fom")
  {
    return fom_system();
  }
  if (source.rfind("synthetic:", 0) == 0)
  {
    std::vector<std::string> parts;
    std::stringstream ss(source.substr(10));
    for (std::string item; std::getline(ss, item, ':');)
    {
      parts.push_back(item);
    }
    if (parts.empty() || parts.size() > 4)
    {
      throw InvalidArgument("synthetic model spec is synthetic:n[:m[:p[:seed]]]");
    }
    const long n = parse_field(parts[0], source);
    const long m = parts.size() > 1 ? parse_field(parts[1], source) : 1;
    const long p = parts.size() > 2 ? parse_field(parts[2], source) : m;
    const long seed = parts.size() > 3 ? parse_field(parts[3], source) : 0;
    StateSpaceSystem sys = synthetic_system(n, m, p, static_cast<std::uint64_t>(seed));
    return StateSpaceSystem(sys.A(), sys.B(), sys.C(), source);
  }
  if (source.find(',') != std::string::npos)
  {
    std::vector<std::string> files;
    std::stringstream ss(source);
    for (std::string item; std::getline(ss, item, ',');)
    {
      files.push_back(item);
    }
    if (files.size() != 3)
    {
      throw InvalidArgument("expected three comma-separated files A,B,C");
    }
    return StateSpaceSystem(read_matrix(files[0]), read_matrix(files[1]),
                            read_matrix(files[2]), fs::path(files[0]).parent_path().filename());
  }
  if (fs::is_directory(source))
  {
    return load_directory(source, fs::path(source).lexically_normal().filename().string());
  }
  const fs::path named = fs::path(data_directory()) / source;
  if (!source.empty() && fs::is_directory(named))
  {
    return load_directory(named, source);
  }
  throw InvalidArgument("unknown model '" + source + "': not a built-in, file list or directory (" +
                        "data directory is '" + data_directory() + "')");
}

void save_system(const StateSpaceSystem &sys, const std::string &directory)
{
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_matrix_market((dir / "A.mtx").string(), sys.A());
  write_matrix_market((dir / "B.mtx").string(), sys.B());
  write_matrix_market((dir / "C.mtx").string(), sys.C());
}

//
// Result rows
//

namespace
{

bool same_double(double a, double b)
{
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool same_optional(const std::optional<double> &a, const std::optional<double> &b)
{
  return a.has_value() == b.has_value() && (!a || same_double(*a, *b));
}

const char *const kColumns[] = {"schema_version",
                                "model",
                                "algorithm",
                                "tau",
                                "order",
                                "abs_error",
                                "rel_error",
                                "error_method",
                                "iterations",
                                "converged",
                                "status",
                                "wall_time_s",
                                "max_rt_residual",
                                "max_lt_residual",
                                "max_bitangential_residual",
                                "message"};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

std::string csv_escape(const std::string &s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
  {
    return s;
  }
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"')
    {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

std::string optional_text(const std::optional<double> &v)
{
  return v ? format_double(*v) : std::string{};
}

// Splits CSV text into records honoring quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string &text)
{
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i)
  {
    const char c = text[i];
    if (quoted)
    {
      if (c == '"')
      {
        if (i + 1 < text.size() && text[i + 1] == '"')
        {
          cur += '"';
          ++i;
        }
        else
        {
          quoted = false;
        }
      }
      else
      {
        cur += c;
      }
      continue;
    }
    if (c == '"')
    {
      quoted = true;
      any = true;
    }
    else if (c == ',')
    {
      fields.push_back(std::move(cur));
      cur.clear();
      any = true;
    }
    else if (c == '\n' || c == '\r')
    {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
      {
        ++i;
      }
      if (any || !cur.empty())
      {
        fields.push_back(std::move(cur));
        records.push_back(std::move(fields));
      }
      fields.clear();
      cur.clear();
      any = false;
    }
    else
    {
      cur += c;
      any = true;
    }
  }
  if (any || !cur.empty())
  {
    fields.push_back(std::move(cur));
    records.push_back(std::move(fields));
  }
  return records;
}

double csv_double(const std::string &s, std::size_t line, std::size_t col)
{
  if (s == "nan")
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
  {
    throw ParseError("<csv>", line, col, "expected a number, found '" + s + "'");
  }
  return v;
}

std::optional<double> csv_optional(const std::string &s, std::size_t line, std::size_t col)
{
  if (s.empty())
  {
    return std::nullopt;
  }
  return csv_double(s, line, col);
}

json optional_json(const std::optional<double> &v)
{
  if (!v || !std::isfinite(*v))
  {
    return nullptr;
  }
  return *v;
}

json double_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double json_double(const json &j)
{
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::optional<double> json_optional(const json &j)
{
  if (j.is_null())
  {
    return std::nullopt;
  }
  return j.get<double>();
}

}  // namespace

bool same_fields(const ResultRow &a, const ResultRow &b)
{
  return a.model == b.model && a.algorithm == b.algorithm && same_double(a.tau, b.tau) &&
         a.order == b.order && same_double(a.abs_error, b.abs_error) &&
         same_double(a.rel_error, b.rel_error) && a.error_method == b.error_method &&
         a.iterations == b.iterations && a.converged == b.converged && a.status == b.status &&
         same_double(a.wall_time_s, b.wall_time_s) &&
         same_optional(a.max_rt_residual, b.max_rt_residual) &&
         same_optional(a.max_lt_residual, b.max_lt_residual) &&
         same_optional(a.max_bitangential_residual, b.max_bitangential_residual) &&
         a.message == b.message;
}

std::string csv_header()
{
  std::string out;
  for (std::size_t i = 0; i < kColumnCount; ++i)
  {
    out += (i ? "," : "");
    out += kColumns[i];
  }
  return out;
}

std::string to_csv(const std::vector<ResultRow> &rows)
{
  std::string out = csv_header() + "\n";
  for (const ResultRow &r : rows)
  {
    const std::string fields[] = {std::to_string(kSchemaVersion),
                                  csv_escape(r.model),
                                  csv_escape(r.algorithm),
                                  format_double(r.tau),
                                  std::to_string(r.order),
                                  format_double(r.abs_error),
                                  format_double(r.rel_error),
                                  csv_escape(r.error_method),
                                  std::to_string(r.iterations),
                                  r.converged ? "true" : "false",
                                  csv_escape(r.status),
                                  format_double(r.wall_time_s),
                                  optional_text(r.max_rt_residual),
                                  optional_text(r.max_lt_residual),
                                  optional_text(r.max_bitangential_residual),
                                  csv_escape(r.message)};
    for (std::size_t i = 0; i < kColumnCount; ++i)
    {
      out += (i ? "," : "");
      out += fields[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> rows_from_csv(const std::string &text)
{
  const auto records = parse_csv(text);
  if (records.empty())
  {
    throw ParseError("<csv>", 1, 1, "missing header");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records[0].size(); ++i)
  {
    index[records[0][i]] = i;
  }
  for (const char *name : kColumns)
  {
    if (!index.count(name))
    {
      throw ParseError("<csv>", 1, 1, std::string("missing column '") + name + "'");
    }
  }

  std::vector<ResultRow> rows;
  for (std::size_t k = 1; k < records.size(); ++k)
  {
    const auto &f = records[k];
    const std::size_t line = k + 1;
    if (f.size() != records[0].size())
    {
      throw ParseError("<csv>", line, 1, "wrong number of fields");
    }
    auto get = [&](const char *name) -> const std::string & { return f[index.at(name)]; };
    auto col = [&](const char *name) { return index.at(name) + 1; };
    if (get("schema_version") != std::to_string(kSchemaVersion))
    {
      throw ParseError("<csv>", line, col("schema_version"), "unsupported schema version");
    }
    ResultRow r;
    r.model = get("model");
    r.algorithm = get("algorithm");
    r.tau = csv_double(get("tau"), line, col("tau"));
    r.order = static_cast<Eigen::Index>(csv_double(get("order"), line, col("order")));
    r.abs_error = csv_double(get("abs_error"), line, col("abs_error"));
    r.rel_error = csv_double(get("rel_error"), line, col("rel_error"));
    r.error_method = get("error_method");
    r.iterations = static_cast<int>(csv_double(get("iterations"), line, col("iterations")));
    r.converged = get("converged") == "true";
    r.status = get("status");
    r.wall_time_s = csv_double(get("wall_time_s"), line, col("wall_time_s"));
    r.max_rt_residual = csv_optional(get("max_rt_residual"), line, col("max_rt_residual"));
    r.max_lt_residual = csv_optional(get("max_lt_residual"), line, col("max_lt_residual"));
    r.max_bitangential_residual =
        csv_optional(get("max_bitangential_residual"), line, col("max_bitangential_residual"));
    r.message = get("message");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_json(const std::vector<ResultRow> &rows)
{
  json arr = json::array();
  for (const ResultRow &r : rows)
  {
    arr.push_back({{"model", r.model},
                   {"algorithm", r.algorithm},
                   {"tau", r.tau},
                   {"order", r.order},
                   {"abs_error", double_json(r.abs_error)},
                   {"rel_error", double_json(r.rel_error)},
                   {"error_method", r.error_method},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"status", r.status},
                   {"wall_time_s", r.wall_time_s},
                   {"max_rt_residual", optional_json(r.max_rt_residual)},
                   {"max_lt_residual", optional_json(r.max_lt_residual)},
                   {"max_bitangential_residual", optional_json(r.max_bitangential_residual)},
                   {"message", r.message}});
  }
  json doc = {{"schema_version", kSchemaVersion}, {"rows", arr}};
  return doc.dump(2) + "\n";
}

std::vector<ResultRow> rows_from_json(const std::string &text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    throw ParseError("<json>", 1, e.byte, e.what());
  }
  try
  {
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
    {
      throw ParseError("<json>", 1, 1, "unsupported schema version");
    }
    std::vector<ResultRow> rows;
    for (const json &j : doc.at("rows"))
    {
      ResultRow r;
      r.model = j.at("model").get<std::string>();
      r.algorithm = j.at("algorithm").get<std::string>();
      r.tau = j.at("tau").get<double>();
      r.order = j.at("order").get<Eigen::Index>();
      r.abs_error = json_double(j.at("abs_error"));
      r.rel_error = json_double(j.at("rel_error"));
      r.error_method = j.at("error_method").get<std::string>();
      r.iterations = j.at("iterations").get<int>();
      r.converged = j.at("converged").get<bool>();
      r.status = j.at("status").get<std::string>();
      r.wall_time_s = j.at("wall_time_s").get<double>();
      r.max_rt_residual = json_optional(j.at("max_rt_residual"));
      r.max_lt_residual = json_optional(j.at("max_lt_residual"));
      r.max_bitangential_residual = json_optional(j.at("max_bitangential_residual"));
      r.message = j.at("message").get<std::string>();
      rows.push_back(std::move(r));
    }
    return rows;
  }
  catch (const json::exception &e)
  {
    throw ParseError("<json>", 1, 1, e.what());
  }
}

//
// Benchmarks
//

bool is_known_algorithm(const std::string &name)
{
  return name == "lt-irka" || name == "irka" || name == "tl-tsia";
}

void BenchmarkSpec::validate() const
{
  if (model_source.empty())
  {
    throw InvalidArgument("benchmark: model_source is empty");
  }
  if (reduced_order < 1)
  {
    throw InvalidArgument("benchmark: reduced_order must be at least 1");
  }
  if (horizons.empty())
  {
    throw InvalidArgument("benchmark: at least one horizon is required");
  }
  for (double t : horizons)
  {
    if (!(t > 0.0) || !std::isfinite(t))
    {
      throw InvalidArgument("benchmark: horizons must be positive and finite");
    }
  }
  if (algorithms.empty())
  {
    throw InvalidArgument("benchmark: algorithms is empty");
  }
  for (const std::string &a : algorithms)
  {
    if (!is_known_algorithm(a))
    {
      throw InvalidArgument("benchmark: unknown algorithm '" + a + "'");
    }
  }
  if (!(tolerance > 0.0))
  {
    throw InvalidArgument("benchmark: tolerance must be positive");
  }
  if (max_iterations < 1)
  {
    throw InvalidArgument("benchmark: max_iterations must be at least 1");
  }
}

BenchmarkSpec parse_benchmark_spec(const std::string &text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    throw ParseError("<spec>", 1, e.byte, e.what());
  }
  if (!doc.is_object())
  {
    throw ParseError("<spec>", 1, 1, "benchmark spec must be a JSON object");
  }
  static const char *const known[] = {"model_source", "reduced_order", "horizons",
                                      "algorithms",   "tolerance",     "seed",
                                      "output_path",  "max_iterations"};
  for (const auto &item : doc.items())
  {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char *k) { return item.key() == k; }) == std::end(known))
    {
      throw InvalidArgument("benchmark: unknown key '" + item.key() + "'");
    }
  }
  BenchmarkSpec spec;
  try
  {
    spec.model_source = doc.at("model_source").get<std::string>();
    spec.reduced_order = doc.at("reduced_order").get<Eigen::Index>();
    spec.horizons = doc.at("horizons").get<std::vector<double>>();
    spec.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
    spec.tolerance = doc.value("tolerance", spec.tolerance);
    spec.seed = doc.value("seed", spec.seed);
    spec.output_path = doc.value("output_path", spec.output_path);
    spec.max_iterations = doc.value("max_iterations", spec.max_iterations);
  }
  catch (const json::exception &e)
  {
    throw InvalidArgument(std::string("benchmark: ") + e.what());
  }
  spec.validate();
  return spec;
}

BenchmarkSpec read_benchmark_spec(const std::string &path)
{
  return parse_benchmark_spec(read_file(path));
}

HorizonContext::HorizonContext(const StateSpaceSystem &full, double tau)
  : errors_(full, tau), transfer_(full, tau)
{
}

void score_row(const HorizonContext &ctx, const ReducedModel &model, ResultRow &row)
{
  const H2TauError e = ctx.errors()(model);
  row.abs_error = e.absolute;
  row.rel_error = e.relative;
  row.error_method = to_string(e.method);
  const OptimalityResiduals res = optimality_residuals(ctx.transfer(), model);
  row.max_rt_residual = OptimalityResiduals::max_of(res.right_tangential);
  row.max_lt_residual = OptimalityResiduals::max_of(res.left_tangential);
  row.max_bitangential_residual = OptimalityResiduals::max_of(res.bitangential);
}

namespace
{

ReductionResult dispatch(const StateSpaceSystem &full, const std::string &algorithm,
                         const ReductionConfig &config)
{
  if (algorithm == "lt-irka")
  {
    return lt_irka(full, config);
  }
  if (algorithm == "irka")
  {
    return irka(full, config);
  }
  if (algorithm == "tl-tsia")
  {
    return tl_tsia(full, config);
  }
  throw InvalidArgument("unknown algorithm '" + algorithm + "'");
}

void append_message(ResultRow &row, const std::string &msg)
{
  row.message += row.message.empty() ? msg : "; " + msg;
}

}  // namespace

RunOutput run_algorithm(const StateSpaceSystem &full, const std::string &algorithm,
                        const ReductionConfig &config, const HorizonContext &ctx)
{
  RunOutput out;
  ResultRow &row = out.row;
  row.model = full.label();
  row.algorithm = algorithm;
  row.tau = config.tau;
  row.order = config.reduced_order;
  row.abs_error = row.rel_error = std::numeric_limits<double>::quiet_NaN();
  row.status = "failed";

  const auto t0 = std::chrono::steady_clock::now();
  try
  {
    ReductionResult result = dispatch(full, algorithm, config);
    row.iterations = result.trace.iterations();
    row.converged = true;
    row.status = "converged";
    out.model = std::move(result.model);
  }
  catch (const NoConvergence &e)
  {
    row.iterations = e.iteration();
    row.status = "max_iterations";
    append_message(row, e.what());
    if (e.best())
    {
      out.model = e.best()->model;
    }
  }
  catch (const ReductionFailure &e)
  {
    row.iterations = e.iteration();
    append_message(row, e.what());
  }
  catch (const Error &e)
  {
    append_message(row, e.what());
  }
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (out.model)
  {
    try
    {
      score_row(ctx, *out.model, row);
    }
    catch (const Error &e)
    {
      append_message(row, std::string("scoring: ") + e.what());
    }
  }
  return out;
}

std::string trajectory_text(const std::vector<std::pair<double, double>> &samples)
{
  std::string out = "# t error_norm\n";
  for (const auto &[t, e] : samples)
  {
    out += format_double(t) + " " + format_double(e) + "\n";
  }
  return out;
}

BenchmarkOutcome run_benchmark(const BenchmarkSpec &spec)
{
  spec.validate();
  const StateSpaceSystem full = load_system(spec.model_source);

  ReductionConfig base;
  base.reduced_order = spec.reduced_order;
  base.tolerance = spec.tolerance;
  base.max_iterations = spec.max_iterations;
  base.seed = spec.seed;

  BenchmarkOutcome outcome;
  // IRKA does not depend on the horizon: run it once and rescore per horizon. Its model also
  // seeds TL-TSIA, exactly as tl_tsia would do on its own with the same seed.
  std::optional<RunOutput> irka_run;
  const bool want_irka = std::find(spec.algorithms.begin(), spec.algorithms.end(), "irka") !=
                         spec.algorithms.end();
  const bool want_tsia = std::find(spec.algorithms.begin(), spec.algorithms.end(),
                                   "tl-tsia") != spec.algorithms.end();

  for (double tau : spec.horizons)
  {
    const HorizonContext ctx(full, tau);
    ReductionConfig config = base;
    config.tau = tau;
    if ((want_irka || want_tsia) && !irka_run)
    {
      irka_run = run_algorithm(full, "irka", config, ctx);
    }

    for (const std::string &algorithm : spec.algorithms)
    {
      RunOutput run;
      if (algorithm == "irka")
      {
        run.row = irka_run->row;
        run.row.tau = tau;
        run.model = irka_run->model;
        if (run.model)
        {
          run.row.abs_error = run.row.rel_error = std::numeric_limits<double>::quiet_NaN();
          try
          {
            score_row(ctx, *run.model, run.row);
          }
          catch (const Error &e)
          {
            append_message(run.row, std::string("scoring: ") + e.what());
          }
        }
      }
      else
      {
        ReductionConfig c = config;
        if (algorithm == "tl-tsia" && irka_run && irka_run->model)
        {
          c.initial = irka_run->model;
        }
        run = run_algorithm(full, algorithm, c, ctx);
      }

      if (!spec.output_path.empty() && run.model)
      {
        char name[96];
        std::snprintf(name, sizeof name, "%s_tau%g.dat", algorithm.c_str(), tau);
        const std::string path = (fs::path(spec.output_path) / "trajectories" / name).string();
        try
        {
          write_file(path, trajectory_text(ctx.errors().trajectory(*run.model)));
          outcome.written_files.push_back(path);
        }
        catch (const Error &e)
        {
          append_message(run.row, std::string("trajectory: ") + e.what());
        }
      }
      outcome.rows.push_back(std::move(run.row));
    }
  }

  if (!spec.output_path.empty())
  {
    const fs::path dir(spec.output_path);
    write_file((dir / "results.csv").string(), to_csv(outcome.rows));
    write_file((dir / "results.json").string(), to_json(outcome.rows));
    outcome.written_files.push_back((dir / "results.csv").string());
    outcome.written_files.push_back((dir / "results.json").string());
  }
  return outcome;
}

std::uint64_t seed_from_environment(std::uint64_t fallback)
{
  const char *env = std::getenv("MORTAU_SEED");
  if (!env || !*env)
  {
    return fallback;
  }
  char *end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  return *end == '\0' ? static_cast<std::uint64_t>(v) : fallback;
}

}  // namespace mortau
