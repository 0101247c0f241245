// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_ERRORS_HPP
#define MORTAU_ERRORS_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mortau
{

// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// The factorization of (sigma I - A) hit a numerically zero pivot: sigma lies on (or
// numerically next to) the spectrum of A.
class SingularShift : public Error
{
public:
  SingularShift(std::complex<double> shift, const std::string &what)
    : Error(what), shift_(shift)
  {
  }
  std::complex<double> shift() const { return shift_; }

private:
  std::complex<double> shift_;
};

// A matrix exponential would exceed the configured growth bound.
class OverflowRisk : public Error
{
public:
  using Error::Error;
};

// Eigenvector matrix too ill-conditioned to treat the input as diagonalizable.
class NonDiagonalizable : public Error
{
public:
  NonDiagonalizable(double condition, const std::string &what)
    : Error(what), condition_(condition)
  {
  }
  double condition() const { return condition_; }

private:
  double condition_;
};

class DimensionMismatch : public Error
{
public:
  using Error::Error;
};

// Closed form singular for a shift with vanishing real part.
class DegenerateShift : public Error
{
public:
  using Error::Error;
};

// Realified projection basis lost rank.
class RankCollapse : public Error
{
public:
  RankCollapse(std::size_t retained, std::size_t requested, const std::string &what)
    : Error(what), retained_(retained), requested_(requested)
  {
  }
  std::size_t retained() const { return retained_; }
  std::size_t requested() const { return requested_; }

private:
  std::size_t retained_, requested_;
};

// cond(W^T V) too large for an oblique projection.
class IllConditionedProjection : public Error
{
public:
  IllConditionedProjection(double condition, const std::string &what)
    : Error(what), condition_(condition)
  {
  }
  double condition() const { return condition_; }

private:
  double condition_;
};

class SylvesterFailure : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  ParseError(std::string file, std::size_t line, std::size_t column, const std::string &msg)
    : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      file_(std::move(file)), line_(line), column_(column)
  {
  }
  const std::string &file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::string file_;
  std::size_t line_, column_;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

}  // namespace mortau

#endif  // MORTAU_ERRORS_HPP
