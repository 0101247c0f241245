// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_NUMERICS_HPP
#define MORTAU_NUMERICS_HPP

#include <complex>
#include <vector>
#include <Eigen/Dense>

#include "mortau/errors.hpp"

namespace mortau
{

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

//
// Dense kernels shared by every other module. All functions are pure.
//

// Throws InvalidArgument if any entry is NaN/Inf or the matrix is empty.
void require_finite(const Matrix &M, const char *name);

// Solve (sigma I - A) X = rhs with a partially pivoted LU. Throws SingularShift when a
// pivot falls below n * eps * (|sigma| + ||A||_1).
CMatrix shifted_solve(const Matrix &A, Complex sigma, const CMatrix &rhs);

// Repeated shifted solves with one matrix. A is reduced once to upper Hessenberg form
// A = Q H Q^T, after which every shift costs O(n^2) per right-hand side.
class ShiftedSolver
{
public:
  explicit ShiftedSolver(const Matrix &A);

  // LU factors of (sigma I - H); solves with the shifted matrix or its plain transpose.
  class Factorization
  {
  public:
    CMatrix solve(const CMatrix &rhs) const;             // (sigma I - A)^{-1} rhs
    CMatrix solve_transposed(const CMatrix &rhs) const;  // (sigma I - A^T)^{-1} rhs
    Complex shift() const { return sigma_; }

  private:
    friend class ShiftedSolver;
    const ShiftedSolver *owner_ = nullptr;
    Complex sigma_;
    CMatrix lu_;                    // U in the upper triangle
    std::vector<Complex> lower_;    // multiplier l_k of step k
    std::vector<bool> swapped_;     // rows k, k+1 interchanged at step k
  };

  Factorization factor(Complex sigma) const;
  CMatrix solve(Complex sigma, const CMatrix &rhs) const { return factor(sigma).solve(rhs); }

  Eigen::Index size() const { return H_.rows(); }
  const Matrix &matrix() const { return A_; }

private:
  Matrix A_, H_, Q_;
  double norm1_;
};

struct ExpmOptions
{
  // Throw OverflowRisk once log ||e^M||_1 (or any squaring stage) exceeds this.
  double overflow_log_bound = 700.0;
};

// e^M by scaling and squaring with diagonal Pade approximants (degrees 3..13).
Matrix matrix_exponential(const Matrix &M, const ExpmOptions &opts = {});
CMatrix matrix_exponential(const CMatrix &M, const ExpmOptions &opts = {});

// e^{A tau} B through the dense exponential.
Matrix exp_action(const Matrix &A, double tau, const Matrix &B, const ExpmOptions &opts = {});

// e^{(A - sigma I) tau} B = e^{-sigma tau} e^{A tau} B, formed from the exponential of the
// shifted matrix so that neither factor over/underflows on its own.
CMatrix shifted_exp_action(const Matrix &A, Complex sigma, double tau, const CMatrix &B,
                           const ExpmOptions &opts = {});

struct EigenDecomposition
{
  CVector values;                // sorted by (Re, Im) ascending
  CMatrix right_vectors;         // unit-norm columns
  CMatrix inverse_right_vectors;
  double condition = 1.0;        // 2-norm condition number of right_vectors
};

inline constexpr double kMaxEigenvectorCondition = 1e12;

// Nonsymmetric eigendecomposition of a small matrix. Throws NonDiagonalizable when the
// eigenvector matrix has condition number above kMaxEigenvectorCondition.
EigenDecomposition eigendecompose(const Matrix &M);

// Lexicographic (Re, Im) ascending order.
bool complex_less(const Complex &a, const Complex &b);

// P_tau = int_0^tau e^{At} B B^T e^{A^T t} dt. The block exponential
// exp(h [[-A, BB^T], [0, A^T]]) yields the Gramian on a short step h = tau / 2^k; the
// semigroup identity P_{2t} = P_t + e^{At} P_t e^{A^T t} then doubles it up to tau.
Matrix vanloan_limited_gramian(const Matrix &A, const Matrix &B, double tau,
                               const ExpmOptions &opts = {});

struct OrthonormalBasis
{
  Matrix Q;                    // n x rank, orthonormal columns
  std::vector<bool> retained;  // one flag per input column
  Eigen::Index rank = 0;
  bool rank_deficient() const { return rank < static_cast<Eigen::Index>(retained.size()); }
};

inline constexpr double kRankTolerance = 1e-13;

// Twice-iterated modified Gram-Schmidt on unit-normalized columns. A column is kept when its
// norm after orthogonalization exceeds `tolerance`. Zero columns are dropped, non-finite ones
// throw OverflowRisk.
OrthonormalBasis orthonormal_basis(const Matrix &M, double tolerance = kRankTolerance);

// Largest principal angle (radians) between the column spans of U and V. Computed from
// sines so that tiny angles keep full relative accuracy.
double max_principal_angle(const Matrix &U, const Matrix &V);

}  // namespace mortau

#endif  // MORTAU_NUMERICS_HPP
