// SPDX-License-Identifier: Apache-2.0

#include "mortau/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mortau
{

namespace
{

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename MatrixType>
double norm1(const MatrixType &M)
{
  return M.size() == 0 ? 0.0 : M.cwiseAbs().colwise().sum().maxCoeff();
}

// Real matrix times complex matrix without materializing a complex copy of the real one.
CMatrix real_times(const Matrix &Q, const CMatrix &X)
{
  CMatrix out(Q.rows(), X.cols());
  out.real() = Q * X.real();
  out.imag() = Q * X.imag();
  return out;
}

CMatrix real_transpose_times(const Matrix &Q, const CMatrix &X)
{
  CMatrix out(Q.cols(), X.cols());
  out.real() = Q.transpose() * X.real();
  out.imag() = Q.transpose() * X.imag();
  return out;
}

//
// Diagonal Pade approximants r_m(M) = (V - U)^{-1} (V + U); coefficients and switching
// thresholds theta_m for double precision.
//
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <typename MatrixType>
void pade3(const MatrixType &A, MatrixType &U, MatrixType &V)
{
  const double b[] = {120.0, 60.0, 12.0, 1.0};
  const auto I = MatrixType::Identity(A.rows(), A.cols());
  const MatrixType A2 = A * A;
  U = A * (b[3] * A2 + b[1] * I);
  V = b[2] * A2 + b[0] * I;
}

template <typename MatrixType>
void pade5(const MatrixType &A, MatrixType &U, MatrixType &V)
{
  const double b[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  const auto I = MatrixType::Identity(A.rows(), A.cols());
  const MatrixType A2 = A * A;
  const MatrixType A4 = A2 * A2;
  U = A * (b[5] * A4 + b[3] * A2 + b[1] * I);
  V = b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename MatrixType>
void pade7(const MatrixType &A, MatrixType &U, MatrixType &V)
{
  const double b[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                      25200.0,    1512.0,    56.0,      1.0};
  const auto I = MatrixType::Identity(A.rows(), A.cols());
  const MatrixType A2 = A * A;
  const MatrixType A4 = A2 * A2;
  const MatrixType A6 = A4 * A2;
  U = A * (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  V = b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename MatrixType>
void pade9(const MatrixType &A, MatrixType &U, MatrixType &V)
{
  const double b[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                      2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const auto I = MatrixType::Identity(A.rows(), A.cols());
  const MatrixType A2 = A * A;
  const MatrixType A4 = A2 * A2;
  const MatrixType A6 = A4 * A2;
  const MatrixType A8 = A6 * A2;
  U = A * (b[9] * A8 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  V = b[8] * A8 + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename MatrixType>
void pade13(const MatrixType &A, MatrixType &U, MatrixType &V)
{
  const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                      670442572800.0,      33522128640.0,       1323241920.0,
                      40840800.0,          960960.0,            16380.0,
                      182.0,               1.0};
  const auto I = MatrixType::Identity(A.rows(), A.cols());
  const MatrixType A2 = A * A;
  const MatrixType A4 = A2 * A2;
  const MatrixType A6 = A4 * A2;
  const MatrixType inner_u = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2);
  U = A * (inner_u + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const MatrixType inner_v = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2);
  V = inner_v + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename MatrixType>
void check_growth(const MatrixType &R, const ExpmOptions &opts)
{
  if (!R.allFinite() || std::log(norm1(R)) > opts.overflow_log_bound)
  {
    throw OverflowRisk("matrix exponential exceeds the overflow bound e^" +
                       std::to_string(opts.overflow_log_bound));
  }
}

template <typename MatrixType>
MatrixType expm_impl(const MatrixType &M, const ExpmOptions &opts)
{
  if (M.rows() != M.cols())
  {
    throw DimensionMismatch("matrix_exponential: matrix is not square");
  }
  if (!M.allFinite())
  {
    throw InvalidArgument("matrix_exponential: non-finite entries");
  }
  const Eigen::Index n = M.rows();
  const double norm = norm1(M);
  if (norm == 0.0)
  {
    return MatrixType::Identity(n, n);
  }

  MatrixType U, V;
  int squarings = 0;
  if (norm <= kTheta3)
  {
    pade3(M, U, V);
  }
  else if (norm <= kTheta5)
  {
    pade5(M, U, V);
  }
  else if (norm <= kTheta7)
  {
    pade7(M, U, V);
  }
  else if (norm <= kTheta9)
  {
    pade9(M, U, V);
  }
  else
  {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    const MatrixType scaled = M * std::ldexp(1.0, -squarings);
    pade13(scaled, U, V);
  }

  MatrixType R = (V - U).partialPivLu().solve(V + U);
  check_growth(R, opts);
  for (int i = 0; i < squarings; ++i)
  {
    R = (R * R).eval();
    check_growth(R, opts);
  }
  return R;
}

}  // namespace

void require_finite(const Matrix &M, const char *name)
{
  if (M.rows() < 1 || M.cols() < 1)
  {
    throw InvalidArgument(std::string(name) + ": empty matrix");
  }
  if (!M.allFinite())
  {
    throw InvalidArgument(std::string(name) + ": non-finite entries");
  }
}

CMatrix shifted_solve(const Matrix &A, Complex sigma, const CMatrix &rhs)
{
  if (A.rows() != A.cols() || rhs.rows() != A.rows())
  {
    throw DimensionMismatch("shifted_solve: incompatible dimensions");
  }
  const Eigen::Index n = A.rows();
  CMatrix M = -A.cast<Complex>();
  M.diagonal().array() += sigma;
  Eigen::PartialPivLU<CMatrix> lu(M);
  const double smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double threshold = static_cast<double>(n) * kEps * (std::abs(sigma) + norm1(A));
  if (!(smallest > threshold))
  {
    throw SingularShift(sigma, "shifted_solve: sigma I - A is numerically singular");
  }
  return lu.solve(rhs);
}

ShiftedSolver::ShiftedSolver(const Matrix &A) : A_(A)
{
  if (A.rows() != A.cols())
  {
    throw DimensionMismatch("ShiftedSolver: matrix is not square");
  }
  Eigen::HessenbergDecomposition<Matrix> hess(A);
  H_ = hess.matrixH();
  Q_ = hess.matrixQ();
  norm1_ = norm1(A);
}

ShiftedSolver::Factorization ShiftedSolver::factor(Complex sigma) const
{
  const Eigen::Index n = H_.rows();
  Factorization f;
  f.owner_ = this;
  f.sigma_ = sigma;
  f.lu_ = -H_.cast<Complex>();
  f.lu_.diagonal().array() += sigma;
  f.lower_.assign(n > 0 ? n - 1 : 0, Complex(0.0));
  f.swapped_.assign(n > 0 ? n - 1 : 0, false);

  CMatrix &M = f.lu_;
  for (Eigen::Index k = 0; k + 1 < n; ++k)
  {
    const Eigen::Index len = n - k;
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k)))
    {
      M.row(k).tail(len).swap(M.row(k + 1).tail(len));
      f.swapped_[k] = true;
    }
    if (M(k, k) != Complex(0.0))
    {
      const Complex l = M(k + 1, k) / M(k, k);
      f.lower_[k] = l;
      M.row(k + 1).tail(len) -= l * M.row(k).tail(len);
    }
    M(k + 1, k) = 0.0;
  }

  const double smallest = M.diagonal().cwiseAbs().minCoeff();
  const double threshold = static_cast<double>(n) * kEps * (std::abs(sigma) + norm1_);
  if (!(smallest > threshold))
  {
    throw SingularShift(sigma, "ShiftedSolver: sigma I - A is numerically singular");
  }
  return f;
}

CMatrix ShiftedSolver::Factorization::solve(const CMatrix &rhs) const
{
  if (rhs.rows() != lu_.rows())
  {
    throw DimensionMismatch("ShiftedSolver: right-hand side has wrong row count");
  }
  CMatrix y = real_transpose_times(owner_->Q_, rhs);
  for (std::size_t k = 0; k < lower_.size(); ++k)
  {
    const auto r = static_cast<Eigen::Index>(k);
    if (swapped_[k])
    {
      y.row(r).swap(y.row(r + 1));
    }
    y.row(r + 1) -= lower_[k] * y.row(r);
  }
  lu_.triangularView<Eigen::Upper>().solveInPlace(y);
  return real_times(owner_->Q_, y);
}

CMatrix ShiftedSolver::Factorization::solve_transposed(const CMatrix &rhs) const
{
  if (rhs.rows() != lu_.rows())
  {
    throw DimensionMismatch("ShiftedSolver: right-hand side has wrong row count");
  }
  CMatrix z = real_transpose_times(owner_->Q_, rhs);
  lu_.transpose().triangularView<Eigen::Lower>().solveInPlace(z);
  for (std::size_t k = lower_.size(); k-- > 0;)
  {
    const auto r = static_cast<Eigen::Index>(k);
    z.row(r) -= lower_[k] * z.row(r + 1);
    if (swapped_[k])
    {
      z.row(r).swap(z.row(r + 1));
    }
  }
  return real_times(owner_->Q_, z);
}

Matrix matrix_exponential(const Matrix &M, const ExpmOptions &opts)
{
  return expm_impl(M, opts);
}

CMatrix matrix_exponential(const CMatrix &M, const ExpmOptions &opts)
{
  return expm_impl(M, opts);
}

Matrix exp_action(const Matrix &A, double tau, const Matrix &B, const ExpmOptions &opts)
{
  if (A.rows() != A.cols() || B.rows() != A.rows())
  {
    throw DimensionMismatch("exp_action: incompatible dimensions");
  }
  if (!(tau >= 0.0))
  {
    throw InvalidArgument("exp_action: tau must be nonnegative");
  }
  if (tau == 0.0)
  {
    return B;
  }
  return matrix_exponential(Matrix(A * tau), opts) * B;
}

CMatrix shifted_exp_action(const Matrix &A, Complex sigma, double tau, const CMatrix &B,
                           const ExpmOptions &opts)
{
  if (A.rows() != A.cols() || B.rows() != A.rows())
  {
    throw DimensionMismatch("shifted_exp_action: incompatible dimensions");
  }
  if (!(tau >= 0.0))
  {
    throw InvalidArgument("shifted_exp_action: tau must be nonnegative");
  }
  if (tau == 0.0)
  {
    return B;
  }
  CMatrix S = A.cast<Complex>();
  S.diagonal().array() -= sigma;
  S *= tau;
  return matrix_exponential(S, opts) * B;
}

bool complex_less(const Complex &a, const Complex &b)
{
  if (a.real() != b.real())
  {
    return a.real() < b.real();
  }
  return a.imag() < b.imag();
}

EigenDecomposition eigendecompose(const Matrix &M)
{
  if (M.rows() != M.cols() || M.rows() == 0)
  {
    throw DimensionMismatch("eigendecompose: matrix must be square and nonempty");
  }
  require_finite(M, "eigendecompose");
  Eigen::EigenSolver<Matrix> solver(M, true);
  if (solver.info() != Eigen::Success)
  {
    throw NonDiagonalizable(std::numeric_limits<double>::infinity(),
                            "eigendecompose: QR iteration did not converge");
  }
  const CVector values = solver.eigenvalues();
  const CMatrix vectors = solver.eigenvectors();
  const Eigen::Index r = M.rows();

  std::vector<Eigen::Index> order(r);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return complex_less(values(i), values(j));
  });

  EigenDecomposition out;
  out.values.resize(r);
  out.right_vectors.resize(r, r);
  for (Eigen::Index k = 0; k < r; ++k)
  {
    out.values(k) = values(order[k]);
    CVector v = vectors.col(order[k]);
    const double nrm = v.norm();
    out.right_vectors.col(k) = nrm > 0.0 ? CVector(v / nrm) : v;
  }

  Eigen::JacobiSVD<CMatrix> svd(out.right_vectors);
  const auto &sv = svd.singularValues();
  out.condition = sv(r - 1) > 0.0 ? sv(0) / sv(r - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kMaxEigenvectorCondition))
  {
    throw NonDiagonalizable(out.condition,
                            "eigendecompose: eigenvector matrix condition number " +
                                std::to_string(out.condition) + " exceeds 1e12");
  }
  out.inverse_right_vectors = out.right_vectors.partialPivLu().inverse();
  return out;
}

Matrix vanloan_limited_gramian(const Matrix &A, const Matrix &B, double tau,
                               const ExpmOptions &opts)
{
  if (A.rows() != A.cols() || B.rows() != A.rows())
  {
    throw DimensionMismatch("vanloan_limited_gramian: incompatible dimensions");
  }
  if (!(tau > 0.0))
  {
    throw InvalidArgument("vanloan_limited_gramian: tau must be positive");
  }
  const Eigen::Index n = A.rows();

  // Short step with ||A h||_1 <= 1/2 keeps the e^{-A h} block harmless.
  const double a_norm = norm1(A);
  int doublings = 0;
  if (a_norm * tau > 0.5)
  {
    doublings = static_cast<int>(std::ceil(std::log2(a_norm * tau / 0.5)));
  }
  const double h = std::ldexp(tau, -doublings);

  // The Gramian is quadratic in B; scaling B keeps the coupling block O(1).
  const Matrix BBt = B * B.transpose();
  const double scale = std::max(1.0, norm1(BBt) * h);

  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -A * h;
  block.topRightCorner(n, n) = BBt * (h / scale);
  block.bottomRightCorner(n, n) = A.transpose() * h;
  const Matrix F = matrix_exponential(block, opts);

  Matrix step = F.bottomRightCorner(n, n).transpose();  // e^{A h}
  Matrix P = step * F.topRightCorner(n, n);
  for (int i = 0; i < doublings; ++i)
  {
    P += step * P * step.transpose();
    step = (step * step).eval();
    check_growth(step, opts);
  }
  P = (0.5 * scale) * (P + P.transpose()).eval();
  if (!P.allFinite())
  {
    throw OverflowRisk("vanloan_limited_gramian: Gramian overflowed");
  }
  return P;
}

OrthonormalBasis orthonormal_basis(const Matrix &M, double tolerance)
{
  OrthonormalBasis out;
  const Eigen::Index n = M.rows();
  const Eigen::Index cols = M.cols();
  out.retained.assign(cols, false);
  Matrix Q(n, std::min(n, cols));
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < cols && rank < n; ++j)
  {
    const double len = M.col(j).norm();
    if (!std::isfinite(len))
    {
      throw OverflowRisk("orthonormal_basis: column " + std::to_string(j) + " is not finite");
    }
    if (len == 0.0)
    {
      continue;
    }
    Vector v = M.col(j) / len;
    for (int pass = 0; pass < 2; ++pass)
    {
      for (Eigen::Index k = 0; k < rank; ++k)
      {
        v -= Q.col(k).dot(v) * Q.col(k);
      }
    }
    const double nrm = v.norm();
    if (nrm > tolerance)
    {
      Q.col(rank++) = v / nrm;
      out.retained[j] = true;
    }
  }
  out.Q = Q.leftCols(rank);
  out.rank = rank;
  return out;
}

double max_principal_angle(const Matrix &U, const Matrix &V)
{
  if (U.rows() != V.rows())
  {
    throw DimensionMismatch("max_principal_angle: bases live in different spaces");
  }
  const OrthonormalBasis qu = orthonormal_basis(U);
  const OrthonormalBasis qv = orthonormal_basis(V);
  if (qu.rank != qv.rank)
  {
    return std::acos(0.0);
  }
  if (qu.rank == 0)
  {
    return 0.0;
  }
  const Matrix residual = qv.Q - qu.Q * (qu.Q.transpose() * qv.Q);
  const double s = Eigen::JacobiSVD<Matrix>(residual).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

}  // namespace mortau
