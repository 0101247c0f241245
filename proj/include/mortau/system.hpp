// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_SYSTEM_HPP
#define MORTAU_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "mortau/numerics.hpp"

namespace mortau
{

// Continuous-time LTI system x' = A x + B u, y = C x (no feedthrough). Immutable.
class StateSpaceSystem
{
public:
  StateSpaceSystem(Matrix A, Matrix B, Matrix C, std::string label = {});

  const Matrix &A() const { return A_; }
  const Matrix &B() const { return B_; }
  const Matrix &C() const { return C_; }
  const std::string &label() const { return label_; }

  Eigen::Index order() const { return A_.rows(); }
  Eigen::Index inputs() const { return B_.cols(); }
  Eigen::Index outputs() const { return C_.rows(); }

private:
  Matrix A_, B_, C_;
  std::string label_;
};

struct ReducedModel
{
  StateSpaceSystem system;
  // True when the basis was assembled from (Re, Im) parts of complex Krylov vectors.
  bool realified = false;

  Eigen::Index order() const { return system.order(); }
};

// g_hat(t) = sum_k c_k b_k^T e^{lambda_k t}. Directions use the bilinear (transpose)
// pairing: b_k^T is row k of R^{-1} B_hat and c_k is column k of C_hat R, A_hat = R L R^{-1}.
struct PoleResidueForm
{
  std::vector<Complex> poles;
  std::vector<CVector> right_directions;  // b_k in C^m
  std::vector<CVector> left_directions;   // c_k in C^p

  CMatrix impulse(double t) const;
};

CMatrix transfer(const StateSpaceSystem &sys, Complex s);

// Laplace transform of the impulse response truncated to [0, tau]:
// G_tau(s) = G(s) - e^{-s tau} C (sI - A)^{-1} e^{A tau} B.
CMatrix transfer_limited(const StateSpaceSystem &sys, Complex s, double tau);

// d/ds G_tau(s) = -C (sI-A)^{-2} B + e^{-s tau} (tau C (sI-A)^{-1} + C (sI-A)^{-2}) e^{A tau} B.
CMatrix transfer_limited_derivative(const StateSpaceSystem &sys, Complex s, double tau);

PoleResidueForm pole_residue(const ReducedModel &model);

Matrix impulse_response(const StateSpaceSystem &sys, double t);

// Evaluates G_tau and G_tau' of one system at many points. Caches a Hessenberg solver and
// e^{A tau} B, e^{A^T tau} C^T; the scalar factor e^{-s tau} is applied separately unless
// it would overflow, in which case e^{(A - sI) tau} B is formed directly.
class LimitedTransferEvaluator
{
public:
  // tau = +infinity evaluates the ordinary transfer function.
  LimitedTransferEvaluator(const StateSpaceSystem &sys, double tau);

  CMatrix value(Complex s) const;
  CMatrix derivative(Complex s) const;

  const StateSpaceSystem &system() const { return sys_; }
  double tau() const { return tau_; }
  const ShiftedSolver &solver() const { return solver_; }
  bool limited() const { return limited_; }
  // e^{A tau} B and e^{A^T tau} C^T (empty when tau is infinite).
  const Matrix &exp_b() const { return exp_b_; }
  const Matrix &exp_ct() const { return exp_ct_; }

  // e^{-s tau} e^{A tau} B (resp. e^{-s tau} e^{A^T tau} C^T), overflow-safe.
  CMatrix damped_exp_b(Complex s) const;
  CMatrix damped_exp_ct(Complex s) const;

private:
  StateSpaceSystem sys_;
  double tau_;
  bool limited_;
  ShiftedSolver solver_;
  Matrix exp_b_, exp_ct_;
};

// |Re(s) tau| beyond which e^{-s tau} is not formed as a scalar.
inline constexpr double kScalarExpLimit = 600.0;

}  // namespace mortau

#endif  // MORTAU_SYSTEM_HPP
