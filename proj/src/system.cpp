// SPDX-License-Identifier: Apache-2.0

#include "mortau/system.hpp"

#include <cmath>
#include <limits>

namespace mortau
{

StateSpaceSystem::StateSpaceSystem(Matrix A, Matrix B, Matrix C, std::string label)
  : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), label_(std::move(label))
{
  require_finite(A_, "StateSpaceSystem A");
  require_finite(B_, "StateSpaceSystem B");
  require_finite(C_, "StateSpaceSystem C");
  if (A_.rows() != A_.cols())
  {
    throw DimensionMismatch("StateSpaceSystem: A is " + std::to_string(A_.rows()) + "x" +
                            std::to_string(A_.cols()) + ", not square");
  }
  if (B_.rows() != A_.rows())
  {
    throw DimensionMismatch("StateSpaceSystem: B has " + std::to_string(B_.rows()) +
                            " rows, expected " + std::to_string(A_.rows()));
  }
  if (C_.cols() != A_.cols())
  {
    throw DimensionMismatch("StateSpaceSystem: C has " + std::to_string(C_.cols()) +
                            " columns, expected " + std::to_string(A_.cols()));
  }
}

CMatrix PoleResidueForm::impulse(double t) const
{
  if (poles.empty())
  {
    return CMatrix();
  }
  CMatrix g = CMatrix::Zero(left_directions.front().size(), right_directions.front().size());
  for (std::size_t k = 0; k < poles.size(); ++k)
  {
    g += std::exp(poles[k] * t) * left_directions[k] * right_directions[k].transpose();
  }
  return g;
}

CMatrix transfer(const StateSpaceSystem &sys, Complex s)
{
  return sys.C().cast<Complex>() * shifted_solve(sys.A(), s, sys.B().cast<Complex>());
}

namespace
{

void require_horizon(double tau, const char *who)
{
  if (!(tau > 0.0))
  {
    throw InvalidArgument(std::string(who) + ": tau must be positive");
  }
}

}  // namespace

CMatrix transfer_limited(const StateSpaceSystem &sys, Complex s, double tau)
{
  require_horizon(tau, "transfer_limited");
  const CMatrix B = sys.B().cast<Complex>();
  const CMatrix tail = shifted_exp_action(sys.A(), s, tau, B);
  return sys.C().cast<Complex>() * shifted_solve(sys.A(), s, B - tail);
}

CMatrix transfer_limited_derivative(const StateSpaceSystem &sys, Complex s, double tau)
{
  require_horizon(tau, "transfer_limited_derivative");
  const CMatrix B = sys.B().cast<Complex>();
  const CMatrix C = sys.C().cast<Complex>();
  const CMatrix tail = shifted_exp_action(sys.A(), s, tau, B);
  const CMatrix first = shifted_solve(sys.A(), s, B - tail);
  const CMatrix second = shifted_solve(sys.A(), s, first);
  const CMatrix tail_solve = shifted_solve(sys.A(), s, tail);
  return -C * second + tau * (C * tail_solve);
}

PoleResidueForm pole_residue(const ReducedModel &model)
{
  const StateSpaceSystem &rom = model.system;
  const EigenDecomposition eig = eigendecompose(rom.A());
  const CMatrix right_rows = eig.inverse_right_vectors * rom.B().cast<Complex>();
  const CMatrix left_cols = rom.C().cast<Complex>() * eig.right_vectors;

  PoleResidueForm form;
  const Eigen::Index r = rom.order();
  form.poles.reserve(r);
  for (Eigen::Index k = 0; k < r; ++k)
  {
    form.poles.push_back(eig.values(k));
    form.right_directions.emplace_back(right_rows.row(k).transpose());
    form.left_directions.emplace_back(left_cols.col(k));
  }
  return form;
}

Matrix impulse_response(const StateSpaceSystem &sys, double t)
{
  if (!(t >= 0.0))
  {
    throw InvalidArgument("impulse_response: t must be nonnegative");
  }
  return sys.C() * exp_action(sys.A(), t, sys.B());
}

LimitedTransferEvaluator::LimitedTransferEvaluator(const StateSpaceSystem &sys, double tau)
  : sys_(sys), tau_(tau), limited_(std::isfinite(tau)), solver_(sys.A())
{
  if (!(tau > 0.0))
  {
    throw InvalidArgument("LimitedTransferEvaluator: tau must be positive");
  }
  if (limited_)
  {
    const Matrix E = matrix_exponential(Matrix(sys.A() * tau));
    exp_b_ = E * sys.B();
    exp_ct_ = E.transpose() * sys.C().transpose();
  }
}

CMatrix LimitedTransferEvaluator::damped_exp_b(Complex s) const
{
  if (-s.real() * tau_ > kScalarExpLimit)
  {
    return shifted_exp_action(sys_.A(), s, tau_, sys_.B().cast<Complex>());
  }
  return std::exp(-s * tau_) * exp_b_.cast<Complex>();
}

CMatrix LimitedTransferEvaluator::damped_exp_ct(Complex s) const
{
  if (-s.real() * tau_ > kScalarExpLimit)
  {
    return shifted_exp_action(Matrix(sys_.A().transpose()), s, tau_,
                              sys_.C().transpose().cast<Complex>());
  }
  return std::exp(-s * tau_) * exp_ct_.cast<Complex>();
}

CMatrix LimitedTransferEvaluator::value(Complex s) const
{
  const CMatrix C = sys_.C().cast<Complex>();
  CMatrix rhs = sys_.B().cast<Complex>();
  if (limited_)
  {
    rhs -= damped_exp_b(s);
  }
  return C * solver_.solve(s, rhs);
}

CMatrix LimitedTransferEvaluator::derivative(Complex s) const
{
  const CMatrix C = sys_.C().cast<Complex>();
  const CMatrix B = sys_.B().cast<Complex>();
  const ShiftedSolver::Factorization f = solver_.factor(s);
  if (!limited_)
  {
    return -C * f.solve(f.solve(B));
  }
  const CMatrix tail = damped_exp_b(s);
  const CMatrix first = f.solve(B - tail);
  return -C * f.solve(first) + tau_ * (C * f.solve(tail));
}

}  // namespace mortau
