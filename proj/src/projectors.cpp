// SPDX-License-Identifier: Apache-2.0

#include "mortau/projectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mortau
{

namespace
{

constexpr double kRealShiftTolerance = 1e-12;
constexpr double kPairTolerance = 1e-8;
constexpr double kDirectionTolerance = 1e-6;

double scale_of(Complex z) { return std::max(1.0, std::abs(z)); }

bool same_direction(const CVector &u, const CVector &v)
{
  const double ref = std::max({u.norm(), v.norm(), 1e-300});
  return (u - v).norm() <= kDirectionTolerance * ref;
}

double two_norm_condition(const Matrix &M)
{
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto &sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
}

}  // namespace

bool is_real_shift(Complex z)
{
  return std::abs(z.imag()) <= kRealShiftTolerance * scale_of(z);
}

void InterpolationData::validate(Eigen::Index inputs, Eigen::Index outputs) const
{
  const std::size_t r = shifts.size();
  if (r == 0)
  {
    throw InvalidArgument("InterpolationData: no shifts");
  }
  if (right_directions.size() != r || left_directions.size() != r)
  {
    throw DimensionMismatch("InterpolationData: " + std::to_string(r) + " shifts but " +
                            std::to_string(right_directions.size()) + " right and " +
                            std::to_string(left_directions.size()) + " left directions");
  }
  for (std::size_t i = 0; i < r; ++i)
  {
    if (right_directions[i].size() != inputs || left_directions[i].size() != outputs)
    {
      throw DimensionMismatch("InterpolationData: direction " + std::to_string(i) +
                              " has the wrong length");
    }
    if (!std::isfinite(shifts[i].real()) || !std::isfinite(shifts[i].imag()))
    {
      throw InvalidArgument("InterpolationData: non-finite shift");
    }
  }

  for (std::size_t i = 0; i < r; ++i)
  {
    const Complex s = shifts[i];
    for (std::size_t j = i + 1; j < r; ++j)
    {
      if (std::abs(shifts[j] - s) <= 1e-12 * scale_of(s) &&
          same_direction(right_directions[i], right_directions[j]) &&
          same_direction(left_directions[i], left_directions[j]))
      {
        throw InvalidArgument("InterpolationData: repeated shift with identical directions");
      }
    }
    if (is_real_shift(s))
    {
      continue;
    }
    bool paired = false;
    for (std::size_t j = 0; j < r && !paired; ++j)
    {
      paired = j != i && std::abs(shifts[j] - std::conj(s)) <= kPairTolerance * scale_of(s) &&
               same_direction(right_directions[j], right_directions[i].conjugate()) &&
               same_direction(left_directions[j], left_directions[i].conjugate());
    }
    if (!paired)
    {
      throw InvalidArgument("InterpolationData: complex shift without conjugate partner");
    }
  }
}

InterpolationData reflect_poles(const ReducedModel &model)
{
  const PoleResidueForm form = pole_residue(model);
  InterpolationData data;
  data.shifts.reserve(form.poles.size());
  for (const Complex &p : form.poles)
  {
    data.shifts.push_back(-p);
  }
  data.right_directions = form.right_directions;
  data.left_directions = form.left_directions;
  return data;
}

Matrix ProjectionPair::Zt() const
{
  const Matrix M = W.transpose() * V;
  return M.partialPivLu().solve(W.transpose());
}

Matrix ProjectionPair::Pi() const { return V * Zt(); }

ProjectionPair build_time_limited_spaces(const LimitedTransferEvaluator &eval,
                                         const InterpolationData &data)
{
  const StateSpaceSystem &sys = eval.system();
  data.validate(sys.inputs(), sys.outputs());
  const Eigen::Index n = sys.order();
  const Eigen::Index r = static_cast<Eigen::Index>(data.size());
  const CMatrix B = sys.B().cast<Complex>();
  const CMatrix Ct = sys.C().transpose().cast<Complex>();

  Matrix Vraw(n, r), Wraw(n, r);
  Eigen::Index col = 0;
  bool realified = false;
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    const Complex sigma = data.shifts[i];
    const bool real = is_real_shift(sigma);
    if (!real && sigma.imag() < 0.0)
    {
      continue;  // the partner with positive imaginary part supplies both columns
    }
    const CVector &b = data.right_directions[i];
    const CVector &c = data.left_directions[i];
    CVector rhs_v = B * b;
    CVector rhs_w = Ct * c;
    if (eval.limited())
    {
      rhs_v -= eval.damped_exp_b(sigma) * b;
      rhs_w -= eval.damped_exp_ct(sigma) * c;
    }
    const ShiftedSolver::Factorization f = eval.solver().factor(sigma);
    const CVector v = f.solve(rhs_v);
    const CVector w = f.solve_transposed(rhs_w);
    if (col + (real ? 1 : 2) > r)
    {
      throw InvalidArgument("InterpolationData: conjugate pairs do not fit the order");
    }
    Vraw.col(col) = v.real();
    Wraw.col(col) = w.real();
    ++col;
    if (!real)
    {
      realified = true;
      Vraw.col(col) = v.imag();
      Wraw.col(col) = w.imag();
      ++col;
    }
  }
  if (col != r)
  {
    throw InvalidArgument("InterpolationData: realified basis has " + std::to_string(col) +
                          " columns for " + std::to_string(r) + " shifts");
  }

  ProjectionPair pair = make_projection_pair(Vraw, Wraw);
  pair.realified = realified;
  return pair;
}

ProjectionPair make_projection_pair(const Matrix &Vraw, const Matrix &Wraw)
{
  if (Vraw.rows() != Wraw.rows() || Vraw.cols() != Wraw.cols())
  {
    throw DimensionMismatch("make_projection_pair: bases differ in shape");
  }
  const Eigen::Index r = Vraw.cols();
  OrthonormalBasis qv = orthonormal_basis(Vraw, kProjectionRankTolerance);
  OrthonormalBasis qw = orthonormal_basis(Wraw, kProjectionRankTolerance);
  if (qv.rank < r || qw.rank < r)
  {
    const auto kept = static_cast<std::size_t>(std::min(qv.rank, qw.rank));
    throw RankCollapse(kept, static_cast<std::size_t>(r),
                       "projection basis rank " + std::to_string(kept) + " < " +
                           std::to_string(r));
  }
  ProjectionPair pair;
  pair.V = std::move(qv.Q);
  pair.W = std::move(qw.Q);
  pair.retained_v = std::move(qv.retained);
  pair.retained_w = std::move(qw.retained);
  pair.condition = two_norm_condition(pair.W.transpose() * pair.V);
  return pair;
}

ProjectionPair build_time_limited_spaces(const StateSpaceSystem &sys,
                                         const InterpolationData &data, double tau)
{
  return build_time_limited_spaces(LimitedTransferEvaluator(sys, tau), data);
}

ProjectionPair build_krylov_spaces(const StateSpaceSystem &sys, const InterpolationData &data)
{
  return build_time_limited_spaces(
      LimitedTransferEvaluator(sys, std::numeric_limits<double>::infinity()), data);
}

ReducedModel petrov_galerkin(const StateSpaceSystem &sys, const ProjectionPair &pair)
{
  const Eigen::Index n = sys.order();
  if (pair.V.rows() != n || pair.W.rows() != n || pair.V.cols() != pair.W.cols())
  {
    throw DimensionMismatch("petrov_galerkin: bases do not match the system");
  }
  const Matrix M = pair.W.transpose() * pair.V;
  const double cond = two_norm_condition(M);
  if (!(cond < kMaxProjectionCondition))
  {
    throw IllConditionedProjection(cond, "petrov_galerkin: cond(W^T V) = " +
                                             std::to_string(cond));
  }
  const Eigen::PartialPivLU<Matrix> lu(M);
  const Matrix Zt = lu.solve(pair.W.transpose());
  ReducedModel model{
      StateSpaceSystem(Zt * (sys.A() * pair.V), Zt * sys.B(), sys.C() * pair.V,
                       sys.label().empty() ? std::string{} : sys.label() + "-reduced"),
      pair.realified};
  return model;
}

namespace
{

double relative_gap(double gap, double a, double b, double scale)
{
  const double ref = std::max({a, b, kErrorFloor * scale});
  return ref > 0.0 ? gap / ref : 0.0;
}

}  // namespace

double ShiftErrorReport::right_discrepancy() const
{
  return relative_gap((right_direct - right_formula).norm(), right_direct.norm(),
                      right_formula.norm(), right_scale);
}

double ShiftErrorReport::left_discrepancy() const
{
  return relative_gap((left_direct - left_formula).norm(), left_direct.norm(),
                      left_formula.norm(), left_scale);
}

double ShiftErrorReport::bitangential_discrepancy() const
{
  const double d = std::abs(bitangential_direct);
  const double p = std::abs(bitangential_p);
  const double q = std::abs(bitangential_q);
  return std::max(
      {relative_gap(std::abs(bitangential_direct - bitangential_p), d, p, bitangential_scale),
       relative_gap(std::abs(bitangential_direct - bitangential_q), d, q, bitangential_scale),
       relative_gap(std::abs(bitangential_p - bitangential_q), p, q, bitangential_scale)});
}

double ShiftErrorReport::max_discrepancy() const
{
  return std::max({right_discrepancy(), left_discrepancy(), bitangential_discrepancy()});
}

std::vector<ShiftErrorReport> verify_interpolation_errors(const StateSpaceSystem &sys,
                                                          const ReducedModel &model,
                                                          const ProjectionPair &pair,
                                                          const InterpolationData &data,
                                                          double tau)
{
  data.validate(sys.inputs(), sys.outputs());
  if (!(tau > 0.0) || !std::isfinite(tau))
  {
    throw InvalidArgument("verify_interpolation_errors: tau must be positive and finite");
  }
  const StateSpaceSystem &rom = model.system;
  const Eigen::Index n = sys.order();
  const Eigen::Index r = rom.order();

  const CMatrix A = sys.A().cast<Complex>();
  const CMatrix B = sys.B().cast<Complex>();
  const CMatrix C = sys.C().cast<Complex>();
  const CMatrix Ahat = rom.A().cast<Complex>();
  const CMatrix Bhat = rom.B().cast<Complex>();
  const CMatrix Chat = rom.C().cast<Complex>();
  const CMatrix V = pair.V.cast<Complex>();
  const Matrix Zt_real = pair.Zt();
  const CMatrix Zt = Zt_real.cast<Complex>();
  const Matrix Pi = pair.V * Zt_real;

  const CMatrix EA = matrix_exponential(Matrix(sys.A() * tau)).cast<Complex>();
  const CMatrix EAhat = matrix_exponential(Matrix(rom.A() * tau)).cast<Complex>();
  const CMatrix EAP = matrix_exponential(Matrix(sys.A() * Pi * tau)).cast<Complex>();
  const CMatrix EPA = matrix_exponential(Matrix(Pi * sys.A() * tau)).cast<Complex>();
  const CMatrix In = CMatrix::Identity(n, n);
  const CMatrix Ir = CMatrix::Identity(r, r);

  // Elementwise magnitudes. Evaluating a formula with every factor replaced by its
  // magnitude bounds the size of the intermediate terms, so roundoff is a small multiple
  // of eps times that bound.
  auto mag = [](const auto &M) { return Matrix(M.cwiseAbs()); };
  const Matrix aC = mag(C), aChat = mag(Chat), aV = mag(V), aZt = mag(Zt);
  const Matrix aEA = mag(EA), aEAhat = mag(EAhat);
  const Matrix aGapR = aEA + mag(EAP), aGapL = aEA + mag(EPA);
  const Matrix aIn = Matrix::Identity(n, n), aIr = Matrix::Identity(r, r);

  std::vector<ShiftErrorReport> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    const Complex sigma = data.shifts[i];
    const CVector &b = data.right_directions[i];
    const CVector l = data.left_directions[i];  // used as the row c^T

    const CMatrix G = transfer_limited(sys, sigma, tau);
    const CMatrix Gr = transfer_limited(rom, sigma, tau);
    const CMatrix dG = transfer_limited_derivative(sys, sigma, tau);
    const CMatrix dGr = transfer_limited_derivative(rom, sigma, tau);

    ShiftErrorReport rep;
    rep.shift = sigma;
    rep.right_direct = (G - Gr) * b;
    rep.left_direct = ((G - Gr).transpose() * l);
    rep.bitangential_direct = (l.transpose() * (dG - dGr) * b)(0);

    const Complex decay = std::exp(-sigma * tau);
    const CMatrix shifted_hat = sigma * Ir - Ahat;
    const Eigen::PartialPivLU<CMatrix> lu_hat(shifted_hat);
    const CMatrix Rhat = lu_hat.inverse();
    const CMatrix Rhat2 = Rhat * Rhat;
    const CMatrix shifted = sigma * In - A;
    const Eigen::PartialPivLU<CMatrix> lu(shifted);

    const CVector Bb = B * b;
    const CMatrix lC = l.transpose() * C;  // 1 x n
    const CVector gap_right = (EAP - EA) * Bb;
    const CMatrix gap_left = lC * (EPA - EA);  // 1 x n

    rep.right_formula = decay * (C * (V * (Rhat * (Zt * gap_right))));
    rep.left_formula = (decay * (gap_left * V * Rhat * Zt * B)).transpose();

    // tau (sigma I - A) e^{-sigma tau} e^{A tau} + e^{-sigma tau} e^{A tau} - I
    const CMatrix M = (tau * shifted + In) * (decay * EA) - In;

    const Complex rp1 =
        -decay * (lC * V * Rhat2 * (shifted_hat * tau + Ir) * Zt * gap_right)(0);
    const CVector y = lu.solve(CVector(M * Bb));
    const CVector y2 = lu.solve(y);
    const CVector proj_p = y2 - V * (Rhat * (Zt * y));  // (I - P(sigma)) (sigma I - A)^{-2} M B b
    const Complex rp2 = decay * (lC * EA * proj_p)(0);

    const Complex rq1 =
        -decay * (gap_left * V * Rhat2 * (Ir + tau * shifted_hat) * Zt * Bb)(0);
    const CVector z = EA * Bb;
    const CVector z2 = lu.solve(CVector(lu.solve(z)));
    const CVector vz = lu.solve(CVector(V * (Rhat * (Zt * z))));
    const CVector proj_q = z2 - vz;  // (sigma I - A)^{-2} (I - Q(sigma)) e^{A tau} B b
    const Complex rq2 = decay * (lC * M * proj_q)(0);

    rep.bitangential_p = rp1 + rp2;
    rep.bitangential_q = rq1 + rq2;

    // Magnitude bounds for the direct evaluations and for every closed-form term.
    const double d = std::abs(decay);
    const Matrix aR = mag(CMatrix(lu.inverse()));
    const Matrix aR2 = aR * aR;
    const Matrix aRhat = mag(Rhat), aRhat2 = aRhat * aRhat;
    const Vector ab = mag(b), al = mag(l);
    const Vector aBb = mag(B) * ab, aBhatb = mag(Bhat) * ab;
    const Vector alC = aC.transpose() * al, alChat = aChat.transpose() * al;
    const Matrix aM = (tau * mag(shifted) + aIn) * (d * aEA) + aIn;
    const Matrix aShat = tau * mag(shifted_hat) + aIr;

    const Vector full_right = aC * aR * (aBb + d * aEA * aBb);
    const Vector rom_right = aChat * aRhat * (aBhatb + d * aEAhat * aBhatb);
    const Vector formula_right = d * aC * aV * aRhat * aZt * aGapR * aBb;
    rep.right_scale = full_right.norm() + rom_right.norm() + formula_right.norm();

    const Vector full_left = mag(B).transpose() * (aR.transpose() * alC +
                                                   d * aEA.transpose() * aR.transpose() * alC);
    const Vector rom_left = mag(Bhat).transpose() * (aRhat.transpose() * alChat +
                                                     d * aEAhat.transpose() * aRhat.transpose() *
                                                         alChat);
    const Vector formula_left =
        d * mag(B).transpose() * aZt.transpose() * aRhat.transpose() * aV.transpose() *
        aGapL.transpose() * alC;
    rep.left_scale = full_left.norm() + rom_left.norm() + formula_left.norm();

    const double full_deriv =
        alC.dot(aR2 * aBb) + d * alC.dot((tau * aR + aR2) * aEA * aBb);
    const double rom_deriv =
        alChat.dot(aRhat2 * aBhatb) + d * alChat.dot((tau * aRhat + aRhat2) * aEAhat * aBhatb);
    const Vector aMBb = aM * aBb;
    const Vector aEBb = aEA * aBb;
    const double mag_rp1 = d * alC.dot(aV * aRhat2 * aShat * aZt * aGapR * aBb);
    const double mag_rp2 =
        d * alC.dot(aEA * (aR2 * aMBb + aV * aRhat * aZt * aR * aMBb));
    const double mag_rq1 = d * (aGapL.transpose() * alC).dot(aV * aRhat2 * aShat * aZt * aBb);
    const double mag_rq2 =
        d * (aM.transpose() * alC).dot(aR2 * aEBb + aR * aV * aRhat * aZt * aEBb);
    rep.bitangential_scale = full_deriv + rom_deriv + mag_rp1 + mag_rp2 + mag_rq1 + mag_rq2;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace mortau
