// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_PROJECTORS_HPP
#define MORTAU_PROJECTORS_HPP

#include <vector>

#include "mortau/system.hpp"

namespace mortau
{

// Shifts sigma_i with right directions b_i (inputs) and left directions c_i (outputs).
struct InterpolationData
{
  std::vector<Complex> shifts;
  std::vector<CVector> right_directions;
  std::vector<CVector> left_directions;

  std::size_t size() const { return shifts.size(); }

  // Checks lengths, direction sizes, conjugate closure and uniqueness. Throws
  // InvalidArgument / DimensionMismatch.
  void validate(Eigen::Index inputs, Eigen::Index outputs) const;
};

// sigma_k = -lambda_k of the reduced poles with the residue directions of pole_residue().
InterpolationData reflect_poles(const ReducedModel &model);

// True when |Im z| is negligible relative to |z|.
bool is_real_shift(Complex z);

struct ProjectionPair
{
  Matrix V, W;                  // real, orthonormal columns
  std::vector<bool> retained_v;  // one flag per realified column
  std::vector<bool> retained_w;
  double condition = 1.0;       // 2-norm condition number of W^T V
  bool realified = false;       // built from (Re, Im) parts of complex columns

  // Z^T = (W^T V)^{-1} W^T, so that Pi = V Z^T is the oblique projector.
  Matrix Zt() const;
  Matrix Pi() const;
};

inline constexpr double kMaxProjectionCondition = 1e12;

// Right space spanned by (sigma_i I - A)^{-1}(I - e^{-sigma_i tau} e^{A tau}) B b_i, left
// space by (sigma_i I - A^T)^{-1}(I - e^{-sigma_i tau} e^{A^T tau}) C^T c_i. Conjugate pairs
// contribute (Re, Im) columns; both bases are orthonormalized. An evaluator with infinite
// tau yields the ordinary rational Krylov spaces.
ProjectionPair build_time_limited_spaces(const LimitedTransferEvaluator &eval,
                                         const InterpolationData &data);
ProjectionPair build_time_limited_spaces(const StateSpaceSystem &sys,
                                         const InterpolationData &data, double tau);
ProjectionPair build_krylov_spaces(const StateSpaceSystem &sys, const InterpolationData &data);

// Projection bases keep every column with a nonzero orthogonalized residual. Interpolation
// bases of systems with fast-decaying Hankel spectra are dependent to machine precision well
// before order r, and the projected model stays accurate regardless; cond(W^T V) is the
// guard against a degenerate projection.
inline constexpr double kProjectionRankTolerance = 0.0;

// Orthonormalizes raw real bases into a pair. Throws RankCollapse when either loses rank.
ProjectionPair make_projection_pair(const Matrix &Vraw, const Matrix &Wraw);

// A_hat = Z^T A V, B_hat = Z^T B, C_hat = C V.
ReducedModel petrov_galerkin(const StateSpaceSystem &sys, const ProjectionPair &pair);

// Tangential interpolation errors at one shift, evaluated directly and by closed form.
// Left quantities are row vectors c^T (...), matching the transpose pairing of the spaces.
struct ShiftErrorReport
{
  Complex shift;
  CVector right_direct, right_formula;    // p entries
  CVector left_direct, left_formula;      // m entries
  Complex bitangential_direct;
  Complex bitangential_p, bitangential_q;  // R_P1 + R_P2 and R_Q1 + R_Q2
  // Roundoff scales: each direct evaluation and closed-form term recomputed with every
  // factor replaced by its elementwise magnitude.
  double right_scale = 0.0, left_scale = 0.0, bitangential_scale = 0.0;

  double right_discrepancy() const;
  double left_discrepancy() const;
  double bitangential_discrepancy() const;  // worst of P, Q and P-vs-Q
  double max_discrepancy() const;
};

// Relative discrepancies are taken against max(|direct|, |formula|, kErrorFloor * scale).
// Errors far below the roundoff scale are thereby compared in absolute terms.
inline constexpr double kErrorFloor = 1e-6;

std::vector<ShiftErrorReport> verify_interpolation_errors(const StateSpaceSystem &sys,
                                                          const ReducedModel &model,
                                                          const ProjectionPair &pair,
                                                          const InterpolationData &data,
                                                          double tau);

}  // namespace mortau

#endif  // MORTAU_PROJECTORS_HPP
