// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_VERIFICATION_HPP
#define MORTAU_VERIFICATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mortau/metrics.hpp"
#include "mortau/reducers.hpp"

namespace mortau
{

struct TheoremCheckResult
{
  std::string theorem_id;
  std::string instance_description;
  double max_relative_discrepancy = 0.0;
  bool pass = false;
  double tolerance_used = 0.0;
};

TheoremCheckResult make_check(std::string id, std::string description, double discrepancy,
                              double tolerance);

inline constexpr double kTheorem2Tolerance = 1e-8;
inline constexpr double kTheorem3Tolerance = 1e-6;  // radians
inline constexpr double kProp1Tolerance = 1e-7;

// The three interpolation-identity checks for one (system, mu, b, c, tau) draw. Discrepancy
// is |lhs - rhs| / max(|lhs|, |rhs|), worst over the identities.
TheoremCheckResult check_prop1(const StateSpaceSystem &sys, Complex mu, const CVector &b,
                               const CVector &c, double tau);

// Projects onto the time-limited spaces of `data`, then compares every direct tangential
// and bi-tangential error with its closed form.
TheoremCheckResult check_theorem2(const StateSpaceSystem &sys, const InterpolationData &data,
                                  double tau);

// Runs lt_irka, then measures the largest principal angle between the fixed-point spaces
// of the converged model and the spans of the Sylvester solutions P, Q, the latter from an
// independent Kronecker-product solve when n r is small enough.
TheoremCheckResult check_theorem3(const StateSpaceSystem &sys, const ReductionConfig &config);

// Passes when the largest optimality residual at tau_small is at least 10x below the one at
// tau_large. Discrepancy is 10 * small / large against tolerance 1.
TheoremCheckResult check_optimality_trend(const StateSpaceSystem &sys,
                                          const ReductionConfig &config, double tau_small,
                                          double tau_large);

// Dense solve of A X + X M = F through the Kronecker form; for cross-checking.
Matrix kronecker_sylvester(const Matrix &A, const Matrix &M, const Matrix &F);

// Conjugate-closed random interpolation data mixing real shifts and pairs, with shifts on
// both sides of the imaginary axis.
InterpolationData random_conjugate_data(Eigen::Index r, Eigen::Index inputs,
                                        Eigen::Index outputs, std::uint64_t seed);

// Named suites over seeded synthetic systems: "prop1", "theorem2", "theorem3", "trend",
// or "all".
std::vector<TheoremCheckResult> run_suite(const std::string &suite, std::uint64_t seed);

}  // namespace mortau

#endif  // MORTAU_VERIFICATION_HPP
