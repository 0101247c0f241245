// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_METRICS_HPP
#define MORTAU_METRICS_HPP

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mortau/system.hpp"

namespace mortau
{

// How the absolute error of an H2TauError was obtained.
enum class ErrorMethod
{
  VanLoan,     // Gramian of the error system
  Quadrature,  // Gauss-Legendre integration of ||g(t) - g_hat(t)||_F^2
};

std::string to_string(ErrorMethod method);

struct H2TauError
{
  double absolute = 0.0;
  double relative = 0.0;
  double tau = 0.0;
  double full_norm = 0.0;
  ErrorMethod method = ErrorMethod::VanLoan;
};

// Relative errors below this are recomputed by quadrature: the Gramian route forms
// ||g||^2 - 2<g, g_hat> + ||g_hat||^2 and cannot resolve anything under ~1e-8.
inline constexpr double kGramianRelativeFloor = 1e-5;

// sqrt(trace(C P_tau C^T)), clamped at zero.
double h2tau_norm(const StateSpaceSystem &sys, double tau);

H2TauError h2tau_error(const StateSpaceSystem &full, const ReducedModel &reduced, double tau);

// Reusable H2(tau) error evaluation against one full-order system. Keeps the full norm and
// the sampled full impulse response so that many reduced models can be scored cheaply.
class H2TauErrorEvaluator
{
public:
  H2TauErrorEvaluator(StateSpaceSystem full, double tau);
  ~H2TauErrorEvaluator();

  H2TauError operator()(const ReducedModel &reduced) const;

  // Gramian-route error without the quadrature refinement.
  double vanloan_error(const ReducedModel &reduced) const;
  // Quadrature-route error; relative accuracy near machine precision of ||g||.
  double quadrature_error(const ReducedModel &reduced) const;

  // (t, ||g(t) - g_hat(t)||_F) on a uniform grid of `points` samples over [0, tau].
  std::vector<std::pair<double, double>> trajectory(const ReducedModel &reduced,
                                                    int points = 1000) const;

  double full_norm() const { return full_norm_; }
  double tau() const { return tau_; }
  const StateSpaceSystem &full() const { return full_; }

private:
  struct Samples;
  const Samples &samples() const;

  StateSpaceSystem full_;
  double tau_;
  double full_norm_;
  mutable std::once_flag samples_once_;
  mutable std::unique_ptr<Samples> samples_;
};

// Both sides of an identity, returned for property testing.
struct ComplexIdentity
{
  Complex lhs, rhs;
};

struct RealIdentity
{
  double lhs, rhs;
};

// <g, c b^* e^{mu t}>_{H2(tau)} by quadrature vs c^* conj(G_tau(-mu)) b.
ComplexIdentity prop1_inner_product_identity(const StateSpaceSystem &sys, Complex mu,
                                             const CVector &b, const CVector &c, double tau);

// ||c b^* e^{mu t}||_{H2(tau)} by quadrature vs
// ||b|| ||c|| sqrt(|1 - e^{2 tau Re mu}| / (2 |Re mu|)). Throws DegenerateShift when
// |Re mu| < 1e-12.
RealIdentity prop1_norm_identity(const CVector &b, const CVector &c, Complex mu, double tau);

// <g, c b^* t e^{mu t}>_{H2(tau)} by quadrature vs -c^* conj(G_tau'(-mu)) b.
ComplexIdentity prop1_derivative_identity(const StateSpaceSystem &sys, Complex mu,
                                          const CVector &b, const CVector &c, double tau);

// Relative violation of the time-limited interpolation conditions at the reflected reduced
// poles. An entry is nullopt ("undefined") when its reference quantity is below 1e-300.
struct OptimalityResiduals
{
  std::vector<Complex> shifts;
  std::vector<std::optional<double>> right_tangential;
  std::vector<std::optional<double>> left_tangential;
  std::vector<std::optional<double>> bitangential;

  // Largest defined entry, or nullopt if every entry is undefined.
  static std::optional<double> max_of(const std::vector<std::optional<double>> &v);
};

OptimalityResiduals optimality_residuals(const StateSpaceSystem &full,
                                         const ReducedModel &reduced, double tau);
OptimalityResiduals optimality_residuals(const LimitedTransferEvaluator &full,
                                         const ReducedModel &reduced);

}  // namespace mortau

#endif  // MORTAU_METRICS_HPP
