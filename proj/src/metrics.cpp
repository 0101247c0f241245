// SPDX-License-Identifier: Apache-2.0

#include "mortau/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mortau
{

std::string to_string(ErrorMethod method)
{
  return method == ErrorMethod::VanLoan ? "vanloan" : "quadrature";
}

namespace
{

constexpr int kGaussNodes = 10;
constexpr Eigen::Index kMinPanels = 32;
constexpr Eigen::Index kMaxPanels = 65536;
constexpr double kUndefinedBelow = 1e-300;

struct GaussRule
{
  std::vector<double> x, w;  // on [-1, 1]
};

// Newton iteration on the Legendre polynomial, Golub-Welsch free.
GaussRule gauss_legendre(int q)
{
  GaussRule rule;
  rule.x.resize(q);
  rule.w.resize(q);
  for (int i = 0; i < q; ++i)
  {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= q; ++j)
      {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = q * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
      {
        break;
      }
    }
    rule.x[i] = -z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

const GaussRule &default_rule()
{
  static const GaussRule rule = gauss_legendre(kGaussNodes);
  return rule;
}

// Column k * J + j holds vec(C e^{A (k h + d_j)} B) for k < count and offsets d_0..d_{J-1}.
// Panel starts advance with e^{Ah}; every ceil(sqrt(count)) steps the state is reset from a
// coarse e^{A h S} chain so rounding does not accumulate over thousands of steps.
Matrix sample_impulse(const StateSpaceSystem &sys, double h, Eigen::Index count,
                      const std::vector<double> &offsets)
{
  const Matrix &A = sys.A();
  const Eigen::Index pm = sys.outputs() * sys.inputs();
  const auto J = static_cast<Eigen::Index>(offsets.size());
  const auto stride =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(std::sqrt(double(count)))));

  const Matrix fine = matrix_exponential(Matrix(A * h));
  const Matrix coarse = matrix_exponential(Matrix(A * (h * double(stride))));
  std::vector<Matrix> heads;
  heads.reserve(offsets.size());
  for (double d : offsets)
  {
    heads.push_back(d == 0.0 ? sys.C() : Matrix(sys.C() * matrix_exponential(Matrix(A * d))));
  }

  Matrix out(pm, count * J);
  Matrix anchor = sys.B();
  for (Eigen::Index k0 = 0; k0 < count; k0 += stride)
  {
    const Eigen::Index k1 = std::min(count, k0 + stride);
    Matrix X = anchor;
    for (Eigen::Index k = k0; k < k1; ++k)
    {
      for (Eigen::Index j = 0; j < J; ++j)
      {
        const Matrix g = heads[j] * X;
        out.col(k * J + j) = Eigen::Map<const Vector>(g.data(), pm);
      }
      if (k + 1 < k1)
      {
        X = fine * X;
      }
    }
    if (k1 < count)
    {
      anchor = coarse * anchor;
    }
  }
  return out;
}

Eigen::Index panels_for(double tau, double rate)
{
  const double want = std::ceil(tau * rate);
  if (!(want < double(kMaxPanels)))
  {
    return kMaxPanels;
  }
  return std::max(kMinPanels, static_cast<Eigen::Index>(want));
}

std::vector<double> node_offsets(double h)
{
  const GaussRule &rule = default_rule();
  std::vector<double> d(rule.x.size());
  for (std::size_t j = 0; j < d.size(); ++j)
  {
    d[j] = 0.5 * h * (rule.x[j] + 1.0);
  }
  return d;
}

double relative_of(double absolute, double reference)
{
  if (reference > 0.0)
  {
    return absolute / reference;
  }
  return absolute == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

void require_compatible(const StateSpaceSystem &full, const StateSpaceSystem &rom)
{
  if (full.inputs() != rom.inputs() || full.outputs() != rom.outputs())
  {
    throw DimensionMismatch("reduced model has " + std::to_string(rom.outputs()) + "x" +
                            std::to_string(rom.inputs()) + " transfer, full model " +
                            std::to_string(full.outputs()) + "x" +
                            std::to_string(full.inputs()));
  }
}

}  // namespace

double h2tau_norm(const StateSpaceSystem &sys, double tau)
{
  if (!(tau > 0.0) || !std::isfinite(tau))
  {
    throw InvalidArgument("h2tau_norm: tau must be positive and finite");
  }
  const Matrix P = vanloan_limited_gramian(sys.A(), sys.B(), tau);
  const double sq = (sys.C() * P * sys.C().transpose()).trace();
  return std::sqrt(std::max(0.0, sq));
}

struct H2TauErrorEvaluator::Samples
{
  double h = 0.0;
  Eigen::Index panels = 0;
  Matrix values;
};

H2TauErrorEvaluator::H2TauErrorEvaluator(StateSpaceSystem full, double tau)
  : full_(std::move(full)), tau_(tau), full_norm_(h2tau_norm(full_, tau))
{
}

H2TauErrorEvaluator::~H2TauErrorEvaluator() = default;

const H2TauErrorEvaluator::Samples &H2TauErrorEvaluator::samples() const
{
  std::call_once(samples_once_, [this] {
    auto s = std::make_unique<Samples>();
    s->panels = panels_for(tau_, full_.A().lpNorm<1>());
    s->h = tau_ / double(s->panels);
    s->values = sample_impulse(full_, s->h, s->panels, node_offsets(s->h));
    samples_ = std::move(s);
  });
  return *samples_;
}

double H2TauErrorEvaluator::vanloan_error(const ReducedModel &reduced) const
{
  const StateSpaceSystem &rom = reduced.system;
  require_compatible(full_, rom);
  const Eigen::Index n = full_.order(), r = rom.order();
  Matrix Ae = Matrix::Zero(n + r, n + r);
  Ae.topLeftCorner(n, n) = full_.A();
  Ae.bottomRightCorner(r, r) = rom.A();
  Matrix Be(n + r, full_.inputs());
  Be << full_.B(), rom.B();
  Matrix Ce(full_.outputs(), n + r);
  Ce << full_.C(), -rom.C();
  const Matrix P = vanloan_limited_gramian(Ae, Be, tau_);
  return std::sqrt(std::max(0.0, (Ce * P * Ce.transpose()).trace()));
}

double H2TauErrorEvaluator::quadrature_error(const ReducedModel &reduced) const
{
  const StateSpaceSystem &rom = reduced.system;
  require_compatible(full_, rom);
  const Samples &cached = samples();

  // The cached grid resolves the full model; a reduced model that varies faster gets a
  // dedicated finer grid for both sides.
  const Eigen::Index needed = panels_for(tau_, rom.A().lpNorm<1>());
  Matrix fresh;
  const Matrix *full_values = &cached.values;
  Eigen::Index panels = cached.panels;
  if (needed > cached.panels)
  {
    panels = needed;
    fresh = sample_impulse(full_, tau_ / double(panels), panels,
                           node_offsets(tau_ / double(panels)));
    full_values = &fresh;
  }
  const double h = tau_ / double(panels);
  const Matrix reduced_values = sample_impulse(rom, h, panels, node_offsets(h));

  const GaussRule &rule = default_rule();
  const auto J = static_cast<Eigen::Index>(rule.w.size());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < panels; ++k)
  {
    for (Eigen::Index j = 0; j < J; ++j)
    {
      const Eigen::Index col = k * J + j;
      sum += rule.w[j] * (full_values->col(col) - reduced_values.col(col)).squaredNorm();
    }
  }
  return std::sqrt(0.5 * h * sum);
}

H2TauError H2TauErrorEvaluator::operator()(const ReducedModel &reduced) const
{
  H2TauError e;
  e.tau = tau_;
  e.full_norm = full_norm_;
  e.absolute = vanloan_error(reduced);
  e.relative = relative_of(e.absolute, full_norm_);
  e.method = ErrorMethod::VanLoan;
  if (e.relative < kGramianRelativeFloor)
  {
    e.absolute = quadrature_error(reduced);
    e.relative = relative_of(e.absolute, full_norm_);
    e.method = ErrorMethod::Quadrature;
  }
  return e;
}

std::vector<std::pair<double, double>> H2TauErrorEvaluator::trajectory(
    const ReducedModel &reduced, int points) const
{
  require_compatible(full_, reduced.system);
  if (points < 2)
  {
    throw InvalidArgument("trajectory: need at least two points");
  }
  const double dt = tau_ / double(points - 1);
  const Matrix g = sample_impulse(full_, dt, points, {0.0});
  const Matrix gr = sample_impulse(reduced.system, dt, points, {0.0});
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i)
  {
    const double t = i == points - 1 ? tau_ : dt * i;
    out.emplace_back(t, (g.col(i) - gr.col(i)).norm());
  }
  return out;
}

H2TauError h2tau_error(const StateSpaceSystem &full, const ReducedModel &reduced, double tau)
{
  require_compatible(full, reduced.system);
  return H2TauErrorEvaluator(full, tau)(reduced);
}

namespace
{

constexpr double kSimpsonTolerance = 1e-10;
constexpr Eigen::Index kSimpsonMaxPanels = Eigen::Index{1} << 20;

// Composite Simpson on uniform grids, doubled until two successive estimates agree.
// `samples(N)` returns the integrand at t_i = i tau / N, i = 0..N.
template <class Sampler>
Complex adaptive_simpson(Sampler &&samples, double tau)
{
  Complex previous;
  for (Eigen::Index N = 16;; N *= 2)
  {
    const std::vector<Complex> f = samples(N);
    Complex s = f.front() + f.back();
    for (Eigen::Index i = 1; i < N; ++i)
    {
      s += (i % 2 ? 4.0 : 2.0) * f[i];
    }
    s *= tau / double(N) / 3.0;
    if (N > 16 && std::abs(s - previous) <= kSimpsonTolerance * std::abs(s) + 1e-300)
    {
      return s;
    }
    if (N >= kSimpsonMaxPanels)
    {
      return s;
    }
    previous = s;
  }
}

void require_directions(const StateSpaceSystem &sys, const CVector &b, const CVector &c)
{
  if (b.size() != sys.inputs() || c.size() != sys.outputs())
  {
    throw DimensionMismatch("direction sizes do not match the system's inputs/outputs");
  }
}

// c^* C e^{A t_i} B b * weight(t_i) on the grid t_i = i tau / N.
template <class Weight>
std::vector<Complex> weighted_response(const StateSpaceSystem &sys, const CVector &b,
                                       const CVector &c, double tau, Eigen::Index N,
                                       Weight &&weight)
{
  const double h = tau / double(N);
  const CMatrix E = matrix_exponential(Matrix(sys.A() * h)).cast<Complex>();
  const CMatrix cC = c.adjoint() * sys.C().cast<Complex>();
  CVector x = sys.B().cast<Complex>() * b;
  std::vector<Complex> f(N + 1);
  for (Eigen::Index i = 0; i <= N; ++i)
  {
    const double t = h * double(i);
    f[i] = (cC * x)(0) * weight(t);
    if (i < N)
    {
      x = E * x;
    }
  }
  return f;
}

}  // namespace

ComplexIdentity prop1_inner_product_identity(const StateSpaceSystem &sys, Complex mu,
                                             const CVector &b, const CVector &c, double tau)
{
  require_directions(sys, b, c);
  const Complex mu_bar = std::conj(mu);
  ComplexIdentity id;
  id.lhs = adaptive_simpson(
      [&](Eigen::Index N) {
        return weighted_response(sys, b, c, tau, N,
                                 [&](double t) { return std::exp(mu_bar * t); });
      },
      tau);
  const CMatrix G = transfer_limited(sys, -mu, tau);
  id.rhs = (c.adjoint() * G.conjugate() * b)(0);
  return id;
}

RealIdentity prop1_norm_identity(const CVector &b, const CVector &c, Complex mu, double tau)
{
  if (!(tau > 0.0))
  {
    throw InvalidArgument("prop1_norm_identity: tau must be positive");
  }
  const double re = mu.real();
  if (std::abs(re) < 1e-12)
  {
    throw DegenerateShift("prop1_norm_identity: |Re mu| < 1e-12");
  }
  const CMatrix outer = c * b.adjoint();
  const Complex sq = adaptive_simpson(
      [&](Eigen::Index N) {
        std::vector<Complex> f(N + 1);
        for (Eigen::Index i = 0; i <= N; ++i)
        {
          const double t = tau * double(i) / double(N);
          f[i] = (outer * std::exp(mu * t)).squaredNorm();
        }
        return f;
      },
      tau);
  RealIdentity id;
  id.lhs = std::sqrt(std::max(0.0, sq.real()));
  id.rhs = b.norm() * c.norm() * std::sqrt(std::abs(1.0 - std::exp(2.0 * tau * re)) /
                                           (2.0 * std::abs(re)));
  return id;
}

ComplexIdentity prop1_derivative_identity(const StateSpaceSystem &sys, Complex mu,
                                          const CVector &b, const CVector &c, double tau)
{
  require_directions(sys, b, c);
  const Complex mu_bar = std::conj(mu);
  ComplexIdentity id;
  id.lhs = adaptive_simpson(
      [&](Eigen::Index N) {
        return weighted_response(sys, b, c, tau, N,
                                 [&](double t) { return t * std::exp(mu_bar * t); });
      },
      tau);
  const CMatrix dG = transfer_limited_derivative(sys, -mu, tau);
  id.rhs = -(c.adjoint() * dG.conjugate() * b)(0);
  return id;
}

std::optional<double> OptimalityResiduals::max_of(const std::vector<std::optional<double>> &v)
{
  std::optional<double> best;
  for (const auto &x : v)
  {
    if (x && (!best || *x > *best))
    {
      best = x;
    }
  }
  return best;
}

OptimalityResiduals optimality_residuals(const LimitedTransferEvaluator &full,
                                         const ReducedModel &reduced)
{
  require_compatible(full.system(), reduced.system);
  const PoleResidueForm form = pole_residue(reduced);
  const LimitedTransferEvaluator rom(reduced.system, full.tau());

  auto ratio = [](double num, double den) -> std::optional<double> {
    if (!(den >= kUndefinedBelow))
    {
      return std::nullopt;
    }
    return num / den;
  };

  OptimalityResiduals out;
  for (std::size_t k = 0; k < form.poles.size(); ++k)
  {
    const Complex sigma = -form.poles[k];
    const CVector &b = form.right_directions[k];
    const CVector &c = form.left_directions[k];
    const CMatrix G = full.value(sigma);
    const CMatrix Gr = rom.value(sigma);
    const CMatrix dG = full.derivative(sigma);
    const CMatrix dGr = rom.derivative(sigma);

    out.shifts.push_back(sigma);
    out.right_tangential.push_back(ratio(((G - Gr) * b).norm(), (G * b).norm()));
    out.left_tangential.push_back(
        ratio((c.transpose() * (G - Gr)).norm(), (c.transpose() * G).norm()));
    out.bitangential.push_back(ratio(std::abs((c.transpose() * (dG - dGr) * b)(0)),
                                     std::abs((c.transpose() * dG * b)(0))));
  }
  return out;
}

OptimalityResiduals optimality_residuals(const StateSpaceSystem &full,
                                         const ReducedModel &reduced, double tau)
{
  return optimality_residuals(LimitedTransferEvaluator(full, tau), reduced);
}

}  // namespace mortau
