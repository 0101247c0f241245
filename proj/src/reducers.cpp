// SPDX-License-Identifier: Apache-2.0

#include "mortau/reducers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace mortau
{

std::string to_string(TraceStatus status)
{
  switch (status)
  {
    case TraceStatus::Converged:
      return "converged";
    case TraceStatus::MaxIterations:
      return "max_iterations";
    case TraceStatus::Failed:
      return "failed";
  }
  return "failed";
}

void ReductionConfig::validate(Eigen::Index full_order, bool needs_tau) const
{
  if (reduced_order < 1 || reduced_order > full_order)
  {
    throw InvalidArgument("reduced order " + std::to_string(reduced_order) +
                          " outside [1, " + std::to_string(full_order) + "]");
  }
  if (needs_tau && !(tau > 0.0 && std::isfinite(tau)))
  {
    throw InvalidArgument("tau must be positive and finite");
  }
  if (!(tolerance > 0.0))
  {
    throw InvalidArgument("tolerance must be positive");
  }
  if (max_iterations < 1)
  {
    throw InvalidArgument("max_iterations must be at least 1");
  }
  if (initial && initial->order() != reduced_order)
  {
    throw InvalidArgument("initial model order does not match reduced_order");
  }
}

double shift_change_metric(std::vector<Complex> previous, std::vector<Complex> current)
{
  if (previous.size() != current.size())
  {
    throw DimensionMismatch("shift_change_metric: " + std::to_string(previous.size()) +
                            " vs " + std::to_string(current.size()) + " shifts");
  }
  std::sort(previous.begin(), previous.end(), complex_less);
  std::sort(current.begin(), current.end(), complex_less);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < previous.size(); ++i)
  {
    diff += std::norm(current[i] - previous[i]);
    ref += std::norm(previous[i]);
  }
  if (ref == 0.0)
  {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::sqrt(diff / ref);
}

InterpolationData random_interpolation_data(Eigen::Index r, Eigen::Index inputs,
                                            Eigen::Index outputs, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> exponent(-1.0, 3.0);
  std::normal_distribution<double> normal;
  auto unit = [&](Eigen::Index len) {
    CVector v(len);
    for (Eigen::Index i = 0; i < len; ++i)
    {
      v(i) = normal(rng);
    }
    return CVector(v / v.norm());
  };

  InterpolationData data;
  for (Eigen::Index i = 0; i < r; ++i)
  {
    data.shifts.emplace_back(std::pow(10.0, exponent(rng)), 0.0);
    data.right_directions.push_back(unit(inputs));
    data.left_directions.push_back(unit(outputs));
  }
  return data;
}

namespace
{

using Clock = std::chrono::steady_clock;

std::vector<Complex> sorted(std::vector<Complex> v)
{
  std::sort(v.begin(), v.end(), complex_less);
  return v;
}

// One projection step: reduced model, the bases it came from, and the data it interpolates.
struct Step
{
  ReducedModel model;
  ProjectionPair pair;
  InterpolationData data;
  std::optional<double> sylvester_residual;
};

// Shared fixed-point loop. `project` maps the current model-derived data (or the initial
// data) to a new projection step; the loop stops once the reflected poles settle.
ReductionResult iterate(const std::string &name, const ReductionConfig &config,
                        InterpolationData start,
                        const std::function<Step(const InterpolationData &)> &project)
{
  IterationTrace trace;
  std::shared_ptr<ReductionResult> best;
  double best_change = std::numeric_limits<double>::infinity();
  InterpolationData data = std::move(start);
  std::vector<Complex> previous = sorted(data.shifts);

  for (int it = 1; it <= config.max_iterations; ++it)
  {
    const auto t0 = Clock::now();
    std::optional<Step> step;
    InterpolationData next;
    try
    {
      step.emplace(project(data));
      next = reflect_poles(step->model);
    }
    catch (const Error &e)
    {
      trace.status = TraceStatus::Failed;
      trace.reason = name + " iteration " + std::to_string(it) + ": " + e.what();
      throw ReductionFailure(trace.reason, trace, best);
    }

    IterationRecord rec;
    rec.shifts = sorted(next.shifts);
    rec.shift_change = shift_change_metric(previous, rec.shifts);
    rec.condition = step->pair.condition;
    rec.sylvester_residual = step->sylvester_residual;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    trace.records.push_back(rec);

    const bool converged = rec.shift_change <= config.tolerance;
    if (rec.shift_change < best_change || !best || converged)
    {
      best_change = rec.shift_change;
      best = std::make_shared<ReductionResult>(
          ReductionResult{step->model, {}, step->pair, step->data});
    }
    if (converged)
    {
      trace.status = TraceStatus::Converged;
      best->trace = trace;
      return *best;
    }
    previous = rec.shifts;
    data = std::move(next);
  }

  trace.status = TraceStatus::MaxIterations;
  trace.reason = name + ": no convergence within " + std::to_string(config.max_iterations) +
                 " iterations (best shift change " + std::to_string(best_change) + ")";
  best->trace = trace;
  throw NoConvergence(trace.reason, trace, best);
}

InterpolationData starting_data(const StateSpaceSystem &sys, const ReductionConfig &config)
{
  if (config.initial)
  {
    return reflect_poles(*config.initial);
  }
  return random_interpolation_data(config.reduced_order, sys.inputs(), sys.outputs(),
                                   config.seed);
}

ReductionResult krylov_iteration(const std::string &name, const StateSpaceSystem &sys,
                                 const ReductionConfig &config, double tau)
{
  const LimitedTransferEvaluator eval(sys, tau);
  return iterate(name, config, starting_data(sys, config), [&](const InterpolationData &d) {
    ProjectionPair pair = build_time_limited_spaces(eval, d);
    ReducedModel model = petrov_galerkin(sys, pair);
    return Step{std::move(model), std::move(pair), d, std::nullopt};
  });
}

}  // namespace

ReductionResult lt_irka(const StateSpaceSystem &sys, const ReductionConfig &config)
{
  config.validate(sys.order(), true);
  return krylov_iteration("lt-irka", sys, config, config.tau);
}

ReductionResult irka(const StateSpaceSystem &sys, const ReductionConfig &config)
{
  config.validate(sys.order(), false);
  return krylov_iteration("irka", sys, config, std::numeric_limits<double>::infinity());
}

SylvesterSolution solve_time_limited_sylvester(const LimitedTransferEvaluator &eval,
                                               const ReducedModel &model)
{
  const StateSpaceSystem &sys = eval.system();
  if (!eval.limited())
  {
    throw InvalidArgument("solve_time_limited_sylvester: tau must be finite");
  }
  if (model.system.inputs() != sys.inputs() || model.system.outputs() != sys.outputs())
  {
    throw DimensionMismatch("solve_time_limited_sylvester: model shape differs from system");
  }
  const EigenDecomposition eig = eigendecompose(model.system.A());
  const Eigen::Index n = sys.order();
  const Eigen::Index r = model.order();
  const CMatrix B = sys.B().cast<Complex>();
  const CMatrix Ct = sys.C().transpose().cast<Complex>();
  // Rows of R^{-1} B_hat and columns of C_hat R: the directions of each eigen-column.
  const CMatrix right = eig.inverse_right_vectors * model.system.B().cast<Complex>();
  const CMatrix left = model.system.C().cast<Complex>() * eig.right_vectors;

  CMatrix Phat(n, r), Qhat(n, r);
  for (Eigen::Index i = 0; i < r; ++i)
  {
    const Complex sigma = -eig.values(i);
    const CVector b = right.row(i).transpose();
    const CVector c = left.col(i);
    try
    {
      const ShiftedSolver::Factorization f = eval.solver().factor(sigma);
      Phat.col(i) = f.solve(B * b - eval.damped_exp_b(sigma) * b);
      Qhat.col(i) = f.solve_transposed(Ct * c - eval.damped_exp_ct(sigma) * c);
    }
    catch (const SingularShift &e)
    {
      throw SylvesterFailure(std::string("Sylvester column solve: ") + e.what());
    }
  }
  // P S = Phat with S = R^{-T}; Q R = Qhat.
  SylvesterSolution sol;
  sol.P = (Phat * eig.right_vectors.transpose()).real();
  sol.Q = (Qhat * eig.inverse_right_vectors).real();
  return sol;
}

SylvesterSolution solve_time_limited_sylvester(const StateSpaceSystem &sys,
                                               const ReducedModel &model, double tau)
{
  return solve_time_limited_sylvester(LimitedTransferEvaluator(sys, tau), model);
}

double sylvester_residual(const LimitedTransferEvaluator &eval, const ReducedModel &model,
                          const SylvesterSolution &sol)
{
  const StateSpaceSystem &sys = eval.system();
  const StateSpaceSystem &rom = model.system;
  const double tau = eval.tau();
  const Matrix Ehat = matrix_exponential(Matrix(rom.A() * tau));

  const Matrix BBt = sys.B() * rom.B().transpose();
  const Matrix rp = sys.A() * sol.P + sol.P * rom.A().transpose() + BBt -
                    eval.exp_b() * rom.B().transpose() * Ehat.transpose();
  const Matrix CtC = sys.C().transpose() * rom.C();
  const Matrix rq = sys.A().transpose() * sol.Q + sol.Q * rom.A() + CtC -
                    eval.exp_ct() * rom.C() * Ehat;
  auto rel = [](const Matrix &res, const Matrix &ref) {
    const double d = ref.norm();
    return d > 0.0 ? res.norm() / d : res.norm();
  };
  return std::max(rel(rp, BBt), rel(rq, CtC));
}

ReductionResult tl_tsia(const StateSpaceSystem &sys, const ReductionConfig &config)
{
  config.validate(sys.order(), true);
  ReductionConfig start_config = config;
  if (!start_config.initial)
  {
    try
    {
      start_config.initial = irka(sys, config).model;
    }
    catch (const ReductionFailure &e)
    {
      if (!e.best())
      {
        throw;
      }
      start_config.initial = e.best()->model;
    }
  }

  const LimitedTransferEvaluator eval(sys, config.tau);
  ReducedModel current = *start_config.initial;
  return iterate("tl-tsia", config, reflect_poles(current), [&](const InterpolationData &d) {
    // d is the reflection of `current`; the Sylvester solve reads the model directly.
    const SylvesterSolution sol = solve_time_limited_sylvester(eval, current);
    const double residual = sylvester_residual(eval, current, sol);
    ProjectionPair pair = make_projection_pair(sol.P, sol.Q);
    ReducedModel model = petrov_galerkin(sys, pair);
    current = model;
    return Step{std::move(model), std::move(pair), d, residual};
  });
}

}  // namespace mortau
