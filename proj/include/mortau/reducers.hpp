// SPDX-License-Identifier: Apache-2.0

#ifndef MORTAU_REDUCERS_HPP
#define MORTAU_REDUCERS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mortau/projectors.hpp"

namespace mortau
{

struct ReductionConfig
{
  Eigen::Index reduced_order = 0;
  double tau = 0.0;  // ignored by irka
  double tolerance = 1e-5;
  int max_iterations = 200;
  std::uint64_t seed = 0;
  // Start from the reflected poles of this model instead of random shifts.
  std::optional<ReducedModel> initial;

  // Throws InvalidArgument. `needs_tau` is false for irka.
  void validate(Eigen::Index full_order, bool needs_tau) const;
};

struct IterationRecord
{
  std::vector<Complex> shifts;  // sorted (Re, Im)
  double shift_change = 0.0;
  double condition = 1.0;       // cond(W^T V)
  double wall_seconds = 0.0;
  // Relative residuals of the two Sylvester equations (tl_tsia only).
  std::optional<double> sylvester_residual;
};

enum class TraceStatus
{
  Converged,
  MaxIterations,
  Failed,
};

std::string to_string(TraceStatus status);

struct IterationTrace
{
  std::vector<IterationRecord> records;
  TraceStatus status = TraceStatus::Failed;
  std::string reason;

  int iterations() const { return static_cast<int>(records.size()); }
};

struct ReductionResult
{
  ReducedModel model;
  IterationTrace trace;
  ProjectionPair pair;     // bases the model was projected with
  InterpolationData data;  // shifts/directions those bases interpolate
};

// Raised when a driver cannot deliver a converged model. Carries the trace and, when at
// least one projection succeeded, the iterate with the smallest shift change.
class ReductionFailure : public Error
{
public:
  ReductionFailure(const std::string &what, IterationTrace trace,
                   std::shared_ptr<const ReductionResult> best)
    : Error(what), trace_(std::move(trace)), best_(std::move(best))
  {
  }
  const IterationTrace &trace() const { return trace_; }
  const ReductionResult *best() const { return best_.get(); }
  int iteration() const { return trace_.iterations(); }

private:
  IterationTrace trace_;
  std::shared_ptr<const ReductionResult> best_;
};

class NoConvergence : public ReductionFailure
{
public:
  using ReductionFailure::ReductionFailure;
};

// ||current - previous||_2 / ||previous||_2 after sorting both by (Re, Im).
double shift_change_metric(std::vector<Complex> previous, std::vector<Complex> current);

// r real shifts log-uniform in [0.1, 1000] with unit random real directions.
InterpolationData random_interpolation_data(Eigen::Index r, Eigen::Index inputs,
                                            Eigen::Index outputs, std::uint64_t seed);

ReductionResult lt_irka(const StateSpaceSystem &sys, const ReductionConfig &config);
ReductionResult irka(const StateSpaceSystem &sys, const ReductionConfig &config);
// Without config.initial the start model is an irka run with the same seed.
ReductionResult tl_tsia(const StateSpaceSystem &sys, const ReductionConfig &config);

// Solutions of A P + P A_hat^T + B B_hat^T - e^{A tau} B B_hat^T e^{A_hat^T tau} = 0 and
// A^T Q + Q A_hat + C^T C_hat - e^{A^T tau} C^T C_hat e^{A_hat tau} = 0, assembled column by
// column from the eigendecomposition of A_hat.
struct SylvesterSolution
{
  Matrix P, Q;
};

SylvesterSolution solve_time_limited_sylvester(const LimitedTransferEvaluator &eval,
                                               const ReducedModel &model);
SylvesterSolution solve_time_limited_sylvester(const StateSpaceSystem &sys,
                                               const ReducedModel &model, double tau);

// max of the two residual norms, each relative to ||B B_hat^T||_F (resp. ||C^T C_hat||_F).
double sylvester_residual(const LimitedTransferEvaluator &eval, const ReducedModel &model,
                          const SylvesterSolution &sol);

}  // namespace mortau

#endif  // MORTAU_REDUCERS_HPP
