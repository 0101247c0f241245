// SPDX-License-Identifier: Apache-2.0

#include "mortau/models.hpp"

#include <cmath>
#include <random>

namespace mortau
{

StateSpaceSystem synthetic_system(Eigen::Index n, Eigen::Index inputs, Eigen::Index outputs,
                                  std::uint64_t seed)
{
  if (n < 1 || inputs < 1 || outputs < 1)
  {
    throw InvalidArgument("synthetic_system: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  auto log_uniform = [&](double lo, double hi) {
    return std::pow(10.0, lo + (hi - lo) * unit(rng));
  };

  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n;)
  {
    if (k + 1 < n && unit(rng) < 0.5)
    {
      const double re = -log_uniform(-1.0, 1.0);
      const double im = log_uniform(-1.0, 1.3);
      L(k, k) = re;
      L(k + 1, k + 1) = re;
      L(k, k + 1) = im;
      L(k + 1, k) = -im;
      k += 2;
    }
    else
    {
      L(k, k) = -log_uniform(-1.0, std::log10(30.0));
      k += 1;
    }
  }

  Matrix S = Matrix::Identity(n, n);
  const double spread = 0.5 / std::sqrt(double(n));
  for (Eigen::Index j = 0; j < n; ++j)
  {
    for (Eigen::Index i = 0; i < n; ++i)
    {
      S(i, j) += spread * normal(rng);
    }
  }
  Matrix B(n, inputs), C(outputs, n);
  for (Eigen::Index j = 0; j < inputs; ++j)
  {
    for (Eigen::Index i = 0; i < n; ++i)
    {
      B(i, j) = normal(rng);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
  {
    for (Eigen::Index i = 0; i < outputs; ++i)
    {
      C(i, j) = normal(rng);
    }
  }
  // A = S L S^{-1}, formed as (S^{-T} (S L)^T)^T.
  const Matrix SL = S * L;
  const Matrix A = S.transpose().partialPivLu().solve(SL.transpose()).transpose();
  return StateSpaceSystem(A, B, C,
                          "synthetic-" + std::to_string(n) + "-" + std::to_string(inputs) +
                              "x" + std::to_string(outputs) + "-" + std::to_string(seed));
}

StateSpaceSystem fom_system()
{
  const Eigen::Index n = 1006;
  Matrix A = Matrix::Zero(n, n);
  const double freq[] = {100.0, 200.0, 400.0};
  for (int k = 0; k < 3; ++k)
  {
    A(2 * k, 2 * k) = -1.0;
    A(2 * k + 1, 2 * k + 1) = -1.0;
    A(2 * k, 2 * k + 1) = freq[k];
    A(2 * k + 1, 2 * k) = -freq[k];
  }
  for (Eigen::Index i = 0; i < 1000; ++i)
  {
    A(6 + i, 6 + i) = -double(i + 1);
  }
  Matrix B(n, 1);
  B.topRows(6).setConstant(10.0);
  B.bottomRows(1000).setConstant(1.0);
  return StateSpaceSystem(A, B, B.transpose(), "fom");
}

}  // namespace mortau
