// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "kge/errors.hpp"

namespace kge {

// Parameter tables are row-major so one embedding row is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// X^T Y for two n-by-d tables. Entry (i,j) is the inner product of column i
/// of X with column j of Y. When both arguments are the same object the
/// result is exactly symmetric (one triangle is computed and mirrored).
Matrix cross_gram(const Matrix& x, const Matrix& y);

/// Sum over all entries of the elementwise product of the factors.
/// All factors must share the same shape; the list must be non-empty.
double hadamard_sum(const std::vector<const Matrix*>& factors);
double hadamard_sum(const std::vector<Matrix>& factors);

/// Per-column sums of an n-by-d table, as a length-d vector.
Vector column_sums(const Matrix& x);

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for one parameter table.
struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  std::int64_t step_count = 0;
};

AdamState make_adam_state(Eigen::Index rows, Eigen::Index cols);

/// One bias-corrected Adam update, in place. Rejects non-finite gradient
/// entries with a NumericError naming the table.
void adam_step(Matrix& table, const Matrix& grad, AdamState& state,
               const AdamHyper& hp, const std::string& table_name = "");

}  // namespace kge
