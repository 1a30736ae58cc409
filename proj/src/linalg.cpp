// SPDX-License-Identifier: Apache-2.0
#include "kge/linalg.hpp"

#include <cmath>

namespace kge {

Matrix cross_gram(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("cross_gram: shapes disagree (" +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.rows()) + "x" + std::to_string(y.cols()) + ")");
  }
  const Eigen::Index d = x.cols();
  Matrix g(d, d);
  if (&x == &y) {
    // Self case: fill one triangle and mirror so G(i,j) == G(j,i) bit for bit.
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) g(i, j) = g(j, i);
  } else {
    g.noalias() = x.transpose() * y;
  }
  return g;
}

double hadamard_sum(const std::vector<const Matrix*>& factors) {
  if (factors.empty()) throw DimensionError("hadamard_sum: empty factor list");
  const Eigen::Index rows = factors[0]->rows();
  const Eigen::Index cols = factors[0]->cols();
  for (const Matrix* m : factors) {
    if (m->rows() != rows || m->cols() != cols)
      throw DimensionError("hadamard_sum: factor shapes disagree");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double p = (*factors[0])(i, j);
      for (std::size_t m = 1; m < factors.size(); ++m) p *= (*factors[m])(i, j);
      acc += p;
    }
  }
  return acc;
}

double hadamard_sum(const std::vector<Matrix>& factors) {
  std::vector<const Matrix*> ptrs;
  ptrs.reserve(factors.size());
  for (const Matrix& m : factors) ptrs.push_back(&m);
  return hadamard_sum(ptrs);
}

Vector column_sums(const Matrix& x) {
  if (x.rows() < 1) throw DimensionError("column_sums: need at least one row");
  Vector s = Vector::Zero(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) s += x.row(r).transpose();
  return s;
}

AdamState make_adam_state(Eigen::Index rows, Eigen::Index cols) {
  AdamState st;
  st.first_moment = Matrix::Zero(rows, cols);
  st.second_moment = Matrix::Zero(rows, cols);
  return st;
}

void adam_step(Matrix& table, const Matrix& grad, AdamState& state,
               const AdamHyper& hp, const std::string& table_name) {
  if (table.rows() != grad.rows() || table.cols() != grad.cols())
    throw DimensionError("adam_step: gradient shape does not match table " + table_name);
  if (state.first_moment.rows() != table.rows() || state.first_moment.cols() != table.cols())
    throw DimensionError("adam_step: state shape does not match table " + table_name);
  if (!(hp.lr > 0) || !(hp.beta1 >= 0 && hp.beta1 < 1) || !(hp.beta2 >= 0 && hp.beta2 < 1) ||
      !(hp.eps > 0))
    throw NumericError("adam_step: hyperparameters out of range");
  if (!grad.allFinite())
    throw NumericError("adam_step: non-finite gradient for table " +
                       (table_name.empty() ? std::string("<unnamed>") : table_name));

  state.step_count += 1;
  const double b1 = hp.beta1, b2 = hp.beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * grad;
  state.second_moment.array() =
      b2 * state.second_moment.array() + (1.0 - b2) * grad.array().square();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  table.array() -= hp.lr * (state.first_moment.array() / c1) /
                   ((state.second_moment.array() / c2).sqrt() + hp.eps);
}

}  // namespace kge
