#pragma once

// Output-weight solvers: minimal-norm least squares and the recursive
// least-squares update used for streaming samples.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "celm/error.hpp"
#include "celm/network.hpp"

namespace celm::solver {

inline constexpr double kDefaultSvTol = 1e-10;
inline constexpr double kDefaultRidge = 1e-8;
// Reciprocal condition estimate below which H'H + ridge*I counts as singular.
inline constexpr double kSingularRcond = 1e-15;

struct RlsState {
  Matrix weights;   // K x N
  Matrix p_matrix;  // K x K, symmetric positive definite

  Eigen::Index hidden_size() const { return weights.rows(); }
};

/// Minimal-Frobenius-norm W minimizing ||HW - Y||, via thin SVD with
/// singular values below sv_tol * sigma_max dropped.
inline Matrix pinv_solve(const Matrix& h, const Matrix& y, double sv_tol = kDefaultSvTol) {
  if (h.rows() < 1 || h.cols() < 1) {
    throw ContractViolation("pinv_solve: H must be non-empty");
  }
  if (y.rows() != h.rows()) {
    throw ContractViolation("pinv_solve: H and Y row counts differ");
  }
  if (!h.allFinite() || !y.allFinite()) {
    throw DomainError("pinv_solve: non-finite entries");
  }
  Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  Matrix w = Matrix::Zero(h.cols(), y.cols());
  if (sigma.size() == 0 || sigma(0) == 0.0) return w;
  const double cutoff = sv_tol * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  const auto u = svd.matrixU().leftCols(rank);
  const auto v = svd.matrixV().leftCols(rank);
  Matrix projected = u.transpose() * y;
  for (Eigen::Index i = 0; i < rank; ++i) projected.row(i) /= sigma(i);
  w.noalias() = v * projected;
  return w;
}

/// P = (H0'H0 + ridge I)^-1 and W = P H0' Y0.
inline RlsState rls_init(const Matrix& h0, const Matrix& y0, double ridge = kDefaultRidge) {
  if (h0.rows() < 1 || h0.cols() < 1) {
    throw ContractViolation("rls_init: H0 must be non-empty");
  }
  if (y0.rows() != h0.rows()) {
    throw ContractViolation("rls_init: H0 and Y0 row counts differ");
  }
  if (ridge < 0.0) throw DomainError("rls_init: ridge must be non-negative");
  const Eigen::Index k = h0.cols();
  Matrix gram = h0.transpose() * h0;
  gram.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
    throw SingularityError("rls_init: H0'H0 + ridge*I is numerically singular");
  }
  RlsState s;
  s.p_matrix = llt.solve(Matrix::Identity(k, k));
  s.p_matrix = (0.5 * (s.p_matrix + s.p_matrix.transpose())).eval();
  s.weights = s.p_matrix * (h0.transpose() * y0);
  return s;
}

/// One recursive least-squares step: P is updated first, then W with the
/// new P.
inline RlsState rls_step(const RlsState& state, const Vector& h, const Vector& y) {
  if (h.size() != state.p_matrix.rows() || y.size() != state.weights.cols()) {
    throw ContractViolation("rls_step: dimensions do not match the current state");
  }
  const Vector ph = state.p_matrix * h;
  const double denom = 1.0 + h.dot(ph);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw RlsBreakdown("rls_step: 1 + h'Ph is not positive");
  }
  RlsState next;
  next.p_matrix = state.p_matrix - (ph * ph.transpose()) / denom;
  next.p_matrix = (0.5 * (next.p_matrix + next.p_matrix.transpose())).eval();
  const Vector innovation = y - state.weights.transpose() * h;  // N
  next.weights = state.weights + (next.p_matrix * h) * innovation.transpose();
  return next;
}

inline RlsState rls_step(const RlsState& state, const Vector& h, const CodedLabel& y) {
  return rls_step(state, h, y.values());
}

/// ||H'(HW - Y)||_F, the normal-equations residual.
inline double normal_residual(const Matrix& h, const Matrix& w, const Matrix& y) {
  return (h.transpose() * (h * w - y)).norm();
}

}  // namespace celm::solver
