#include "tmvn/matrix_core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmvn/errors.hpp"

namespace tmvn {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFinite(std::string(what) + " contains NaN or Inf");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NonFinite(std::string(what) + " contains NaN or Inf");
}

SymMatrix::SymMatrix(Index dim) : m_(Matrix::Zero(dim, dim)) {}

SymMatrix SymMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw InputError("matrix is not square");
  require_finite(m, "matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < i; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
    }
  }
  return symmetrized(m);
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("matrix is not square");
  SymMatrix out;
  out.m_ = m;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < i; ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      out.m_(i, j) = avg;
      out.m_(j, i) = avg;
    }
  }
  return out;
}

SymMatrix SymMatrix::identity(Index dim) {
  return symmetrized(Matrix::Identity(dim, dim));
}

SpdMatrix::SpdMatrix(const SymMatrix& m) : m_(m) {
  require_finite(m.dense(), "covariance");
  if (m.dim() == 0) throw SingularSigma("empty matrix");
  Eigen::LLT<Matrix> llt(m.dense());
  if (llt.info() != Eigen::Success) throw SingularSigma("matrix is not positive definite");
  l_ = llt.matrixL();
  const double dmax = l_.diagonal().maxCoeff();
  const double dmin = l_.diagonal().minCoeff();
  // |Sigma| near zero relative to its scale.
  if (!(dmin > 0.0) || dmin < 1e-12 * dmax) {
    throw SingularSigma("matrix is numerically singular");
  }
}

Vector SpdMatrix::solve(const Vector& b) const {
  const auto& lower = l_.triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(b));
}

Matrix SpdMatrix::solve(const Matrix& b) const {
  const auto& lower = l_.triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(b));
}

Matrix SpdMatrix::inverse() const {
  Matrix inv = solve(Matrix::Identity(dim(), dim()).eval());
  return SymMatrix::symmetrized(inv).dense();
}

double SpdMatrix::log_det() const {
  return 2.0 * l_.diagonal().array().log().sum();
}

double SpdMatrix::inv_quadratic(const Vector& b) const {
  Vector y = l_.triangularView<Eigen::Lower>().solve(b);
  return y.squaredNorm();
}

PsdResult classify_psd(const SymMatrix& m, double rank_tol) {
  require_finite(m.dense(), "matrix");
  const Index d = m.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.dense());
  // Eigen returns ascending order; flip to descending.
  Vector evals = es.eigenvalues().reverse();
  Matrix basis = es.eigenvectors().rowwise().reverse();

  const double fro = frobenius_norm(m);
  if (d > 0 && evals(d - 1) < -rank_tol * fro) {
    return NotPsd{evals(d - 1), basis.col(d - 1)};
  }
  const double cut = rank_tol * std::max(1.0, fro);
  PsdClassification out;
  out.rank = 0;
  for (Index i = 0; i < d; ++i) {
    if (evals(i) > cut) {
      ++out.rank;
    } else {
      evals(i) = 0.0;
    }
  }
  out.eigenvalues = std::move(evals);
  out.basis = std::move(basis);
  return out;
}

double woodbury_quadratic(const SpdMatrix& u, const Vector& v) {
  if (v.size() != u.dim()) throw InputError("woodbury_quadratic: dimension mismatch");
  const double a = u.inv_quadratic(v);
  if (!std::isfinite(a)) throw NonFinite("woodbury_quadratic: non-finite quadratic form");
  // a / (1 + a) rounds to 1 once a exceeds 2^53; the exact value is below 1.
  return std::min(a / (1.0 + a), std::nextafter(1.0, 0.0));
}

double frobenius_norm(const SymMatrix& m) { return frobenius_norm(m.dense()); }

double frobenius_norm(const Matrix& m) { return std::sqrt(m.cwiseAbs2().sum()); }

}  // namespace tmvn
