#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <variant>

namespace tmvn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense symmetric matrix. Construction copies one triangle onto the other,
/// so entry (i,j) and (j,i) are bit-identical.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index dim);

  /// Accepts m only if it is symmetric to within tol * max(1, max|m_ij|);
  /// throws InputError otherwise, NonFinite on NaN/Inf.
  static SymMatrix from_dense(const Matrix& m, double tol = 1e-12);
  /// Averages m with its transpose; never throws on asymmetry.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Index dim);

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }

 private:
  Matrix m_;
};

/// Symmetric positive-definite matrix with its Cholesky factor cached.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  /// Throws SingularSigma if the factorization fails or the factor has a
  /// non-positive diagonal.
  explicit SpdMatrix(const SymMatrix& m);
  explicit SpdMatrix(const Matrix& m) : SpdMatrix(SymMatrix::from_dense(m)) {}

  Index dim() const { return m_.dim(); }
  const SymMatrix& sym() const { return m_; }
  const Matrix& dense() const { return m_.dense(); }
  /// Lower-triangular L with dense() == L * L^T.
  const Matrix& factor() const { return l_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;
  double log_det() const;
  /// b' M^{-1} b.
  double inv_quadratic(const Vector& b) const;

 private:
  SymMatrix m_;
  Matrix l_;
};

/// Eigen-structure of a PSD matrix: M = H diag(eigenvalues) H^T, eigenvalues
/// sorted descending, the first `rank` columns of H spanning the range.
struct PsdClassification {
  int rank = 0;
  Vector eigenvalues;
  Matrix basis;

  Matrix range_basis() const { return basis.leftCols(rank); }
  Matrix null_basis() const { return basis.rightCols(basis.cols() - rank); }
};

/// Returned instead of a classification when M has a clearly negative
/// eigenvalue. `direction` is a unit eigenvector for `min_eigenvalue`.
struct NotPsd {
  double min_eigenvalue = 0.0;
  Vector direction;
};

using PsdResult = std::variant<PsdClassification, NotPsd>;

inline constexpr double kDefaultRankTol = 1e-9;

/// Rank classification with a relative tolerance. NotPsd iff some eigenvalue
/// is below -rank_tol * ||M||_F; rank counts eigenvalues above
/// rank_tol * max(1, ||M||_F). Throws NonFinite on NaN/Inf entries.
PsdResult classify_psd(const SymMatrix& m, double rank_tol = kDefaultRankTol);

/// v'(U + vv')^{-1} v via v'U^{-1}v / (1 + v'U^{-1}v). Lies in [0, 1).
double woodbury_quadratic(const SpdMatrix& u, const Vector& v);

/// [tr(M^2)]^{1/2}.
double frobenius_norm(const SymMatrix& m);
double frobenius_norm(const Matrix& m);

void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

}  // namespace tmvn
