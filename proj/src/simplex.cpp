#include "tmvn/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "tmvn/errors.hpp"

namespace tmvn::lp {
namespace {

// Rows 0..m-1 are constraints, row m is the reduced-cost row; the last
// column holds the right-hand side (negated objective in the cost row).
struct Tableau {
  Matrix t;
  std::vector<Index> basis;
  Index m, cols;

  void pivot(Index row, Index col) {
    t.row(row) /= t(row, col);
    for (Index i = 0; i <= m; ++i) {
      if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
    }
    basis[row] = col;
  }

  // Minimizes the cost row over columns allowed[j]. Returns false if unbounded.
  bool run(const std::vector<bool>& allowed, double tol) {
    const Index rhs = cols;
    for (int guard = 0; guard < 10000; ++guard) {
      Index enter = -1;
      for (Index j = 0; j < cols; ++j) {
        if (allowed[j] && t(m, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (t(i, enter) > tol) {
          const double ratio = t(i, rhs) / t(i, enter);
          if (ratio < best - tol || (std::abs(ratio - best) <= tol && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error("simplex: iteration limit reached");
  }
};

}  // namespace

Result maximize(const Matrix& a, const Vector& b, const Vector& c, double tol) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m || c.size() != n) throw InputError("lp::maximize: dimension mismatch");

  Tableau tab;
  tab.m = m;
  tab.cols = n + m;
  tab.t = Matrix::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign * b(i);
    tab.basis[i] = n + i;
  }

  // Phase I: minimize the sum of artificials.
  for (Index j = 0; j < n; ++j) tab.t(m, j) = -tab.t.col(j).head(m).sum();
  tab.t(m, n + m) = -tab.t.col(n + m).head(m).sum();
  std::vector<bool> allowed(n + m, true);
  tab.run(allowed, tol);
  const double scale = 1.0 + b.cwiseAbs().sum();
  Result out;
  if (-tab.t(m, n + m) > 1e3 * tol * scale) {
    out.status = Status::infeasible;
    return out;
  }

  // Drive artificials out of the basis; rows that cannot be are redundant.
  std::vector<bool> redundant(m, false);
  for (Index i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    Index col = -1;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > 1e3 * tol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
    } else {
      redundant[i] = true;
    }
  }
  for (Index j = n; j < n + m; ++j) allowed[j] = false;

  // Phase II on cost -c.
  tab.t.row(m).setZero();
  for (Index j = 0; j < n; ++j) tab.t(m, j) = -c(j);
  for (Index i = 0; i < m; ++i) {
    if (redundant[i]) continue;
    const Index bj = tab.basis[i];
    if (bj < n) tab.t.row(m) -= (-c(bj)) * tab.t.row(i);
  }
  if (!tab.run(allowed, tol)) {
    out.status = Status::unbounded;
    return out;
  }
  out.status = Status::optimal;
  out.x = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) {
    if (!redundant[i] && tab.basis[i] < n) out.x(tab.basis[i]) = tab.t(i, n + m);
  }
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace tmvn::lp
