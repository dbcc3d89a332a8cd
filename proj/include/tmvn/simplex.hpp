#pragma once

#include "tmvn/matrix_core.hpp"

namespace tmvn::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  Vector x;
};

/// maximize c'x subject to A x = b, x >= 0. Dense two-phase simplex with
/// Bland's rule; intended for the handful of variables the classifier needs.
Result maximize(const Matrix& a, const Vector& b, const Vector& c, double tol = 1e-10);

}  // namespace tmvn::lp
