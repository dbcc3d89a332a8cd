#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace tmvn::detail {

struct GkPart {
  double a, b, value, error;
};

// Gauss-Kronrod 7/15 on one interval; error is |K15 - G7|.
template <class F>
GkPart gk15(const F& f, double a, double b) {
  static constexpr double xgk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = wgk[7] * fc;
  double gauss = wg[3] * fc;
  for (int k = 0; k < 7; ++k) {
    const double s = f(c - h * xgk[k]) + f(c + h * xgk[k]);
    kron += wgk[k] * s;
    if (k % 2 == 1) gauss += wg[k / 2] * s;
  }
  return {a, b, kron * h, std::abs(kron - gauss) * h};
}

// Globally adaptive: bisects the interval with the largest error estimate
// until the summed estimate is below abs_tol or max_parts is reached.
template <class F>
double gauss_kronrod(const F& f, double a, double b, double abs_tol, int max_parts = 200) {
  std::vector<GkPart> parts{gk15(f, a, b)};
  auto worse = [](const GkPart& x, const GkPart& y) { return x.error < y.error; };
  double err = parts.front().error;
  while (err > abs_tol && static_cast<int>(parts.size()) < max_parts) {
    std::pop_heap(parts.begin(), parts.end(), worse);
    const GkPart w = parts.back();
    parts.pop_back();
    const double m = 0.5 * (w.a + w.b);
    if (!(m > w.a && m < w.b)) {
      parts.push_back(w);
      std::push_heap(parts.begin(), parts.end(), worse);
      break;
    }
    for (const GkPart& half : {gk15(f, w.a, m), gk15(f, m, w.b)}) {
      parts.push_back(half);
      std::push_heap(parts.begin(), parts.end(), worse);
    }
    err = 0.0;
    for (const GkPart& p : parts) err += p.error;
  }
  double total = 0.0;
  for (const GkPart& p : parts) total += p.value;
  return total;
}

}  // namespace tmvn::detail
