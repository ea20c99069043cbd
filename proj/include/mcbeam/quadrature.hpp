#pragma once

#include "mcbeam/types.hpp"

#include <utility>

namespace mcbeam {

namespace detail {

template <class F>
VecC simpson_rec(const F& f, double a, double b, const VecC& fa, const VecC& fm, const VecC& fb,
                 const VecC& whole, double tol, int depth, int force_depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  VecC flm = f(lm);
  VecC frm = f(rm);
  double h = b - a;
  VecC left = (h / 12.0) * (fa + 4.0 * flm + fm);
  VecC right = (h / 12.0) * (fm + 4.0 * frm + fb);
  VecC sum = left + right;
  VecC err = sum - whole;
  // force_depth guards against spurious convergence on integrands whose
  // coarse samples alias (oscillatory phases sampled at symmetry points).
  if (depth <= 0 || (force_depth <= 0 && err.cwiseAbs().maxCoeff() <= 15.0 * tol)) {
    return sum + err / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, force_depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, force_depth - 1);
}

}  // namespace detail

// Adaptive Simpson for vector-valued integrands; absolute tolerance is the
// max-norm over components.
template <class F>
VecC adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48,
                      int force_depth = 8) {
  VecC fa = f(a);
  VecC fm = f(0.5 * (a + b));
  VecC fb = f(b);
  VecC whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, force_depth);
}

}  // namespace mcbeam
