#pragma once

#include "dirtrace/common.hpp"

#include <functional>

namespace dirtrace {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimate, absolute
  long evals = 0;
  bool converged = true;
};

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1], Newton-iterated
// to machine precision and cached per n.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadRule& gauss_legendre(int n);

using Integrand = std::function<double(double)>;

// Single 16-point panel over [a,b].
double gl16_panel(const Integrand& f, double a, double b);

// Adaptive bisection with 16-point panels; error per panel estimated by
// comparing against its two halves. Throws QuadratureNoConverge only if
// requested via `must_converge`; otherwise reports the achieved estimate.
QuadResult integrate_adaptive(const Integrand& f, double a, double b,
                              double abs_tol, int max_depth = 28,
                              bool must_converge = false);

// Composite rule on a mesh graded dyadically toward both endpoints
// (ratio 1/2, `levels` halvings per side). Built for integrands with
// endpoint singularities that are integrable but not smooth.
double gl16_graded(const Integrand& f, double a, double b, int levels);

// Refine gl16_graded until successive levels differ by <= abs_tol
// (Richardson-style difference estimate). Throws QuadratureNoConverge if the
// estimate still exceeds the tolerance at max_levels.
QuadResult integrate_graded(const Integrand& f, double a, double b,
                            double abs_tol, int max_levels = 20,
                            int start_levels = 2);

}  // namespace dirtrace
