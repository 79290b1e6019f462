#pragma once

#include <functional>
#include <utility>

#include "dirtrace/field.hpp"
#include "dirtrace/geometry.hpp"

namespace dirtrace {

struct TraceOptions {
  double abs_tol = 1e-9;  // scaled by 1 + |value| during refinement
  int max_levels = 20;
  int start_levels = 3;
};

// Endpoint values recovered from averaged integrals over ]alpha,beta[.
struct Trace1dResult {
  double at_beta = 0.0;
  double at_alpha = 0.0;
  double error = 0.0;
  long evals = 0;
  bool converged = true;
};

// Both endpoint traces of an absolutely continuous f from one pass over the
// interval, using f and its derivative.
Trace1dResult trace_1d(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double alpha,
                       double beta, const TraceOptions& opts = {});

// A chord of the domain through a known interior anchor.
struct AnchoredChord {
  Point x;  // interior anchor
  double delta_plus = 0.0, delta_minus = 0.0;
  Point z_plus, z_minus;
  double chord = 0.0;
};

// Recover an interior anchor for a boundary point z reached along theta, i.e.
// an x with exit x -> z.  Throws AnchorFailure when no backward step works.
AnchoredChord anchor_chord(const DomainModel& dom, const Point& z,
                           const Direction& theta);

// Fused traces of u at both ends of an anchored chord; at_beta is the value
// at z_plus (direction theta), at_alpha the value at z_minus.
Trace1dResult trace_on_chord(const AnchoredChord& ch, const ScalarField& u,
                             const Direction& theta,
                             const TraceOptions& opts = {});

struct TraceSample {
  Point z;               // forward exit
  Point partner;         // backward exit
  double value = 0.0;          // directional trace at z
  double partner_value = 0.0;  // opposite-direction trace at partner
  double chord = 0.0;
  double error = 0.0;
};

// Trace of u at the exit reached from the interior point x along theta.
TraceSample trace_at(const DomainModel& dom, const ScalarField& u,
                     const Point& x, const Direction& theta,
                     const TraceOptions& opts = {});

// gamma_theta u as a function on the directional boundary (anchors each z).
std::function<double(const Point&)> trace_function(const DomainModel& dom,
                                                   const ScalarField& u,
                                                   const Direction& theta,
                                                   const TraceOptions& opts = {});

// The pair (1/2)(a + b + (a-b)/ell), (1/2)(a + b - (a-b)/ell); their role:
// Gp(u)Gp(v) - Gm(u)Gm(v) == (a a' - b b')/ell for any two fields.
std::pair<double, double> g_plus_minus(double a, double b, double ell);

}  // namespace dirtrace
