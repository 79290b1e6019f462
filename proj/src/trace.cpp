#include "dirtrace/trace.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "dirtrace/quadrature.hpp"

namespace dirtrace {

// ---------------------------------------------------------------------------
// trace_1d: with A = int f, B = int Df, C = int Df*t over ]alpha,beta[ the
// endpoint values are (A + C - alpha*B)/(beta-alpha) and
// (A + C - beta*B)/(beta-alpha).  One dyadically graded pass computes all
// three moments from shared evaluations.

namespace {

struct Moments {
  double A = 0.0, B = 0.0, C = 0.0;
  long evals = 0;
};

struct MomentTriple {
  double A = 0.0, B = 0.0, C = 0.0;
};

constexpr int kMomentDepth = 36;

MomentTriple panel_moments(const std::function<double(double)>& f,
                           const std::function<double(double)>& df, double lo,
                           double hi, long& evals) {
  const QuadRule& rule = gauss_legendre(16);
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  MomentTriple m;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = c + r * rule.nodes[i];
    const double w = r * rule.weights[i];
    const double fv = f(t);
    const double dv = df(t);
    if (!std::isfinite(fv) || !std::isfinite(dv))
      throw NonFiniteIntegrand("trace integrand not finite at t=" +
                               std::to_string(t));
    m.A += w * fv;
    m.B += w * dv;
    m.C += w * dv * t;
    evals += 2;
  }
  return m;
}

// Bisect a panel until its split test settles.  The dyadic grading handles
// the chord endpoints, but its interior panels are identical from one level
// to the next, so a kink or derivative jump strictly inside one of them
// would otherwise bias every level equally and slip past the level-to-level
// comparison in trace_1d.  The split tolerance stays constant with depth
// (error-per-subinterval): on a jump the panel defect shrinks at the same
// rate a halving tolerance would, and the recursion would only stop at the
// depth cap.
void refine_moments(const std::function<double(double)>& f,
                    const std::function<double(double)>& df, double lo,
                    double hi, const MomentTriple& whole, double tol,
                    int depth, StableSum& A, StableSum& B, StableSum& C,
                    long& evals, bool& settled) {
  const double mid = 0.5 * (lo + hi);
  if (!(lo < mid && mid < hi)) {
    A.add(whole.A);
    B.add(whole.B);
    C.add(whole.C);
    return;
  }
  const MomentTriple l = panel_moments(f, df, lo, mid, evals);
  const MomentTriple r = panel_moments(f, df, mid, hi, evals);
  const double delta = std::abs(l.A + r.A - whole.A) +
                       std::abs(l.B + r.B - whole.B) +
                       std::abs(l.C + r.C - whole.C);
  if (delta <= tol || depth >= kMomentDepth) {
    if (delta > tol) settled = false;
    A.add(l.A + r.A);
    B.add(l.B + r.B);
    C.add(l.C + r.C);
    return;
  }
  refine_moments(f, df, lo, mid, l, tol, depth + 1, A, B, C, evals, settled);
  refine_moments(f, df, mid, hi, r, tol, depth + 1, A, B, C, evals, settled);
}

MomentTriple refined_panel(const std::function<double(double)>& f,
                           const std::function<double(double)>& df, double lo,
                           double hi, double tol, long& evals, bool& settled) {
  const MomentTriple whole = panel_moments(f, df, lo, hi, evals);
  StableSum A, B, C;
  refine_moments(f, df, lo, hi, whole, tol, 0, A, B, C, evals, settled);
  return {A.value(), B.value(), C.value()};
}

// Memo of refined panel moments, keyed by the exact panel edges.  Successive
// grading levels share all but the panels nearest the endpoints, so the
// level loop in trace_1d only ever pays for the few panels it adds.
struct PanelMemo {
  std::map<std::pair<double, double>, MomentTriple> done;
  long evals = 0;
  bool settled = true;  // false once any panel hits the depth cap short of tol
};

Moments graded_moments(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double a,
                       double b, int levels, double panel_tol,
                       PanelMemo& memo) {
  const double h = b - a;
  StableSum A, B, C;

  auto panel = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    auto it = memo.done.find({lo, hi});
    if (it == memo.done.end())
      it = memo.done
               .emplace(std::make_pair(lo, hi),
                        refined_panel(f, df, lo, hi, panel_tol, memo.evals,
                                      memo.settled))
               .first;
    A.add(it->second.A);
    B.add(it->second.B);
    C.add(it->second.C);
  };

  double prev = a;
  for (int k = levels; k >= 1; --k) {
    const double edge = a + h * std::ldexp(1.0, -k);
    panel(prev, edge);
    prev = edge;
  }
  for (int k = 2; k <= levels; ++k) {
    const double edge = b - h * std::ldexp(1.0, -k);
    panel(prev, edge);
    prev = edge;
  }
  panel(prev, b);
  return {A.value(), B.value(), C.value(), memo.evals};
}

}  // namespace

Trace1dResult trace_1d(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double alpha,
                       double beta, const TraceOptions& opts) {
  if (!(beta > alpha))
    throw ZeroChord("trace_1d needs a positive-length interval");
  const double len = beta - alpha;
  // Endpoint values amplify moment errors by ~(1+|alpha|+|beta|)/len, so the
  // per-panel split tolerance is scaled down accordingly.
  const double span = 1.0 + std::abs(alpha) + std::abs(beta);
  const double panel_tol = 0.25 * opts.abs_tol * len / span;
  Trace1dResult res;
  PanelMemo memo;
  double prev_b = 0.0, prev_a = 0.0;
  double last_diff = std::numeric_limits<double>::infinity();
  bool have_prev = false;
  res.converged = false;
  for (int L = opts.start_levels; L <= opts.max_levels; ++L) {
    const Moments m = graded_moments(f, df, alpha, beta, L, panel_tol, memo);
    res.evals = m.evals;
    const double at_b = (m.A + m.C - alpha * m.B) / len;
    const double at_a = (m.A + m.C - beta * m.B) / len;
    res.at_beta = at_b;
    res.at_alpha = at_a;
    if (have_prev) {
      last_diff = std::abs(at_b - prev_b) + std::abs(at_a - prev_a);
      const double gate =
          opts.abs_tol * (1.0 + std::abs(at_b) + std::abs(at_a));
      if (last_diff <= gate) {
        res.error = last_diff;
        res.converged = memo.settled;
        return res;
      }
    }
    prev_b = at_b;
    prev_a = at_a;
    have_prev = true;
  }
  res.error = last_diff;  // best effort: last refinement difference
  return res;
}

// ---------------------------------------------------------------------------
// Anchoring

AnchoredChord anchor_chord(const DomainModel& dom, const Point& z,
                           const Direction& theta) {
  const double diam = dom.diameter();
  const double match_tol = 1e-9 * (1.0 + diam);
  double t0 = 1e-3 * diam;
  for (int attempt = 0; attempt < 40; ++attempt, t0 *= 0.5) {
    const Point x = z - t0 * theta.vector();
    if (!dom.contains(x)) continue;
    ExitRecord er;
    try {
      er = exit_record(dom, x, theta);
    } catch (const Error&) {
      continue;
    }
    if ((er.z_plus - z).norm() > match_tol) continue;
    AnchoredChord ch;
    ch.x = x;
    ch.delta_plus = er.delta_plus;
    ch.delta_minus = er.delta_minus;
    ch.z_plus = er.z_plus;
    ch.z_minus = er.z_minus;
    ch.chord = er.chord;
    return ch;
  }
  throw AnchorFailure("no interior anchor found behind " + format_point(z) +
                      " along " + format_point(theta.vector()));
}

Trace1dResult trace_on_chord(const AnchoredChord& ch, const ScalarField& u,
                             const Direction& theta, const TraceOptions& opts) {
  if (!(ch.chord > 0.0)) throw ZeroChord("chord with non-positive length");
  const Point x = ch.x;
  const Eigen::VectorXd tv = theta.vector();
  auto f = [&u, &x, &tv](double t) { return u.value(x + t * tv); };
  auto df = [&u, &x, &tv, &theta](double t) {
    return u.du(x + t * tv, theta);
  };
  return trace_1d(f, df, -ch.delta_minus, ch.delta_plus, opts);
}

TraceSample trace_at(const DomainModel& dom, const ScalarField& u,
                     const Point& x, const Direction& theta,
                     const TraceOptions& opts) {
  const ExitRecord er = exit_record(dom, x, theta);
  AnchoredChord ch;
  ch.x = x;
  ch.delta_plus = er.delta_plus;
  ch.delta_minus = er.delta_minus;
  ch.z_plus = er.z_plus;
  ch.z_minus = er.z_minus;
  ch.chord = er.chord;
  const Trace1dResult tr = trace_on_chord(ch, u, theta, opts);
  TraceSample s;
  s.z = er.z_plus;
  s.partner = er.z_minus;
  s.value = tr.at_beta;
  s.partner_value = tr.at_alpha;
  s.chord = er.chord;
  s.error = tr.error;
  return s;
}

std::function<double(const Point&)> trace_function(const DomainModel& dom,
                                                   const ScalarField& u,
                                                   const Direction& theta,
                                                   const TraceOptions& opts) {
  const DomainModel* d = &dom;
  return [d, &u, theta, opts](const Point& z) {
    const AnchoredChord ch = anchor_chord(*d, z, theta);
    return trace_on_chord(ch, u, theta, opts).at_beta;
  };
}

std::pair<double, double> g_plus_minus(double a, double b, double ell) {
  if (!(ell > 0.0)) throw ZeroChord("g_plus_minus needs a positive chord");
  const double s = a + b;
  const double d = (a - b) / ell;
  return {0.5 * (s + d), 0.5 * (s - d)};
}

}  // namespace dirtrace
