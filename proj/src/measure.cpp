#include "dirtrace/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "dirtrace/rng.hpp"

namespace dirtrace {

double BoundaryMeasure::atom_mass() const {
  StableSum s;
  for (const Atom& a : atoms) s.add(a.weight);
  return s.value();
}

double BoundaryMeasure::piece_mass() const {
  StableSum s;
  for (const DensityPiece& p : pieces) s.add(p.mass);
  return s.value();
}

// ---------------------------------------------------------------------------
// Hyperplane sweep (d == 2).  The sweep coordinate y runs along the frame
// axis; cells are y-intervals on which the fiber has a fixed interval count
// and, away from the analytic cusp, affine endpoints.

namespace {

struct AffinePiece {
  double lo0, lo1, hi0, hi1;  // lo(y) = lo0 + lo1*(y - ya), same for hi
};

struct SweepCell {
  double ya, yb;
  bool affine;
  std::vector<AffinePiece> pieces;  // empty when !affine
  int count;                        // piece count (affine or not)
};

struct Sweep {
  Eigen::VectorXd axis;  // hyperplane frame column
  std::vector<SweepCell> cells;
};

struct WallSeg {
  Eigen::Vector2d a, b;
};

// If two wall segments cross, hand the crossing point to push(). Where e.g. a
// column wall cuts through the top edge of an overlapping base box, the
// union's fiber endpoints change slope without any corner nearby; missing
// such a point leaves a kink inside a sweep cell and the affine fit silently
// extrapolates across it.
void seg_crossing(const WallSeg& s, const WallSeg& t,
                  const std::function<void(double, double)>& push) {
  if (std::max(s.a.x(), s.b.x()) < std::min(t.a.x(), t.b.x()) ||
      std::max(t.a.x(), t.b.x()) < std::min(s.a.x(), s.b.x()) ||
      std::max(s.a.y(), s.b.y()) < std::min(t.a.y(), t.b.y()) ||
      std::max(t.a.y(), t.b.y()) < std::min(s.a.y(), s.b.y()))
    return;
  const Eigen::Vector2d d1 = s.b - s.a, d2 = t.b - t.a;
  const double den = d1.x() * d2.y() - d1.y() * d2.x();
  if (std::abs(den) <= 1e-14 * d1.norm() * d2.norm()) return;  // parallel
  const double slack = 1e-12;
  const Eigen::Vector2d r = t.a - s.a;
  const double u = (r.x() * d2.y() - r.y() * d2.x()) / den;
  const double v = (r.x() * d1.y() - r.y() * d1.x()) / den;
  if (u < -slack || u > 1.0 + slack || v < -slack || v > 1.0 + slack) return;
  const Eigen::Vector2d p = s.a + u * d1;
  push(p.x(), p.y());
}

void push_self_crossings(const std::vector<WallSeg>& segs,
                         const std::function<void(double, double)>& push) {
  for (std::size_t i = 0; i + 1 < segs.size(); ++i)
    for (std::size_t j = i + 1; j < segs.size(); ++j)
      seg_crossing(segs[i], segs[j], push);
}

void push_cross_crossings(const std::vector<WallSeg>& a,
                          const std::vector<WallSeg>& b,
                          const std::function<void(double, double)>& push) {
  for (const WallSeg& s : a)
    for (const WallSeg& t : b) seg_crossing(s, t, push);
}

void box_walls(const AxisBox& b, std::vector<WallSeg>& out) {
  const Eigen::Vector2d p00(b.lo[0], b.lo[1]), p10(b.hi[0], b.lo[1]);
  const Eigen::Vector2d p01(b.lo[0], b.hi[1]), p11(b.hi[0], b.hi[1]);
  out.push_back({p00, p10});
  out.push_back({p01, p11});
  out.push_back({p00, p01});
  out.push_back({p10, p11});
}

std::vector<double> feature_ys(const DomainModel& dom, const Direction& th,
                               const Eigen::VectorXd& axis) {
  std::vector<double> ys;
  auto push = [&](double px, double py) { ys.push_back(axis[0] * px + axis[1] * py); };
  switch (dom.kind()) {
    case DomainKind::RectilinearUnion: {
      for (const AxisBox& b : dom.boxes()) {
        push(b.lo[0], b.lo[1]);
        push(b.hi[0], b.lo[1]);
        push(b.lo[0], b.hi[1]);
        push(b.hi[0], b.hi[1]);
      }
      for (const AxisBox& h : dom.holes()) {
        push(h.lo[0], h.lo[1]);
        push(h.hi[0], h.lo[1]);
        push(h.lo[0], h.hi[1]);
        push(h.hi[0], h.hi[1]);
      }
      std::vector<WallSeg> walls;
      walls.reserve(4 * (dom.boxes().size() + dom.holes().size()));
      for (const AxisBox& b : dom.boxes()) box_walls(b, walls);
      for (const AxisBox& h : dom.holes()) box_walls(h, walls);
      std::vector<WallSeg> cuts;
      cuts.reserve(dom.slits().size());
      for (const Slit& s : dom.slits()) cuts.push_back({s.a, s.b});
      push_self_crossings(walls, push);
      push_cross_crossings(walls, cuts, push);
      if (cuts.size() <= 256) push_self_crossings(cuts, push);
      break;
    }
    case DomainKind::Polygon: {
      for (const auto& v : dom.loop()) push(v.x(), v.y());
      // a simple loop's edges meet only at vertices (already pushed), but
      // slits may cross them, or each other
      if (!dom.slits().empty()) {
        std::vector<WallSeg> edges;
        edges.reserve(dom.loop().size());
        const auto& lp = dom.loop();
        for (std::size_t i = 0; i < lp.size(); ++i)
          edges.push_back({lp[i], lp[(i + 1) % lp.size()]});
        std::vector<WallSeg> cuts;
        cuts.reserve(dom.slits().size());
        for (const Slit& s : dom.slits()) cuts.push_back({s.a, s.b});
        push_cross_crossings(edges, cuts, push);
        if (cuts.size() <= 256) push_self_crossings(cuts, push);
      }
      break;
    }
    case DomainKind::CuspAnalytic: {
      push(0.0, 0.0);
      push(-1.0, 1.0);
      push(1.0, 1.0);
      // fiber tangent to the bounding curves x1 = +-x2^3
      if (th[1] != 0.0) {
        const double r_right = th[0] / (3.0 * th[1]);
        if (r_right > 0.0) {
          const double t = std::sqrt(r_right);
          if (t < 1.0) push(t * t * t, t);
        }
        const double r_left = -th[0] / (3.0 * th[1]);
        if (r_left > 0.0) {
          const double t = std::sqrt(r_left);
          if (t < 1.0) push(-t * t * t, t);
        }
      }
      break;
    }
    default:
      break;
  }
  for (const Slit& s : dom.slits()) {
    push(s.a.x(), s.a.y());
    push(s.b.x(), s.b.y());
  }
  std::sort(ys.begin(), ys.end());
  const double tol = 1e-14 * (1.0 + dom.diameter());
  std::vector<double> out;
  for (double y : ys)
    if (out.empty() || y - out.back() > tol) out.push_back(y);
  return out;
}

class SweepBuilder {
 public:
  SweepBuilder(const DomainModel& dom, const Direction& th)
      : dom_(dom), th_(th), scale_(1.0 + dom.diameter()) {
    if (dom.dim() != 2)
      throw UnsupportedKind("hyperplane sweep is for 2-d domains");
    sw_.axis = hyperplane_frame(th).col(0);
  }

  Sweep build() {
    const std::vector<double> ys = feature_ys(dom_, th_, sw_.axis);
    if (ys.size() < 2)
      throw DegenerateDomain("sweep found fewer than two feature lines");
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) cell(ys[i], ys[i + 1], 0);
    return std::move(sw_);
  }

 private:
  std::vector<Interval> fiber_at(double y) const {
    Eigen::VectorXd yv(1);
    yv[0] = y;
    return fiber(dom_, th_, yv).intervals;
  }

  void cell(double ya, double yb, int depth) {
    const double w = yb - ya;
    if (w <= 1e-13 * scale_) return;  // sliver: mass below the rounding floor
    const double q1 = ya + 0.25 * w, ym = ya + 0.5 * w, q3 = ya + 0.75 * w;
    const auto f1 = fiber_at(q1);
    const auto f3 = fiber_at(q3);
    const auto fm = fiber_at(ym);
    const std::size_t n = f1.size();
    if (f3.size() != n || fm.size() != n) {
      split(ya, yb, ym, depth);
      return;
    }
    if (n == 0) return;
    SweepCell c{ya, yb, dom_.kind() != DomainKind::CuspAnalytic, {},
                static_cast<int>(n)};
    if (c.affine) {
      const double half = 0.5 * w;
      for (std::size_t j = 0; j < n; ++j) {
        AffinePiece p;
        p.lo1 = (f3[j].lo - f1[j].lo) / half;
        p.lo0 = f1[j].lo - 0.25 * w * p.lo1;
        p.hi1 = (f3[j].hi - f1[j].hi) / half;
        p.hi0 = f1[j].hi - 0.25 * w * p.hi1;
        const double lo_mid = p.lo0 + p.lo1 * 0.5 * w;
        const double hi_mid = p.hi0 + p.hi1 * 0.5 * w;
        if (std::abs(lo_mid - fm[j].lo) > 1e-9 * scale_ ||
            std::abs(hi_mid - fm[j].hi) > 1e-9 * scale_) {
          split(ya, yb, ym, depth);
          return;
        }
        c.pieces.push_back(p);
      }
    }
    sw_.cells.push_back(std::move(c));
  }

  void split(double ya, double yb, double ym, int depth) {
    if (depth >= 48)
      throw RayUnresolved("sweep cell near y=" + std::to_string(ym) +
                          " did not stabilize; missing feature line?");
    cell(ya, ym, depth + 1);
    cell(ym, yb, depth + 1);
  }

  const DomainModel& dom_;
  const Direction& th_;
  double scale_;
  Sweep sw_;
};

}  // namespace

// ---------------------------------------------------------------------------
// mu_exact

BoundaryMeasure mu_exact(const DomainModel& dom, const Direction& theta) {
  if (dom.kind() == DomainKind::Oracle)
    throw UnsupportedKind("exact boundary measures need a structured domain; "
                          "use mu_monte_carlo for oracles");
  BoundaryMeasure mu(theta);
  mu.domain_id = dom.id;
  mu.mode = MeasureMode::Exact;

  if (dom.dim() == 1) {
    const double sgn = theta[0];
    StableSum total;
    for (std::size_t i = 0; i < dom.intervals().size(); ++i) {
      const Interval& iv = dom.intervals()[i];
      Atom a;
      a.z = Point(1);
      a.z[0] = sgn > 0.0 ? iv.hi : iv.lo;
      a.weight = iv.length();
      a.chord = iv.length();
      a.provenance = "interval#" + std::to_string(i);
      total.add(a.weight);
      mu.atoms.push_back(std::move(a));
    }
    mu.total_mass = total.value();
    return mu;
  }

  Sweep sw = SweepBuilder(dom, theta).build();
  const Eigen::VectorXd axis = sw.axis;
  const Eigen::Vector2d thv(theta[0], theta[1]);
  auto dsh = std::make_shared<DomainModel>(dom);
  StableSum total;

  for (const SweepCell& c : sw.cells) {
    const double ya = c.ya, yb = c.yb, width = yb - ya;
    for (int j = 0; j < c.count; ++j) {
      DensityPiece P;
      P.t0 = ya;
      P.t1 = yb;
      char buf[64];
      std::snprintf(buf, sizeof buf, "y[%.6g..%.6g]#%d", ya, yb, j);
      P.edge_id = buf;
      if (c.affine) {
        const AffinePiece ap = c.pieces[static_cast<std::size_t>(j)];
        P.z = [axis, thv, ap, ya](double y) {
          const double hi = ap.hi0 + ap.hi1 * (y - ya);
          Point p(2);
          p[0] = axis[0] * y + hi * thv.x();
          p[1] = axis[1] * y + hi * thv.y();
          return p;
        };
        auto len = [ap, ya](double y) {
          return (ap.hi0 - ap.lo0) + (ap.hi1 - ap.lo1) * (y - ya);
        };
        P.w = len;
        P.chord = len;
        const double wa = len(ya), wb = len(yb);
        P.mass = 0.5 * (wa + wb) * width;  // exact: the density is affine
        const double wmax = std::max(wa, wb);
        P.graded = wmax > 0.0 && std::min(wa, wb) < 1e-9 * wmax;
      } else {
        const Direction th = theta;
        auto iv_at = [dsh, th, j](double y) -> Interval {
          Eigen::VectorXd yv(1);
          yv[0] = y;
          const auto ivs = fiber(*dsh, th, yv).intervals;
          if (j < static_cast<int>(ivs.size()))
            return ivs[static_cast<std::size_t>(j)];
          return Interval{0.0, 0.0};
        };
        P.z = [axis, thv, iv_at](double y) {
          const double hi = iv_at(y).hi;
          Point p(2);
          p[0] = axis[0] * y + hi * thv.x();
          p[1] = axis[1] * y + hi * thv.y();
          return p;
        };
        P.w = [iv_at](double y) { return iv_at(y).length(); };
        P.chord = P.w;
        P.mass = integrate_adaptive(P.w, ya, yb,
                                    1e-13 * (1.0 + width) * (1.0 + dom.diameter()))
                     .value;
        P.graded = true;
      }
      if (P.mass <= 0.0 && c.affine) continue;  // degenerate sliver
      total.add(P.mass);
      mu.pieces.push_back(std::move(P));
    }
  }
  mu.total_mass = total.value();
  return mu;
}

// ---------------------------------------------------------------------------
// Monte Carlo

BoundaryMeasure mu_monte_carlo(const DomainModel& dom, const Direction& theta,
                               long n, std::uint64_t seed) {
  if (n <= 0) throw BadParameter("mu_monte_carlo needs n > 0");
  BoundaryMeasure mu(theta);
  mu.domain_id = dom.id;
  mu.mode = MeasureMode::MonteCarlo;
  mu.seed = seed;
  mu.n_samples = n;
  const AxisBox& bb = dom.bounding_box();
  const double vol = bb.volume();
  const double w = vol / static_cast<double>(n);
  const CounterRng rng = CounterRng::from_seed(seed, "mu_monte_carlo:" + dom.id);
  long accepted = 0;
  for (long i = 0; i < n; ++i) {
    Point x = rng.point_in_box(static_cast<std::uint64_t>(i), bb.lo, bb.hi);
    if (!dom.contains(x)) continue;
    ExitRecord er = exit_record(dom, x, theta);
    Atom a;
    a.z = std::move(er.z_plus);
    a.weight = w;
    a.chord = er.chord;
    a.provenance = "mc";
    mu.atoms.push_back(std::move(a));
    ++accepted;
  }
  if (accepted == 0)
    throw DegenerateDomain("mu_monte_carlo: no sample landed in the domain");
  const double p = static_cast<double>(accepted) / static_cast<double>(n);
  mu.total_mass = vol * p;
  mu.total_se = vol * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return mu;
}

// ---------------------------------------------------------------------------
// Queries

namespace {

// Parameter runs of a piece on which the region predicate holds; `whole`
// reports the all-true case so callers can keep the exact piece mass.
std::vector<Interval> region_runs(const DensityPiece& p,
                                  const std::function<bool(const Point&)>& region,
                                  bool& whole) {
  whole = false;
  constexpr int kProbes = 256;
  const double width = p.t1 - p.t0;
  if (width <= 0.0) return {};
  const double step = width / kProbes;
  bool flags[kProbes];
  bool all_true = true, all_false = true;
  for (int k = 0; k < kProbes; ++k) {
    flags[k] = region(p.z(p.t0 + (k + 0.5) * step));
    all_true = all_true && flags[k];
    all_false = all_false && !flags[k];
  }
  if (all_true) {
    whole = true;
    return {Interval{p.t0, p.t1}};
  }
  if (all_false) return {};
  std::vector<double> cuts = {p.t0};
  for (int k = 0; k + 1 < kProbes; ++k) {
    if (flags[k] == flags[k + 1]) continue;
    double a = p.t0 + (k + 0.5) * step;
    double b = a + step;
    const bool fa = flags[k];
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      if (region(p.z(m)) == fa) a = m;
      else b = m;
    }
    cuts.push_back(0.5 * (a + b));
  }
  cuts.push_back(p.t1);
  std::vector<Interval> runs;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] <= cuts[k]) continue;
    if (region(p.z(0.5 * (cuts[k] + cuts[k + 1]))))
      runs.push_back({cuts[k], cuts[k + 1]});
  }
  return runs;
}

}  // namespace

double measure_of(const BoundaryMeasure& mu,
                  const std::function<bool(const Point&)>& region) {
  StableSum total;
  for (const Atom& a : mu.atoms)
    if (region(a.z)) total.add(a.weight);
  for (const DensityPiece& p : mu.pieces) {
    bool whole = false;
    const auto runs = region_runs(p, region, whole);
    if (whole) {
      total.add(p.mass);
      continue;
    }
    for (const Interval& r : runs)
      total.add(integrate_adaptive(p.w, r.lo, r.hi,
                                   1e-12 * std::max(1.0, std::abs(p.mass)))
                    .value);
  }
  return total.value();
}

BoundaryMeasure restrict_measure(const BoundaryMeasure& mu,
                                 const std::function<bool(const Point&)>& region) {
  BoundaryMeasure out(mu.theta);
  out.domain_id = mu.domain_id;
  out.mode = mu.mode;
  out.seed = mu.seed;
  out.n_samples = mu.n_samples;
  StableSum total;
  for (const Atom& a : mu.atoms)
    if (region(a.z)) {
      out.atoms.push_back(a);
      total.add(a.weight);
    }
  for (const DensityPiece& p : mu.pieces) {
    bool whole = false;
    const auto runs = region_runs(p, region, whole);
    if (whole) {
      out.pieces.push_back(p);
      total.add(p.mass);
      continue;
    }
    for (const Interval& r : runs) {
      DensityPiece q = p;
      q.t0 = r.lo;
      q.t1 = r.hi;
      q.mass = integrate_adaptive(q.w, q.t0, q.t1,
                                  1e-12 * std::max(1.0, std::abs(p.mass)))
                   .value;
      out.pieces.push_back(std::move(q));
      total.add(out.pieces.back().mass);
    }
  }
  out.total_mass = total.value();
  return out;
}

QuadResult integrate_boundary(const BoundaryMeasure& mu,
                              const std::function<double(const Point&)>& f,
                              double abs_tol) {
  QuadResult res;
  StableSum value, error;
  for (const Atom& a : mu.atoms) {
    const double fv = f(a.z);
    if (!std::isfinite(fv))
      throw NonFiniteIntegrand("integrand not finite at atom " + format_point(a.z));
    value.add(fv * a.weight);
    res.evals += 1;
  }
  const double total = std::max(std::abs(mu.total_mass), 1e-300);
  for (const DensityPiece& p : mu.pieces) {
    auto g = [&](double t) { return f(p.z(t)) * p.w(t); };
    const double share = std::max(std::abs(p.mass) / total, 1e-6);
    const double tol = abs_tol * share;
    QuadResult q;
    if (p.graded) q = integrate_graded(g, p.t0, p.t1, tol);
    else q = integrate_adaptive(g, p.t0, p.t1, tol);
    value.add(q.value);
    error.add(q.error);
    res.evals += q.evals;
    res.converged = res.converged && q.converged;
  }
  res.value = value.value();
  res.error = error.value();
  return res;
}

BoundaryMeasure divide_by_chord(const BoundaryMeasure& mu) {
  BoundaryMeasure out(mu.theta);
  out.domain_id = mu.domain_id;
  out.mode = mu.mode;
  out.seed = mu.seed;
  out.n_samples = mu.n_samples;
  StableSum total;
  for (const Atom& a : mu.atoms) {
    if (!(a.chord > 0.0))
      throw ZeroChord("divide_by_chord: atom at " + format_point(a.z) +
                      " has no positive chord");
    Atom b = a;
    b.weight = a.weight / a.chord;
    total.add(b.weight);
    out.atoms.push_back(std::move(b));
  }
  for (const DensityPiece& p : mu.pieces) {
    DensityPiece q = p;
    auto w = p.w;
    auto c = p.chord;
    q.w = [w, c](double t) { return w(t) / c(t); };
    q.mass = integrate_adaptive(q.w, q.t0, q.t1,
                                1e-12 * std::max(1.0, q.t1 - q.t0))
                 .value;
    total.add(q.mass);
    out.pieces.push_back(std::move(q));
  }
  out.total_mass = total.value();
  return out;
}

// ---------------------------------------------------------------------------
// Volume integrals by the same sweep

QuadResult integrate_volume(const DomainModel& dom, const Direction& theta,
                            const std::function<double(const Point&)>& F,
                            const VolumeOptions& opts) {
  if (dom.kind() == DomainKind::Oracle)
    throw UnsupportedKind("integrate_volume needs a structured domain");
  QuadResult res;
  StableSum value, error;

  if (dom.dim() == 1) {
    for (const Interval& iv : dom.intervals()) {
      auto g = [&](double x) {
        Point p(1);
        p[0] = x;
        return F(p);
      };
      QuadResult q = integrate_graded(g, iv.lo, iv.hi,
                                      opts.abs_tol / static_cast<double>(dom.intervals().size()),
                                      opts.max_levels);
      value.add(q.value);
      error.add(q.error);
      res.evals += q.evals;
      res.converged = res.converged && q.converged;
    }
    res.value = value.value();
    res.error = error.value();
    return res;
  }

  Sweep sw = SweepBuilder(dom, theta).build();
  const Eigen::VectorXd axis = sw.axis;
  const Eigen::Vector2d thv(theta[0], theta[1]);
  double total_width = 0.0;
  for (const SweepCell& c : sw.cells) total_width += c.yb - c.ya;
  if (total_width <= 0.0) return res;

  for (const SweepCell& c : sw.cells) {
    const double width = c.yb - c.ya;
    const double cell_tol = opts.abs_tol * width / total_width;
    const double inner_tol = cell_tol / std::max(width, 1e-12) * 0.25;
    auto inner = [&](double y) {
      StableSum s;
      auto line = [&](double t) {
        Point p(2);
        p[0] = axis[0] * y + t * thv.x();
        p[1] = axis[1] * y + t * thv.y();
        return F(p);
      };
      if (c.affine) {
        for (const AffinePiece& ap : c.pieces) {
          const double lo = ap.lo0 + ap.lo1 * (y - c.ya);
          const double hi = ap.hi0 + ap.hi1 * (y - c.ya);
          if (hi > lo)
            s.add(integrate_graded(line, lo, hi, inner_tol, 14).value);
        }
      } else {
        Eigen::VectorXd yv(1);
        yv[0] = y;
        for (const Interval& iv : fiber(dom, theta, yv).intervals)
          if (iv.hi > iv.lo)
            s.add(integrate_graded(line, iv.lo, iv.hi, inner_tol, 14).value);
      }
      return s.value();
    };
    QuadResult q = integrate_graded(inner, c.ya, c.yb, cell_tol, opts.max_levels);
    value.add(q.value);
    error.add(q.error);
    res.evals += q.evals;
    res.converged = res.converged && q.converged;
  }
  res.value = value.value();
  res.error = error.value();
  return res;
}

// ---------------------------------------------------------------------------
// Independent area oracle

double domain_area(const DomainModel& dom) {
  switch (dom.kind()) {
    case DomainKind::IntervalUnion: {
      StableSum s;
      for (const Interval& iv : dom.intervals()) s.add(iv.length());
      return s.value();
    }
    case DomainKind::RectilinearUnion: {
      const auto& boxes = dom.boxes();
      const auto& holes = dom.holes();
      const int d = dom.dim();
      auto overlap = [d](const AxisBox& a, const AxisBox& b) {
        for (int k = 0; k < d; ++k)
          if (a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) return false;
        return true;
      };
      for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j)
          if (overlap(boxes[i], boxes[j]))
            throw UnsupportedKind("area oracle needs pairwise disjoint boxes");
      for (std::size_t i = 0; i < holes.size(); ++i)
        for (std::size_t j = i + 1; j < holes.size(); ++j)
          if (overlap(holes[i], holes[j]))
            throw UnsupportedKind("area oracle needs pairwise disjoint holes");
      for (const AxisBox& h : holes) {
        bool nested = false;
        for (const AxisBox& b : boxes) {
          bool in = true;
          for (int k = 0; k < d; ++k)
            if (h.lo[k] < b.lo[k] || h.hi[k] > b.hi[k]) {
              in = false;
              break;
            }
          if (in) {
            nested = true;
            break;
          }
        }
        if (!nested)
          throw UnsupportedKind("area oracle needs holes nested in a single box");
      }
      StableSum s;
      for (const AxisBox& b : boxes) s.add(b.volume());
      for (const AxisBox& h : holes) s.add(-h.volume());
      return s.value();
    }
    case DomainKind::Polygon: {
      const auto& loop = dom.loop();
      StableSum s;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto& p = loop[i];
        const auto& q = loop[(i + 1) % loop.size()];
        s.add(0.5 * (p.x() * q.y() - q.x() * p.y()));
      }
      return std::abs(s.value());
    }
    case DomainKind::CuspAnalytic:
      return 0.5;  // two cubic lobes: 2 * integral_0^1 t^3 dt
    case DomainKind::Oracle:
      throw UnsupportedKind("no independent area oracle for membership-only domains");
  }
  return 0.0;
}

}  // namespace dirtrace
