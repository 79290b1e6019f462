#include "dirtrace/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dirtrace {

namespace {
constexpr double kBoundaryTolFactor = 1e-13;  // membership rejects points this close to a wall
}

// ---------------------------------------------------------------------------
// Direction

Direction::Direction(Point v) : v_(std::move(v)) {
  if (v_.size() == 0) throw BadParameter("direction must have dimension >= 1");
  double n = v_.norm();
  if (!std::isfinite(n) || n == 0.0)
    throw BadParameter("direction must be a nonzero finite vector");
  if (std::abs(n - 1.0) > 1e-14) v_ /= n;
}

Direction Direction::angle_deg(double degrees) {
  double rad = degrees * M_PI / 180.0;
  Point v(2);
  v << std::cos(rad), std::sin(rad);
  // Snap near-axis components so "90deg" means exactly (0,1).
  for (int k = 0; k < 2; ++k) {
    if (std::abs(v[k]) < 1e-15) v[k] = 0.0;
    if (std::abs(v[k] - 1.0) < 1e-15) v[k] = 1.0;
    if (std::abs(v[k] + 1.0) < 1e-15) v[k] = -1.0;
  }
  return Direction(v);
}

Direction Direction::axis(int dim, int k, double sign) {
  Point v = Point::Zero(dim);
  v[k] = sign >= 0 ? 1.0 : -1.0;
  return Direction(v);
}

Direction Direction::negated() const {
  Direction d(*this);
  d.v_ = -d.v_;  // exact sign flip
  return d;
}

Eigen::MatrixXd hyperplane_frame(const Direction& theta) {
  const int d = theta.dim();
  Eigen::MatrixXd frame(d, d - 1);
  if (d == 1) return frame;
  // Seed with the canonical vector least aligned with theta (ties -> lowest
  // index), then sweep the rest in index order.
  int seed = 0;
  double best = std::abs(theta[0]);
  for (int k = 1; k < d; ++k)
    if (std::abs(theta[k]) < best) {
      best = std::abs(theta[k]);
      seed = k;
    }
  std::vector<int> order;
  order.push_back(seed);
  for (int k = 0; k < d; ++k)
    if (k != seed) order.push_back(k);

  int cols = 0;
  for (int k : order) {
    if (cols == d - 1) break;
    Point w = Point::Zero(d);
    w[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {  // re-orthogonalize for stability
      w -= theta.dot(w) * theta.vector();
      for (int j = 0; j < cols; ++j) w -= frame.col(j).dot(w) * frame.col(j);
    }
    double n = w.norm();
    if (n < 1e-8) continue;
    frame.col(cols++) = w / n;
  }
  if (cols != d - 1)
    throw Error("hyperplane frame construction failed (should not happen)");
  return frame;
}

Eigen::VectorXd project(const Point& x, const Direction& theta) {
  return hyperplane_frame(theta).transpose() * x;
}

Point embed(const Direction& theta, const Eigen::VectorXd& y, double s) {
  if (theta.dim() == 1) {
    Point p(1);
    p[0] = s * theta[0];
    return p;
  }
  return hyperplane_frame(theta) * y + s * theta.vector();
}

AxisBox make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  AxisBox b;
  b.lo = Point(static_cast<int>(lo.size()));
  b.hi = Point(static_cast<int>(hi.size()));
  int i = 0;
  for (double v : lo) b.lo[i++] = v;
  i = 0;
  for (double v : hi) b.hi[i++] = v;
  return b;
}

std::string kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::IntervalUnion: return "interval_union";
    case DomainKind::RectilinearUnion: return "rectilinear_union";
    case DomainKind::Polygon: return "polygon";
    case DomainKind::CuspAnalytic: return "cusp";
    case DomainKind::Oracle: return "oracle";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// IntervalSet

void IntervalSet::add(Interval iv) {
  if (iv.empty()) return;
  std::vector<Interval> out;
  out.reserve(set_.size() + 1);
  std::size_t i = 0;
  while (i < set_.size() && set_[i].hi <= iv.lo) out.push_back(set_[i++]);
  // positive-length overlap merges; mere touching keeps intervals separate
  while (i < set_.size() && set_[i].lo < iv.hi) {
    iv.lo = std::min(iv.lo, set_[i].lo);
    iv.hi = std::max(iv.hi, set_[i].hi);
    ++i;
  }
  out.push_back(iv);
  while (i < set_.size()) out.push_back(set_[i++]);
  set_ = std::move(out);
}

void IntervalSet::subtract_closed(double lo, double hi) {
  if (lo > hi) return;
  std::vector<Interval> out;
  out.reserve(set_.size() + 1);
  for (const Interval& x : set_) {
    if (hi < x.lo || lo > x.hi) {  // no contact
      out.push_back(x);
      continue;
    }
    Interval left{x.lo, std::min(lo, x.hi)};
    Interval right{std::max(hi, x.lo), x.hi};
    if (!left.empty()) out.push_back(left);
    if (!right.empty()) out.push_back(right);
  }
  set_ = std::move(out);
}

// ---------------------------------------------------------------------------
// DomainModel construction

void DomainModel::index_slits() {
  collinear_.valid = false;
  if (slits_.empty()) return;
  for (int axis = 0; axis < 2; ++axis) {
    double level = slits_[0].a[axis];
    bool all = true;
    for (const Slit& s : slits_)
      if (s.a[axis] != level || s.b[axis] != level) {
        all = false;
        break;
      }
    if (!all) continue;
    collinear_.valid = true;
    collinear_.axis = axis;
    collinear_.level = level;
    collinear_.spans.clear();
    const int other = 1 - axis;
    for (const Slit& s : slits_) {
      double u = s.a[other], v = s.b[other];
      collinear_.spans.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(collinear_.spans.begin(), collinear_.spans.end(),
              [](const Interval& p, const Interval& q) { return p.lo < q.lo; });
    return;
  }
}

DomainModel DomainModel::interval_union(std::vector<Interval> intervals) {
  if (intervals.empty()) throw DegenerateDomain("interval union with no intervals");
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].empty())
      throw DegenerateDomain("empty interval in interval union");
    if (i && intervals[i].lo < intervals[i - 1].hi)
      throw DegenerateDomain("overlapping intervals in interval union");
  }
  DomainModel d;
  d.kind_ = DomainKind::IntervalUnion;
  d.intervals_ = std::move(intervals);
  d.bbox_.lo = Point(1);
  d.bbox_.hi = Point(1);
  d.bbox_.lo[0] = d.intervals_.front().lo;
  d.bbox_.hi[0] = d.intervals_.back().hi;
  d.diameter_ = d.bbox_.hi[0] - d.bbox_.lo[0];
  return d;
}

DomainModel DomainModel::rectilinear(std::vector<AxisBox> boxes,
                                     std::vector<AxisBox> holes,
                                     std::vector<Slit> slits) {
  if (boxes.empty()) throw DegenerateDomain("rectilinear union with no boxes");
  const int dim = boxes.front().dim();
  for (const AxisBox& b : boxes) {
    if (b.dim() != dim) throw DegenerateDomain("mixed dimensions in box list");
    for (int k = 0; k < dim; ++k)
      if (!(b.lo[k] < b.hi[k]))
        throw DegenerateDomain("box with non-positive extent");
  }
  if (!slits.empty() && dim != 2)
    throw DegenerateDomain("slits are only supported in dimension 2");
  DomainModel d;
  d.kind_ = DomainKind::RectilinearUnion;
  d.boxes_ = std::move(boxes);
  d.holes_ = std::move(holes);
  d.slits_ = std::move(slits);
  d.bbox_ = d.boxes_.front();
  for (const AxisBox& b : d.boxes_)
    for (int k = 0; k < dim; ++k) {
      d.bbox_.lo[k] = std::min(d.bbox_.lo[k], b.lo[k]);
      d.bbox_.hi[k] = std::max(d.bbox_.hi[k], b.hi[k]);
    }
  if (dim == 1) {
    d.diameter_ = d.bbox_.hi[0] - d.bbox_.lo[0];
  } else if (dim == 2) {
    // Diameter over the closure of the box union: attained at box corners.
    // Holes take interior points only for every gallery shape, so they are
    // ignored here (an over-estimate would merely loosen inequality gates).
    double best = 0.0;
    std::vector<Eigen::Vector2d> corners;
    for (const AxisBox& b : d.boxes_) {
      corners.emplace_back(b.lo[0], b.lo[1]);
      corners.emplace_back(b.hi[0], b.lo[1]);
      corners.emplace_back(b.lo[0], b.hi[1]);
      corners.emplace_back(b.hi[0], b.hi[1]);
    }
    // Hull corners are the extremes per coordinate direction; brute force on
    // the reduced set of hull candidates (min/max envelope corners per box is
    // already O(n); full pairwise is fine below ~4k boxes, otherwise use the
    // envelope diagonal).
    if (corners.size() <= 8000) {
      for (std::size_t i = 0; i < corners.size(); ++i)
        for (std::size_t j = i + 1; j < corners.size(); ++j)
          best = std::max(best, (corners[i] - corners[j]).norm());
    } else {
      best = d.bbox_.diagonal();
    }
    d.diameter_ = best;
  } else {
    d.diameter_ = d.bbox_.diagonal();
  }
  d.index_slits();
  return d;
}

DomainModel DomainModel::polygon(std::vector<Eigen::Vector2d> loop,
                                 std::vector<Slit> slits) {
  if (loop.size() < 3) throw DegenerateDomain("polygon needs at least 3 vertices");
  double twice_area = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& p = loop[i];
    const auto& q = loop[(i + 1) % loop.size()];
    twice_area += p.x() * q.y() - q.x() * p.y();
  }
  if (std::abs(twice_area) < 1e-300)
    throw DegenerateDomain("polygon with vanishing area");
  if (twice_area < 0.0) std::reverse(loop.begin(), loop.end());
  DomainModel d;
  d.kind_ = DomainKind::Polygon;
  d.loop_ = std::move(loop);
  d.slits_ = std::move(slits);
  Eigen::Vector2d lo = d.loop_.front(), hi = d.loop_.front();
  for (const auto& v : d.loop_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  d.bbox_.lo = Point(2);
  d.bbox_.hi = Point(2);
  d.bbox_.lo << lo.x(), lo.y();
  d.bbox_.hi << hi.x(), hi.y();
  double best = 0.0;
  for (std::size_t i = 0; i < d.loop_.size(); ++i)
    for (std::size_t j = i + 1; j < d.loop_.size(); ++j)
      best = std::max(best, (d.loop_[i] - d.loop_[j]).norm());
  d.diameter_ = best;
  d.index_slits();
  return d;
}

DomainModel DomainModel::cusp() {
  DomainModel d;
  d.kind_ = DomainKind::CuspAnalytic;
  d.bbox_.lo = Point(2);
  d.bbox_.hi = Point(2);
  d.bbox_.lo << -1.0, 0.0;
  d.bbox_.hi << 1.0, 1.0;
  d.diameter_ = 2.0;  // attained between the top corners (-1,1), (1,1)
  return d;
}

DomainModel DomainModel::oracle(std::function<bool(const Point&)> membership,
                                AxisBox bbox, double resolution_hint) {
  if (!membership) throw BadParameter("oracle domain needs a membership predicate");
  for (int k = 0; k < bbox.dim(); ++k)
    if (!(bbox.lo[k] < bbox.hi[k]))
      throw DegenerateDomain("oracle bounding box with non-positive extent");
  DomainModel d;
  d.kind_ = DomainKind::Oracle;
  d.membership_ = std::move(membership);
  d.bbox_ = std::move(bbox);
  d.diameter_ = d.bbox_.diagonal();
  d.resolution_hint_ = resolution_hint;
  return d;
}

double DomainModel::oracle_step() const {
  return resolution_hint_ > 0.0 ? resolution_hint_ : diameter_ / 2048.0;
}

// ---------------------------------------------------------------------------
// Membership

namespace {

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d e = b - a;
  const double len2 = e.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  double t = (p - a).dot(e) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * e)).norm();
}

// Slit rejection uses the same hair-width band as polygon edges: an oblique
// ray crossing a slit rounds to a point *near* the line, never exactly on it,
// and that point must still count as removed.
bool point_on_slit(const DomainModel& dom, const Eigen::Vector2d& p,
                   const std::vector<Slit>& slits) {
  const double tol = kBoundaryTolFactor * dom.diameter();
  for (const Slit& s : slits)
    if (point_segment_distance(p, s.a, s.b) <= tol) return true;
  return false;
}

// True when p lies in the interior of the union of the *closed* boxes: every
// local quadrant direction must be covered by some box that contains p and
// leaves strict room on that side. This catches points on faces shared by
// touching boxes, which belong to the open union although no single open box
// holds them; the open-box test alone would punch measure-zero seams through
// the domain.
bool interior_of_box_union(const std::vector<AxisBox>& boxes, const Point& p) {
  const int d = static_cast<int>(p.size());
  for (int mask = 0; mask < (1 << d); ++mask) {
    bool covered = false;
    for (const AxisBox& b : boxes) {
      if (!b.contains_closed(p)) continue;
      bool ok = true;
      for (int k = 0; k < d && ok; ++k)
        ok = ((mask >> k) & 1) != 0 ? p[k] < b.hi[k] : b.lo[k] < p[k];
      if (ok) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

bool polygon_parity_inside(const std::vector<Eigen::Vector2d>& loop,
                           const Eigen::Vector2d& p) {
  // Crossing parity along the +x ray with the half-open vertex rule.
  bool inside = false;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = loop[i];
    const Eigen::Vector2d& b = loop[(i + 1) % n];
    if ((a.y() < p.y()) != (b.y() < p.y())) {
      const double t = (p.y() - a.y()) / (b.y() - a.y());
      const double xc = a.x() + t * (b.x() - a.x());
      if (xc > p.x()) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

bool DomainModel::contains(const Point& p) const {
  switch (kind_) {
    case DomainKind::IntervalUnion: {
      const double x = p[0];
      auto it = std::upper_bound(
          intervals_.begin(), intervals_.end(), x,
          [](double v, const Interval& iv) { return v < iv.lo; });
      if (it == intervals_.begin()) return false;
      --it;
      return it->contains(x);
    }
    case DomainKind::RectilinearUnion: {
      bool inside = false;
      for (const AxisBox& b : boxes_)
        if (b.contains_open(p)) {
          inside = true;
          break;
        }
      if (!inside) inside = interior_of_box_union(boxes_, p);
      if (!inside) return false;
      for (const AxisBox& h : holes_)
        if (h.contains_closed(p)) return false;
      if (!slits_.empty()) {
        Eigen::Vector2d q(p[0], p[1]);
        const double tol = kBoundaryTolFactor * diameter_;
        if (collinear_.valid) {
          if (std::abs(q[collinear_.axis] - collinear_.level) <= tol) {
            const double u = q[1 - collinear_.axis];
            auto it = std::upper_bound(
                collinear_.spans.begin(), collinear_.spans.end(), u + tol,
                [](double v, const Interval& iv) { return v < iv.lo; });
            if (it != collinear_.spans.begin()) {
              --it;
              if (u >= it->lo - tol && u <= it->hi + tol) return false;
            }
          }
        } else if (point_on_slit(*this, q, slits_)) {
          return false;
        }
      }
      return true;
    }
    case DomainKind::Polygon: {
      Eigen::Vector2d q(p[0], p[1]);
      const double tol = kBoundaryTolFactor * diameter_;
      for (std::size_t i = 0; i < loop_.size(); ++i) {
        const auto& a = loop_[i];
        const auto& b = loop_[(i + 1) % loop_.size()];
        if (point_segment_distance(q, a, b) <= tol) return false;
      }
      if (!polygon_parity_inside(loop_, q)) return false;
      if (collinear_.valid) {
        if (std::abs(q[collinear_.axis] - collinear_.level) <= tol) {
          const double u = q[1 - collinear_.axis];
          auto it = std::upper_bound(
              collinear_.spans.begin(), collinear_.spans.end(), u + tol,
              [](double v, const Interval& iv) { return v < iv.lo; });
          if (it != collinear_.spans.begin()) {
            --it;
            if (u >= it->lo - tol && u <= it->hi + tol) return false;
          }
        }
      } else {
        for (const Slit& s : slits_)
          if (point_segment_distance(q, s.a, s.b) <= tol) return false;
      }
      return true;
    }
    case DomainKind::CuspAnalytic: {
      const double x1 = p[0], x2 = p[1];
      if (!(x2 > 0.0 && x2 < 1.0)) return false;
      const double c = x2 * x2 * x2;
      return -c < x1 && x1 < c;
    }
    case DomainKind::Oracle:
      return membership_(p);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Polynomial roots (for the analytic cusp): degree <= 3, real roots only.

namespace {

double poly_eval(const std::array<double, 4>& c, double s) {
  // c[k] multiplies s^k
  return ((c[3] * s + c[2]) * s + c[1]) * s + c[0];
}

void real_roots(const std::array<double, 4>& c, double scale,
                std::vector<double>& out) {
  const double mag = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]),
                               std::abs(c[3])});
  if (mag == 0.0) return;
  const double tiny = 1e-14 * mag;
  if (std::abs(c[3]) > tiny) {
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    comp(0, 2) = -c[0] / c[3];
    comp(1, 2) -= c[1] / c[3];
    comp(2, 2) -= c[2] / c[3];
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
    for (int i = 0; i < 3; ++i) {
      const auto ev = es.eigenvalues()[i];
      if (std::abs(ev.imag()) <= 1e-7 * (1.0 + std::abs(ev.real())))
        out.push_back(ev.real());
    }
  } else if (std::abs(c[2]) > tiny) {
    const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (c[1] + (c[1] >= 0.0 ? sq : -sq));
    out.push_back(q / c[2]);
    if (q != 0.0) out.push_back(c[0] / q);
    else out.push_back(0.0);
  } else if (std::abs(c[1]) > tiny * 1e-2) {
    out.push_back(-c[0] / c[1]);
  }
  (void)scale;
}

// Polish a simple root by bisection on a sign change; leaves tangency-like
// roots untouched.
double polish_root(const std::array<double, 4>& c, double r, double scale) {
  double eps = 1e-12 * std::max(1.0, std::abs(r)) * std::max(1.0, scale);
  for (int expand = 0; expand < 12; ++expand) {
    double lo = r - eps, hi = r + eps;
    double flo = poly_eval(c, lo), fhi = poly_eval(c, hi);
    if ((flo < 0.0) != (fhi < 0.0)) {
      for (int it = 0; it < 90; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = poly_eval(c, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    eps *= 8.0;
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fibers

struct FiberBuilder {
  static std::vector<Interval> line_range(const DomainModel& dom,
                                          const Point& o, const Direction& th) {
    // s-range where the line stays inside the (closed, padded) bounding box
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const AxisBox& b = dom.bounding_box();
    const double pad = 1e-9 * (1.0 + dom.diameter());
    for (int k = 0; k < dom.dim(); ++k) {
      if (th[k] == 0.0) {
        if (o[k] < b.lo[k] - pad || o[k] > b.hi[k] + pad) return {};
        continue;
      }
      double t1 = (b.lo[k] - pad - o[k]) / th[k];
      double t2 = (b.hi[k] + pad - o[k]) / th[k];
      if (t1 > t2) std::swap(t1, t2);
      lo = std::max(lo, t1);
      hi = std::min(hi, t2);
    }
    if (!(lo < hi)) return {};
    return {Interval{lo, hi}};
  }

  static void subtract_slits(const DomainModel& dom, const Point& o,
                             const Direction& th, IntervalSet& set) {
    if (dom.slits().empty()) return;
    const Eigen::Vector2d ov(o[0], o[1]);
    const Eigen::Vector2d tv(th[0], th[1]);
    if (dom.collinear_.valid) {
      const int ax = dom.collinear_.axis;
      const double lvl = dom.collinear_.level;
      if (tv[ax] == 0.0) {
        if (ov[ax] == lvl)  // fiber runs along the slit line
          for (const Interval& sp : dom.collinear_.spans) {
            // span is in the other coordinate; convert to s
            const int other = 1 - ax;
            if (tv[other] == 0.0) continue;
            double s1 = (sp.lo - ov[other]) / tv[other];
            double s2 = (sp.hi - ov[other]) / tv[other];
            if (s1 > s2) std::swap(s1, s2);
            set.subtract_closed(s1, s2);
          }
        return;
      }
      const double s_star = (lvl - ov[ax]) / tv[ax];
      const int other = 1 - ax;
      const double u = ov[other] + s_star * tv[other];
      auto it = std::upper_bound(
          dom.collinear_.spans.begin(), dom.collinear_.spans.end(), u,
          [](double v, const Interval& iv) { return v < iv.lo; });
      if (it != dom.collinear_.spans.begin()) {
        --it;
        if (u >= it->lo && u <= it->hi) set.subtract_closed(s_star, s_star);
      }
      return;
    }
    for (const Slit& sl : dom.slits()) {
      const Eigen::Vector2d e = sl.b - sl.a;
      const double den = tv.x() * e.y() - tv.y() * e.x();
      const Eigen::Vector2d w = sl.a - ov;
      if (std::abs(den) <= 1e-15 * e.norm()) {
        // parallel; block the closed extent if actually collinear
        const double off = tv.x() * w.y() - tv.y() * w.x();
        if (std::abs(off) <= 1e-12 * (1.0 + w.norm())) {
          double s1 = w.dot(tv);
          double s2 = (sl.b - ov).dot(tv);
          if (s1 > s2) std::swap(s1, s2);
          set.subtract_closed(s1, s2);
        }
        continue;
      }
      const double t = -(tv.x() * w.y() - tv.y() * w.x()) / den;
      if (t < 0.0 || t > 1.0) continue;
      const Eigen::Vector2d hit = sl.a + t * e;
      const double s = (hit - ov).dot(tv);
      set.subtract_closed(s, s);
    }
  }

  static std::vector<Interval> rectilinear(const DomainModel& dom,
                                           const Point& o, const Direction& th) {
    IntervalSet set;
    const int d = dom.dim();
    for (const AxisBox& b : dom.boxes()) {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      bool dead = false;
      for (int k = 0; k < d; ++k) {
        if (th[k] == 0.0) {
          if (!(b.lo[k] < o[k] && o[k] < b.hi[k])) {
            dead = true;
            break;
          }
          continue;
        }
        double t1 = (b.lo[k] - o[k]) / th[k];
        double t2 = (b.hi[k] - o[k]) / th[k];
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
      }
      if (!dead && lo < hi) set.add(Interval{lo, hi});
    }
    for (const AxisBox& h : dom.holes()) {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      bool dead = false;
      for (int k = 0; k < d; ++k) {
        if (th[k] == 0.0) {
          if (o[k] < h.lo[k] || o[k] > h.hi[k]) {
            dead = true;
            break;
          }
          continue;
        }
        double t1 = (h.lo[k] - o[k]) / th[k];
        double t2 = (h.hi[k] - o[k]) / th[k];
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
      }
      if (!dead && lo <= hi) set.subtract_closed(lo, hi);
    }
    subtract_slits(dom, o, th, set);
    std::vector<Interval> out = set.take();
    // Boxes that touch along a face leave the fiber split at the crossing;
    // re-join the pieces when the seam point is actually interior. (Holes and
    // slits keep their splits: membership at those seams tests false.)
    const double seam_tol = 1e-13 * (1.0 + dom.diameter());
    std::vector<Interval> merged;
    merged.reserve(out.size());
    for (const Interval& iv : out) {
      if (!merged.empty() && iv.lo - merged.back().hi <= seam_tol) {
        const double touch = 0.5 * (merged.back().hi + iv.lo);
        if (dom.contains(o + touch * th.vector())) {
          merged.back().hi = iv.hi;
          continue;
        }
      }
      merged.push_back(iv);
    }
    return merged;
  }

  static std::vector<Interval> polygon(const DomainModel& dom, const Point& o,
                                       const Direction& th) {
    const Eigen::Vector2d ov(o[0], o[1]);
    const Eigen::Vector2d tv(th[0], th[1]);
    const auto& loop = dom.loop();
    const std::size_t n = loop.size();
    std::vector<double> crossings;
    std::vector<Interval> collinear_blocks;
    crossings.reserve(8);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& a = loop[i];
      const Eigen::Vector2d& b = loop[(i + 1) % n];
      const double sa = tv.x() * (a.y() - ov.y()) - tv.y() * (a.x() - ov.x());
      const double sb = tv.x() * (b.y() - ov.y()) - tv.y() * (b.x() - ov.x());
      if (sa == 0.0 && sb == 0.0) {
        double s1 = (a - ov).dot(tv), s2 = (b - ov).dot(tv);
        if (s1 > s2) std::swap(s1, s2);
        collinear_blocks.push_back({s1, s2});
        continue;
      }
      if ((sa < 0.0) != (sb < 0.0)) {
        const double t = sa / (sa - sb);
        const Eigen::Vector2d hit = a + t * (b - a);
        crossings.push_back((hit - ov).dot(tv));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    if (crossings.size() % 2 != 0)
      throw RayUnresolved("polygon fiber produced odd crossing parity at y-offset " +
                          std::to_string(tv.x() * ov.y() - tv.y() * ov.x()));
    IntervalSet set;
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2)
      set.add(Interval{crossings[i], crossings[i + 1]});
    for (const Interval& blk : collinear_blocks)
      set.subtract_closed(blk.lo, blk.hi);
    subtract_slits(dom, o, th, set);
    return set.take();
  }

  static std::vector<Interval> cusp(const DomainModel& dom, const Point& o,
                                    const Direction& th) {
    // Membership along the line is the joint positivity of four polynomials
    // in s: x2, 1-x2, x2^3 - x1, x2^3 + x1 with x(s) = o + s*theta.
    const double o1 = o[0], o2 = o[1], t1 = th[0], t2 = th[1];
    // (o2 + s t2)^3 = o2^3 + 3 o2^2 t2 s + 3 o2 t2^2 s^2 + t2^3 s^3
    const std::array<double, 4> cube = {o2 * o2 * o2, 3.0 * o2 * o2 * t2,
                                        3.0 * o2 * t2 * t2, t2 * t2 * t2};
    std::array<std::array<double, 4>, 4> conds;
    conds[0] = {o2, t2, 0.0, 0.0};              // x2 > 0
    conds[1] = {1.0 - o2, -t2, 0.0, 0.0};       // 1 - x2 > 0
    conds[2] = {cube[0] - o1, cube[1] - t1, cube[2], cube[3]};  // x2^3 - x1 > 0
    conds[3] = {cube[0] + o1, cube[1] + t1, cube[2], cube[3]};  // x2^3 + x1 > 0

    auto range = line_range(dom, o, th);
    if (range.empty()) return {};
    const double s_lo = range[0].lo, s_hi = range[0].hi;
    const double scale = std::max(1.0, std::max(std::abs(s_lo), std::abs(s_hi)));

    std::vector<double> bks = {s_lo, s_hi};
    std::vector<double> roots;
    for (const auto& c : conds) {
      roots.clear();
      real_roots(c, scale, roots);
      for (double r : roots) {
        r = polish_root(c, r, scale);
        if (r > s_lo && r < s_hi) bks.push_back(r);
      }
    }
    std::sort(bks.begin(), bks.end());

    Point probe(2);
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < bks.size(); ++i) {
      const double a = bks[i], b = bks[i + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      probe << o1 + mid * t1, o2 + mid * t2;
      if (!dom.contains(probe)) continue;
      // merge across spurious breakpoints (interior points flagged as roots)
      probe << o1 + a * t1, o2 + a * t2;
      if (!out.empty() && out.back().hi == a && dom.contains(probe))
        out.back().hi = b;
      else
        out.push_back({a, b});
    }
    return out;
  }

  static std::vector<Interval> oracle_scan(const DomainModel& dom,
                                           const Point& o, const Direction& th) {
    auto range = line_range(dom, o, th);
    if (range.empty()) return {};
    const double h = dom.oracle_step();
    double s_lo = range[0].lo - 2.0 * h;
    double s_hi = range[0].hi + 2.0 * h;
    const long n = std::max(8L, static_cast<long>(std::ceil((s_hi - s_lo) / h)));
    const double step = (s_hi - s_lo) / static_cast<double>(n);

    auto member = [&](double s) {
      Point p = o + s * th.vector();
      return dom.contains(p);
    };
    bool prev = member(s_lo);
    if (prev)
      throw RayUnresolved("oracle membership extends outside the bounding box");
    std::vector<Interval> out;
    double open_at = 0.0;
    for (long k = 1; k <= n; ++k) {
      const double s = s_lo + step * static_cast<double>(k);
      const bool cur = member(s);
      if (cur != prev) {
        double in = cur ? s : s - step;
        double outside = cur ? s - step : s;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (in + outside);
          if (member(mid)) in = mid;
          else outside = mid;
        }
        const double edge = outside;  // boundary value on the non-member side
        if (cur) open_at = edge;
        else if (edge > open_at) out.push_back({open_at, edge});
        prev = cur;
      }
    }
    if (prev)
      throw RayUnresolved("oracle membership extends outside the bounding box");
    return out;
  }
};

FiberDecomposition fiber(const DomainModel& dom, const Direction& theta,
                         const Eigen::VectorXd& y) {
  if (theta.dim() != dom.dim())
    throw BadParameter("direction dimension does not match the domain");
  FiberDecomposition f{theta, y, {}};
  const Point o = embed(theta, y, 0.0);
  switch (dom.kind()) {
    case DomainKind::IntervalUnion: {
      // s-coordinate along theta: x = s*theta[0], so s = x*theta[0].
      const double sgn = theta[0];
      for (const Interval& iv : dom.intervals()) {
        if (sgn > 0.0) f.intervals.push_back(iv);
        else f.intervals.push_back({-iv.hi, -iv.lo});
      }
      if (sgn < 0.0) std::reverse(f.intervals.begin(), f.intervals.end());
      break;
    }
    case DomainKind::RectilinearUnion:
      f.intervals = FiberBuilder::rectilinear(dom, o, theta);
      break;
    case DomainKind::Polygon:
      f.intervals = FiberBuilder::polygon(dom, o, theta);
      break;
    case DomainKind::CuspAnalytic:
      f.intervals = FiberBuilder::cusp(dom, o, theta);
      break;
    case DomainKind::Oracle:
      f.intervals = FiberBuilder::oracle_scan(dom, o, theta);
      break;
  }
  return f;
}

int FiberDecomposition::find(double s) const {
  auto it = std::upper_bound(
      intervals.begin(), intervals.end(), s,
      [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals.begin()) return -1;
  --it;
  if (!it->contains(s)) return -1;
  return static_cast<int>(it - intervals.begin());
}

// ---------------------------------------------------------------------------
// Exit quantities

namespace {

// March + bisect from an interior point (oracle path).
double oracle_delta(const DomainModel& dom, const Point& x, const Direction& th) {
  const double h = dom.oracle_step();
  const double cap = 1.5 * dom.bounding_box().diagonal() + 4.0 * h;
  auto member = [&](double t) { return dom.contains(x + t * th.vector()); };
  double t_in = 0.0;
  double t = h;
  while (member(t)) {
    t_in = t;
    t += h;
    if (t > cap)
      throw RayUnresolved("ray marching left the bounding box without exiting "
                          "the domain (broken oracle?)");
  }
  double t_out = t;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (t_in + t_out);
    if (member(mid)) t_in = mid;
    else t_out = mid;
  }
  return t_out;
}

// Nudge delta upward until x + delta*theta tests outside; keeps the "exit
// point is not a member" contract watertight against rounding. Steps at the
// rounding granularity of the *coordinates*, not of delta: for a short chord
// far from the origin a ulp of delta is too small to move the point at all.
double nudge_outward(const DomainModel& dom, const Point& x, const Direction& th,
                     double delta) {
  const double scale = 1.0 + x.cwiseAbs().maxCoeff() + std::abs(delta);
  const double eta = std::ldexp(scale, -53);
  for (int k = 0; k < 128; ++k) {
    if (!dom.contains(x + delta * th.vector())) return delta;
    delta = std::max(delta + eta,
                     std::nextafter(delta, std::numeric_limits<double>::infinity()));
  }
  return delta;
}

}  // namespace

double delta_theta(const DomainModel& dom, const Point& x, const Direction& theta) {
  if (!dom.contains(x))
    throw PointNotInterior("delta_theta: point " + format_point(x) +
                           " is not in the domain interior");
  if (dom.kind() == DomainKind::Oracle)
    return nudge_outward(dom, x, theta, oracle_delta(dom, x, theta));

  const Eigen::VectorXd y = project(x, theta);
  const double s = theta.dot(x);
  FiberDecomposition f = fiber(dom, theta, y);
  int idx = f.find(s);
  if (idx < 0) {
    // The point is a member but its axial coordinate fell on/outside the
    // computed fiber by rounding; accept an interval whose closure holds s.
    const double tol = 1e-12 * (1.0 + dom.diameter());
    for (std::size_t i = 0; i < f.intervals.size(); ++i)
      if (s >= f.intervals[i].lo - tol && s <= f.intervals[i].hi + tol) {
        idx = static_cast<int>(i);
        break;
      }
  }
  if (idx < 0)
    throw RayUnresolved("fiber through " + format_point(x) +
                        " does not contain its own axial coordinate");
  return nudge_outward(dom, x, theta, f.intervals[idx].hi - s);
}

ExitRecord exit_record(const DomainModel& dom, const Point& x, const Direction& theta) {
  if (!dom.contains(x))
    throw PointNotInterior("exit_record: point " + format_point(x) +
                           " is not in the domain interior");
  ExitRecord r;
  r.x = x;
  if (dom.kind() == DomainKind::Oracle) {
    r.delta_plus = nudge_outward(dom, x, theta, oracle_delta(dom, x, theta));
    const Direction neg = theta.negated();
    r.delta_minus = nudge_outward(dom, x, neg, oracle_delta(dom, x, neg));
  } else {
    const Eigen::VectorXd y = project(x, theta);
    const double s = theta.dot(x);
    FiberDecomposition f = fiber(dom, theta, y);
    int idx = f.find(s);
    if (idx < 0) {
      const double tol = 1e-12 * (1.0 + dom.diameter());
      for (std::size_t i = 0; i < f.intervals.size(); ++i)
        if (s >= f.intervals[i].lo - tol && s <= f.intervals[i].hi + tol) {
          idx = static_cast<int>(i);
          break;
        }
    }
    if (idx < 0)
      throw RayUnresolved("fiber through " + format_point(x) +
                          " does not contain its own axial coordinate");
    r.delta_plus = nudge_outward(dom, x, theta, f.intervals[idx].hi - s);
    r.delta_minus =
        nudge_outward(dom, x, theta.negated(), s - f.intervals[idx].lo);
  }
  r.z_plus = x + r.delta_plus * theta.vector();
  r.z_minus = x - r.delta_minus * theta.vector();
  r.chord = r.delta_plus + r.delta_minus;
  return r;
}

}  // namespace dirtrace
