#pragma once

#include "dirtrace/common.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dirtrace {

// Unit direction in R^d. Construction renormalizes (and rejects zero/non-unit
// garbage); negation flips signs exactly, so theta and -theta share fibers
// bit-for-bit.
class Direction {
 public:
  explicit Direction(Point v);
  static Direction angle_deg(double degrees);  // 2-D convenience: (cos, sin)
  static Direction axis(int dim, int k, double sign = 1.0);

  const Point& vector() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](int k) const { return v_[k]; }
  double dot(const Point& x) const { return v_.dot(x); }
  Direction negated() const;

  bool operator==(const Direction& o) const { return v_ == o.v_; }

 private:
  Point v_;
};

// Orthonormal basis of the hyperplane theta^perp, deterministic: Gram-Schmidt
// seeded with the canonical basis vector least aligned with theta (ties break
// toward the lowest index), then the remaining canonical vectors in index
// order. Returns a d x (d-1) matrix whose columns are the basis.
Eigen::MatrixXd hyperplane_frame(const Direction& theta);

// Coordinates of the orthogonal projection of x onto theta^perp in the frame
// above; a (d-1)-vector. project(x + t*theta) == project(x) exactly up to
// rounding of the dot products.
Eigen::VectorXd project(const Point& x, const Direction& theta);

// Realize the point with hyperplane coordinates y and axial coordinate s.
Point embed(const Direction& theta, const Eigen::VectorXd& y, double s);

struct AxisBox {
  Point lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (int k = 0; k < dim(); ++k) v *= hi[k] - lo[k];
    return v;
  }
  bool contains_open(const Point& p) const {
    for (int k = 0; k < dim(); ++k)
      if (!(lo[k] < p[k] && p[k] < hi[k])) return false;
    return true;
  }
  bool contains_closed(const Point& p) const {
    for (int k = 0; k < dim(); ++k)
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
    return true;
  }
  double diagonal() const { return (hi - lo).norm(); }
};

AxisBox make_box(std::initializer_list<double> lo, std::initializer_list<double> hi);

// Closed 2-D segment removed from the domain (a "slit"); degenerate segments
// (a == b) act as removed points.
struct Slit {
  Eigen::Vector2d a, b;
};

enum class DomainKind { IntervalUnion, RectilinearUnion, Polygon, CuspAnalytic, Oracle };

std::string kind_name(DomainKind k);

// Bounded open domain. Structured kinds carry exact geometry; the Oracle kind
// carries only a membership predicate plus a bounding box and is resolved by
// marching + bisection at a declared resolution.
class DomainModel {
 public:
  // Empty placeholder (kind Oracle with no membership); populate through the
  // static builders before use.
  DomainModel() = default;

  static DomainModel interval_union(std::vector<Interval> intervals);
  static DomainModel rectilinear(std::vector<AxisBox> boxes,
                                 std::vector<AxisBox> holes = {},
                                 std::vector<Slit> slits = {});
  static DomainModel polygon(std::vector<Eigen::Vector2d> loop,
                             std::vector<Slit> slits = {});
  // The model cusp {(x1,x2) : -x2^3 < x1 < x2^3, 0 < x2 < 1}.
  static DomainModel cusp();
  static DomainModel oracle(std::function<bool(const Point&)> membership,
                            AxisBox bbox, double resolution_hint = 0.0);

  DomainKind kind() const { return kind_; }
  int dim() const { return bbox_.dim(); }
  const AxisBox& bounding_box() const { return bbox_; }
  double diameter() const { return diameter_; }
  bool contains(const Point& p) const;

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<AxisBox>& boxes() const { return boxes_; }
  const std::vector<AxisBox>& holes() const { return holes_; }
  const std::vector<Slit>& slits() const { return slits_; }
  const std::vector<Eigen::Vector2d>& loop() const { return loop_; }
  double oracle_step() const;

  std::string id = "domain";

 private:
  DomainKind kind_ = DomainKind::Oracle;
  AxisBox bbox_;
  double diameter_ = 0.0;

  std::vector<Interval> intervals_;           // IntervalUnion
  std::vector<AxisBox> boxes_, holes_;        // RectilinearUnion
  std::vector<Slit> slits_;                   // Rectilinear + Polygon
  std::vector<Eigen::Vector2d> loop_;         // Polygon (CCW, simple)
  std::function<bool(const Point&)> membership_;  // Oracle
  double resolution_hint_ = 0.0;

  // Preprocessed view of slits that all lie on one shared axis-aligned line:
  // lookup becomes a binary search instead of a linear scan. Built lazily.
  struct CollinearSlits {
    bool valid = false;
    int axis = 0;        // coordinate that is constant along the slits
    double level = 0.0;  // its value
    std::vector<Interval> spans;  // closed spans in the other coordinate, sorted
  };
  CollinearSlits collinear_;
  void index_slits();

  friend struct FiberBuilder;
};

// Sorted union of disjoint open intervals with open-set semantics: touching
// intervals stay separate (their shared endpoint is not a member), and
// subtracting a closed interval (or point) splits members.
class IntervalSet {
 public:
  void add(Interval iv);                     // union with an open interval
  void subtract_closed(double lo, double hi);  // remove a closed interval
  const std::vector<Interval>& intervals() const { return set_; }
  std::vector<Interval> take() { return std::move(set_); }

 private:
  std::vector<Interval> set_;
};

// The fiber of the domain over hyperplane point y along theta: the open set
// { s : s*theta + embed(y) in Omega } as disjoint open intervals, sorted.
struct FiberDecomposition {
  Direction theta;
  Eigen::VectorXd y;
  std::vector<Interval> intervals;

  double total_length() const {
    StableSum s;
    for (const auto& iv : intervals) s.add(iv.length());
    return s.value();
  }
  // Index of the interval containing s, or -1.
  int find(double s) const;
};

FiberDecomposition fiber(const DomainModel& dom, const Direction& theta,
                         const Eigen::VectorXd& y);

// First-exit distance from interior point x along theta.
double delta_theta(const DomainModel& dom, const Point& x, const Direction& theta);

// Both exits of the chord through x along theta.
struct ExitRecord {
  Point x;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  Point z_plus;   // x + delta_plus * theta
  Point z_minus;  // x - delta_minus * theta
  double chord = 0.0;  // delta_plus + delta_minus
};

ExitRecord exit_record(const DomainModel& dom, const Point& x, const Direction& theta);

}  // namespace dirtrace
