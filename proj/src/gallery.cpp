#include "dirtrace/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>

#include "dirtrace/common.hpp"

namespace dirtrace {

const ExpectedQuantity* find_expected(const GalleryEntry& e, const std::string& id) {
  for (const auto& q : e.expected)
    if (q.id == id) return &q;
  return nullptr;
}

namespace gallery {
namespace {

ScalarField builtin_field(std::string id, int dim,
                          std::function<double(const Point&)> value,
                          std::function<Point(const Point&)> grad) {
  return ScalarField(std::move(id), dim, std::move(value), std::move(grad));
}

// Removed intervals of the rho-Cantor construction on ]0,1[, one record per
// node m of the binary tree, levels 0..depth.  Node m at level k carries the
// gap ]c_m, d_m[ of width rho^{k+1}.
struct CantorGap {
  double c, d;
  int level;
};

std::vector<CantorGap> cantor_gaps(double rho, int depth) {
  if (!(rho > 0.0 && rho <= 1.0 / 3.0)) throw BadParameter("cantor ratio must lie in ]0,1/3]");
  if (depth < 1 || depth > 24) throw BadParameter("cantor depth out of range");
  const std::size_t m_end = std::size_t(1) << (depth + 1);
  std::vector<double> a(2 * m_end), b(2 * m_end);
  a[1] = 0.0;
  b[1] = 1.0;
  std::vector<CantorGap> gaps;
  gaps.reserve(m_end - 1);
  double width = rho;
  for (int k = 0; k <= depth; ++k, width *= rho) {
    const std::size_t lo = std::size_t(1) << k, hi = std::size_t(1) << (k + 1);
    for (std::size_t m = lo; m < hi; ++m) {
      const double mid = 0.5 * (a[m] + b[m]);
      const double c = mid - 0.5 * width, d = mid + 0.5 * width;
      gaps.push_back({c, d, k});
      if (k < depth) {
        a[2 * m] = a[m];
        b[2 * m] = c;
        a[2 * m + 1] = d;
        b[2 * m + 1] = b[m];
      }
    }
  }
  return gaps;
}

// total width of the gaps down to `depth`: rho*(1-(2 rho)^(depth+1))/(1-2 rho)
double cantor_gap_mass(double rho, int depth) {
  return rho * (1.0 - std::pow(2.0 * rho, depth + 1)) / (1.0 - 2.0 * rho);
}

// Closed remainder intervals of the middle-thirds construction after `level`
// subdivision rounds of [0,1].
std::vector<Interval> thirds_remainder(int level) {
  std::vector<Interval> cur{{0.0, 1.0}};
  for (int k = 0; k < level; ++k) {
    std::vector<Interval> next;
    next.reserve(2 * cur.size());
    for (const auto& iv : cur) {
      const double h = (iv.hi - iv.lo) / 3.0;
      next.push_back({iv.lo, iv.lo + h});
      next.push_back({iv.hi - h, iv.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

GalleryEntry square() {
  GalleryEntry e;
  e.name = "square";
  e.domain = DomainModel::rectilinear({make_box({0.0, 0.0}, {1.0, 1.0})});
  e.domain.id = e.name;
  e.fields["u"] = parse_field("sin(x1)*exp(x2/2)", 2);
  e.fields["v"] = parse_field("x1^2*x2 + x1", 2);
  e.fields["zero_trace"] = parse_field("sin(pi*x1)*sin(pi*x2)", 2);
  e.expected.push_back({"area", 1.0, 1e-12, "unit square"});
  e.expected.push_back({"diameter", std::sqrt(2.0), 1e-12, ""});
  return e;
}

GalleryEntry lshape() {
  GalleryEntry e;
  e.name = "lshape";
  e.domain = DomainModel::rectilinear({make_box({0.0, 0.0}, {1.0, 0.5}),
                                       make_box({0.0, 0.5}, {0.5, 1.0})});
  e.domain.id = e.name;
  e.fields["u"] = parse_field("cos(x1)*exp(x2/2)", 2);
  e.fields["v"] = parse_field("x1*x2^2 + x2", 2);
  e.expected.push_back({"area", 0.75, 1e-12, ""});
  e.expected.push_back({"diameter", std::sqrt(2.0), 1e-12, "corner (1,0) to (0,1)"});
  e.notes.push_back("boxes meet along an interior face; fibres must not break there");
  return e;
}

GalleryEntry cantor_complement(double rho, int depth) {
  const auto gaps = cantor_gaps(rho, depth);
  std::vector<Interval> ivs;
  ivs.reserve(gaps.size());
  for (const auto& g : gaps) ivs.push_back({g.c, g.d});
  std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

  GalleryEntry e;
  e.name = "cantor_complement";
  e.domain = DomainModel::interval_union(ivs);
  e.domain.id = e.name;
  e.fields["u"] = parse_field("x1", 1);
  e.fields["usq"] = parse_field("x1^2", 1);

  const double mass = cantor_gap_mass(rho, depth);
  const double full = rho / (1.0 - 2.0 * rho);
  e.truncation_deficit = full - mass;
  e.expected.push_back({"area", mass, 1e-14, "finite geometric sum"});
  e.expected.push_back({"atom_count", double((std::size_t(1) << (depth + 1)) - 1), 0.0,
                        "one atom per gap and direction"});
  e.expected.push_back({"rho", rho, 0.0, ""});
  e.expected.push_back({"depth", double(depth), 0.0, ""});
  e.notes.push_back("every boundary measure is purely atomic; weights are the gap widths");
  return e;
}

GalleryEntry cusp(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw BadParameter("cusp exponent must lie in ]1/2,1[");
  GalleryEntry e;
  e.name = "cusp";
  e.domain = DomainModel::cusp();
  e.domain.id = e.name;
  char expr[64];
  std::snprintf(expr, sizeof expr, "x2^(-%.17g)", alpha);
  e.fields["singular"] = parse_field(expr, 2);
  e.fields["u"] = parse_field("sin(x2) + x1*x2", 2);
  e.fields["v"] = parse_field("x2^2 - x1", 2);
  e.expected.push_back({"area", 0.5, 1e-12, "2*int_0^1 t^3 dt"});
  e.expected.push_back({"diameter", 2.0, 1e-12, "(-1,1) to (1,1)"});
  e.expected.push_back({"alpha", alpha, 0.0, ""});
  // theta=(1,0): exit points (y^3, y), chord 2y^3, so the squared trace of
  // x2^(-alpha) integrates to 2/(4-2a) = 1/(2-alpha)
  e.expected.push_back({"singular_trace_sq_e1", 1.0 / (2.0 - alpha), 5e-7,
                        "int y^(-2a) * 2y^3 dy over ]0,1["});
  e.notes.push_back("field is unbounded at the tip yet the trace stays square-integrable");
  return e;
}

GalleryEntry disconnected_1d() {
  GalleryEntry e;
  e.name = "disconnected_1d";
  e.domain = DomainModel::interval_union({{0.0, 1.0}, {1.0, 2.0}});
  e.domain.id = e.name;
  e.fields["piecewise"] = builtin_field(
      "per_component_linear", 1,
      [](const Point& x) { return x[0] <= 1.0 ? x[0] : x[0] - 1.0; },
      [](const Point& x) {
        (void)x;
        Point g(1);
        g << 1.0;
        return g;
      });
  e.fields["u"] = parse_field("x1^2/4", 1);
  e.expected.push_back({"area", 2.0, 1e-14, ""});
  // gamma_{+1} at the shared point 1 sees the left component (value 1),
  // gamma_{-1} sees the right component (value 0)
  e.expected.push_back({"trace_plus_at_1", 1.0, 1e-9, ""});
  e.expected.push_back({"trace_minus_at_1", 0.0, 1e-9, ""});
  e.notes.push_back("opposite directions disagree at the touching point");
  return e;
}

GalleryEntry slit_square() {
  GalleryEntry e;
  e.name = "slit_square";
  Slit cut{Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(0.5, 1.0)};
  e.domain = DomainModel::rectilinear({make_box({0.0, -1.0}, {1.0, 1.0})}, {}, {cut});
  e.domain.id = e.name;
  // continuous across x2=0, jumps across the slit: -x2 left of it, +x2 right
  // of it, 0 below
  e.fields["piecewise"] = builtin_field(
      "slit_adapted", 2,
      [](const Point& x) {
        if (x[1] <= 0.0) return 0.0;
        return x[0] < 0.5 ? -x[1] : x[1];
      },
      [](const Point& x) {
        Point g(2);
        if (x[1] <= 0.0)
          g << 0.0, 0.0;
        else
          g << 0.0, (x[0] < 0.5 ? -1.0 : 1.0);
        return g;
      });
  e.fields["u"] = parse_field("sin(x1+x2)", 2);
  e.fields["v"] = parse_field("x1*x2", 2);
  e.expected.push_back({"area", 2.0, 1e-12, "slit is null"});
  e.expected.push_back({"slit_face_mass_e1", 0.5, 1e-9,
                        "exits onto the slit come from ]0,1/2[ x ]0,1[, chord 1/2"});
  e.notes.push_back("the two slit faces carry different one-sided traces");
  return e;
}

GalleryEntry cantor_disc(int depth) {
  if (depth < 0 || depth > 20) throw BadParameter("cantor_disc depth out of range");
  GalleryEntry e;
  e.name = "cantor_disc";
  const int n = 720;
  const double two_pi = 8.0 * std::atan(1.0);
  std::vector<Eigen::Vector2d> loop;
  loop.reserve(n);
  for (int j = 0; j < n; ++j) {
    const double a = two_pi * j / n;
    loop.emplace_back(2.0 * std::cos(a), 2.0 * std::sin(a));
  }
  const auto rem = thirds_remainder(depth + 1);
  std::vector<Slit> slits;
  slits.reserve(rem.size());
  for (const auto& iv : rem)
    slits.push_back({Eigen::Vector2d(iv.lo - 0.5, 0.0), Eigen::Vector2d(iv.hi - 0.5, 0.0)});
  e.domain = DomainModel::polygon(loop, slits);
  e.domain.id = e.name;
  e.fields["u"] = parse_field("sin(x1) + x2^2/8", 2);
  e.fields["v"] = parse_field("x1*x2/4", 2);
  const double poly_area = 0.5 * n * 4.0 * std::sin(two_pi / n);
  e.expected.push_back({"area", poly_area, 1e-12, "regular 720-gon, radius 2"});
  e.expected.push_back({"depth", double(depth), 0.0, ""});
  e.expected.push_back({"slit_count", double(rem.size()), 0.0, ""});
  // total length of the retained slit intervals
  e.expected.push_back({"slit_length", std::pow(2.0 / 3.0, depth + 1), 1e-13, ""});
  e.notes.push_back("slits thin out toward a null set as depth grows");
  return e;
}

GalleryEntry bicantor(double rho, int depth) {
  const auto gaps = cantor_gaps(rho, depth);
  // Columns span the full height ]-1,1[ and overlap the base strip; the
  // overlap keeps vertical fibres unbroken where a column meets the base.
  std::vector<AxisBox> boxes;
  boxes.reserve(gaps.size() + 1);
  boxes.push_back(make_box({0.0, -1.0}, {1.0, 0.0}));
  for (const auto& g : gaps) boxes.push_back(make_box({g.c, -1.0}, {g.d, 1.0}));

  GalleryEntry e;
  e.name = "bicantor";
  e.domain = DomainModel::rectilinear(boxes);
  e.domain.id = e.name;
  e.fields["u"] = parse_field("x1*x2 + 1", 2);
  e.fields["v"] = parse_field("x2^2", 2);
  const double gap_mass = cantor_gap_mass(rho, depth);
  e.truncation_deficit = (rho / (1.0 - 2.0 * rho) - gap_mass) * 1.0;
  e.expected.push_back({"area", 1.0 + gap_mass, 1e-13, "base strip plus column tops"});
  e.expected.push_back({"rho", rho, 0.0, ""});
  e.expected.push_back({"depth", double(depth), 0.0, ""});
  e.expected.push_back({"column_count", double(gaps.size()), 0.0, ""});
  e.notes.push_back("boxes overlap on purpose; the union area comes from the closed form above");
  return e;
}

GalleryEntry serpent(int teeth) {
  if (teeth < 1 || teeth > 4096) throw BadParameter("serpent teeth count out of range");
  GalleryEntry e;
  e.name = "serpent";
  std::vector<AxisBox> holes;
  holes.reserve(2 * teeth);
  double hole_area = 0.0;
  for (int k = 1; k <= teeth; ++k) {
    const double l1 = 1.0 / (4.0 * k + 3.0), r1 = 1.0 / (4.0 * k + 2.0);
    const double l2 = 1.0 / (4.0 * k + 1.0), r2 = 1.0 / (4.0 * k);
    holes.push_back(make_box({l1, 0.0}, {r1, 0.8}));   // tooth from below
    holes.push_back(make_box({l2, 0.2}, {r2, 1.0}));   // tooth from above
    hole_area += 0.8 * ((r1 - l1) + (r2 - l2));
  }
  e.domain = DomainModel::rectilinear({make_box({0.0, 0.0}, {0.3, 1.0})}, holes);
  e.domain.id = e.name;

  // Staircase field: constant on each column between consecutive teeth,
  // climbing from level (k-1)^(1/4) to k^(1/4) across the riser column
  // ]1/(4k+2), 1/(4k+1)[ for 1/5 < x2 < 4/5.  Continuous on the domain,
  // unbounded as k grows, with square-integrable directional derivatives.
  struct Col {
    double lo;
    int kind;  // 0 constant, 1 riser
    double base, top;
  };
  auto cols = std::make_shared<std::vector<Col>>();
  auto lvl = [](int k) { return std::pow(double(k), 0.25); };
  cols->push_back({0.0, 0, lvl(teeth), lvl(teeth)});  // left of the last tooth pair
  for (int k = teeth; k >= 1; --k) {
    cols->push_back({1.0 / (4.0 * k + 4.0), 0, lvl(k), lvl(k)});      // plateau
    cols->push_back({1.0 / (4.0 * k + 3.0), 0, lvl(k), lvl(k)});      // over the lower tooth
    cols->push_back({1.0 / (4.0 * k + 2.0), 1, lvl(k - 1), lvl(k)});  // riser
    cols->push_back({1.0 / (4.0 * k + 1.0), 0, lvl(k - 1), lvl(k - 1)});  // under the upper tooth
  }
  cols->push_back({0.25, 0, 0.0, 0.0});
  auto locate = [cols](double x1) {
    auto it = std::upper_bound(cols->begin(), cols->end(), x1,
                               [](double v, const Col& c) { return v < c.lo; });
    return it == cols->begin() ? cols->front() : *(it - 1);
  };
  e.fields["staircase"] = builtin_field(
      "staircase", 2,
      [locate](const Point& x) {
        const Col c = locate(x[0]);
        if (c.kind == 0) return c.base;
        const double t = std::clamp((x[1] - 0.2) / 0.6, 0.0, 1.0);
        return c.base + t * (c.top - c.base);
      },
      [locate](const Point& x) {
        Point g(2);
        g << 0.0, 0.0;
        const Col c = locate(x[0]);
        if (c.kind == 1 && x[1] > 0.2 && x[1] < 0.8) g[1] = (c.top - c.base) / 0.6;
        return g;
      });
  e.fields["u"] = parse_field("x1 + x2^2/2", 2);

  double grad_sq = 0.0;
  for (int k = 1; k <= teeth; ++k) {
    const double w = 1.0 / ((4.0 * k + 1.0) * (4.0 * k + 2.0));
    const double dk = lvl(k) - lvl(k - 1);
    grad_sq += w * 0.6 * (dk / 0.6) * (dk / 0.6);
  }
  e.expected.push_back({"area", 0.3 - hole_area, 1e-13, "strip minus teeth"});
  e.expected.push_back({"teeth", double(teeth), 0.0, ""});
  e.expected.push_back({"staircase_grad_sq", grad_sq, 1e-12,
                        "sum over risers of width * 3/5 * (5/3 * step)^2"});
  e.expected.push_back({"staircase_max", lvl(teeth), 1e-12, ""});
  // chord average of the staircase along the first riser (theta=(0,1)):
  // 1/5 * 0 + 3/5 * 1/2 + 1/5 * 1
  e.expected.push_back({"staircase_riser1_mean", 0.5, 1e-10, ""});
  e.notes.push_back("the staircase value grows like teeth^(1/4) while its energy stays bounded");
  return e;
}

std::vector<std::string> names() {
  return {"square",  "lshape",      "cantor_complement", "cusp",   "disconnected_1d",
          "slit_square", "cantor_disc", "bicantor",          "serpent"};
}

GalleryEntry make(const std::string& name) {
  if (name == "square") return square();
  if (name == "lshape") return lshape();
  if (name == "cantor_complement") return cantor_complement();
  if (name == "cusp") return cusp();
  if (name == "disconnected_1d") return disconnected_1d();
  if (name == "slit_square") return slit_square();
  if (name == "cantor_disc") return cantor_disc();
  if (name == "bicantor") return bicantor();
  if (name == "serpent") return serpent();
  throw BadParameter("unknown gallery entry: " + name);
}

}  // namespace gallery
}  // namespace dirtrace
