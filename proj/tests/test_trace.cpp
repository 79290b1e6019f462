#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "dirtrace/gallery.hpp"
#include "dirtrace/geometry.hpp"
#include "dirtrace/rng.hpp"
#include "dirtrace/trace.hpp"

using namespace dirtrace;

namespace {

const Direction e1 = Direction::axis(2, 0);
const Direction e2 = Direction::axis(2, 1);

Point pt1(double x) {
  Point p(1);
  p << x;
  return p;
}

Point pt2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("trace_1d recovers both endpoint values") {
  Trace1dResult lin = trace_1d([](double s) { return s; },
                               [](double) { return 1.0; }, 0.0, 1.0);
  CHECK(lin.converged);
  CHECK(lin.at_beta == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(lin.at_alpha == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(lin.evals > 0);

  Trace1dResult sq = trace_1d([](double s) { return s * s; },
                              [](double s) { return 2.0 * s; }, -0.5, 1.0);
  CHECK(sq.at_beta == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sq.at_alpha == doctest::Approx(0.25).epsilon(1e-9));

  const double pi = 4.0 * std::atan(1.0);
  Trace1dResult cs = trace_1d([pi](double s) { return std::cos(pi * s); },
                              [pi](double s) { return -pi * std::sin(pi * s); },
                              0.0, 1.0);
  CHECK(cs.at_beta == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(cs.at_alpha == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cs.error < 1e-8);

  // random cubics over random intervals: both ends exact to tolerance
  const CounterRng rng = CounterRng::from_seed(20260814ull, "trace-1d");
  std::uint64_t k = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const double c0 = rng.uniform(k++, -2.0, 2.0), c1 = rng.uniform(k++, -2.0, 2.0);
    const double c2 = rng.uniform(k++, -2.0, 2.0), c3 = rng.uniform(k++, -2.0, 2.0);
    const double a = rng.uniform(k++, -3.0, 1.0);
    const double b = a + rng.uniform(k++, 0.05, 3.0);
    auto f = [=](double s) { return ((c3 * s + c2) * s + c1) * s + c0; };
    auto df = [=](double s) { return (3.0 * c3 * s + 2.0 * c2) * s + c1; };
    Trace1dResult r = trace_1d(f, df, a, b);
    CHECK(r.converged);
    CHECK(r.at_beta == doctest::Approx(f(b)).epsilon(1e-8));
    CHECK(r.at_alpha == doctest::Approx(f(a)).epsilon(1e-8));
  }

  CHECK_THROWS_AS(trace_1d([](double) { return 0.0; }, [](double) { return 0.0; },
                           1.0, 1.0),
                  ZeroChord);

  // starved refinement reports rather than lies: the derivative blows up at
  // the left endpoint faster than two grading levels can absorb
  TraceOptions tight;
  tight.max_levels = 2;
  tight.start_levels = 1;
  Trace1dResult starved =
      trace_1d([](double s) { return std::pow(s, 0.1); },
               [](double s) { return 0.1 * std::pow(s, -0.9); }, 0.0, 1.0,
               tight);
  CHECK(!starved.converged);
}

TEST_CASE("trace_at: golden values") {
  DomainModel sq = gallery::square().domain;
  ScalarField x1 = parse_field("x1", 2);
  TraceSample s = trace_at(sq, x1, pt2(0.25, 0.5), e1);
  CHECK(s.z[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.z[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.partner[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(s.partner_value == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(s.chord == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.error < 1e-8);

  // two components, one shared endpoint: the trace is direction-dependent
  GalleryEntry dd = gallery::disconnected_1d();
  const ScalarField& pw = dd.fields.at("piecewise");
  TraceSample left = trace_at(dd.domain, pw, pt1(0.5), Direction::axis(1, 0));
  CHECK(left.z[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(left.value == doctest::Approx(1.0).epsilon(1e-9));
  TraceSample right = trace_at(dd.domain, pw, pt1(1.5), Direction::axis(1, 0, -1.0));
  CHECK(right.z[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(right.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  // cusp with the singular power field: constant along horizontal chords
  GalleryEntry cu = gallery::cusp(0.75);
  TraceSample c = trace_at(cu.domain, cu.fields.at("singular"), pt2(0.0, 0.5), e1);
  CHECK(c.z[0] == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(c.value == doctest::Approx(std::pow(0.5, -0.75)).epsilon(1e-9));
  CHECK(c.partner_value == doctest::Approx(std::pow(0.5, -0.75)).epsilon(1e-9));

  // slit square: the two slit faces carry different one-sided traces
  GalleryEntry sl = gallery::slit_square();
  const ScalarField& ad = sl.fields.at("piecewise");
  TraceSample fromleft = trace_at(sl.domain, ad, pt2(0.25, 0.5), e1);
  CHECK(fromleft.z[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fromleft.value == doctest::Approx(-0.5).epsilon(1e-8));
  TraceSample fromright = trace_at(sl.domain, ad, pt2(0.75, 0.5), e1.negated());
  CHECK(fromright.z[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fromright.value == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("smooth fields: trace equals the boundary value") {
  struct Case {
    const char* job;
    DomainModel dom;
  };
  const Case cases[] = {
      {"smooth-square", gallery::square().domain},
      {"smooth-lshape", gallery::lshape().domain},
      {"smooth-cusp", DomainModel::cusp()},
  };
  ScalarField u = parse_field("sin(x1)*exp(x2/2) + x1*x2", 2);
  for (const Case& c : cases) {
    CAPTURE(c.job);
    const CounterRng rng = CounterRng::from_seed(20260814ull, c.job);
    std::uint64_t k = 0;
    const AxisBox& bb = c.dom.bounding_box();
    int done = 0;
    for (std::uint64_t i = 0; done < 70 && i < 4000; ++i) {
      Point x = rng.point_in_box(k++, bb.lo, bb.hi);
      if (!c.dom.contains(x)) continue;
      ++done;
      const Direction th = Direction::angle_deg(rng.uniform(k++, 0.0, 360.0));
      TraceSample s = trace_at(c.dom, u, x, th);
      CHECK(s.value == doctest::Approx(u.value(s.z)).epsilon(1e-7));
      CHECK(s.partner_value == doctest::Approx(u.value(s.partner)).epsilon(1e-7));
    }
    CHECK(done == 70);
  }
}

TEST_CASE("the trace depends on the chord, not the anchor") {
  DomainModel sq = gallery::square().domain;
  ScalarField u = parse_field("cos(3*x1) + x2^2*x1", 2);
  double first = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double t = 0.1 + 0.18 * i;
    TraceSample s = trace_at(sq, u, pt2(t, 0.4), e1);
    if (i == 0) first = s.value;
    else CHECK(s.value == doctest::Approx(first).epsilon(1e-9));
  }
  CHECK(first == doctest::Approx(u.value(pt2(1.0, 0.4))).epsilon(1e-8));
}

TEST_CASE("restriction compatibility on a shared boundary piece") {
  // the left half of the square shares its x1=0 face with the square; traces
  // there agree even when the field has a kink that only the long chord sees
  DomainModel sq = gallery::square().domain;
  DomainModel half = DomainModel::rectilinear({make_box({0.0, 0.0}, {0.5, 1.0})});
  ScalarField kink(
      "fold", 2, [](const Point& x) { return std::abs(x[0] - 0.5) + x[1]; },
      [](const Point& x) {
        Point g(2);
        g << (x[0] < 0.5 ? -1.0 : 1.0), 1.0;
        return g;
      });
  for (double t : {0.2, 0.5, 0.8}) {
    TraceSample a = trace_at(sq, kink, pt2(0.25, t), e1.negated());
    TraceSample b = trace_at(half, kink, pt2(0.25, t), e1.negated());
    CHECK((a.z - b.z).norm() < 1e-12);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
    CHECK(a.value == doctest::Approx(0.5 + t).epsilon(1e-8));
  }
}

TEST_CASE("anchor_chord recovers chords from boundary points") {
  DomainModel sq = gallery::square().domain;
  AnchoredChord ch = anchor_chord(sq, pt2(1.0, 0.5), e1);
  CHECK(sq.contains(ch.x));
  CHECK(ch.z_plus[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ch.z_plus[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ch.chord == doctest::Approx(1.0).epsilon(1e-9));

  // a boundary point that cannot be an exit along +e1
  CHECK_THROWS_AS(anchor_chord(sq, pt2(0.0, 0.5), e1), AnchorFailure);
  // and a point nowhere near the boundary
  CHECK_THROWS_AS(anchor_chord(sq, pt2(2.0, 2.0), e1), AnchorFailure);

  // atoms of the cantor measure anchor to their gap
  GalleryEntry g = gallery::cantor_complement(1.0 / 3.0, 2);
  AnchoredChord ac = anchor_chord(g.domain, pt1(2.0 / 3.0), Direction::axis(1, 0));
  CHECK(ac.chord == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(ac.z_minus[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("trace_function wraps anchoring") {
  DomainModel sq = gallery::square().domain;
  ScalarField u = parse_field("x1^2 + sin(x2)", 2);
  auto gamma = trace_function(sq, u, e1);
  CHECK(gamma(pt2(1.0, 0.3)) == doctest::Approx(u.value(pt2(1.0, 0.3))).epsilon(1e-8));
  CHECK(gamma(pt2(1.0, 0.9)) == doctest::Approx(u.value(pt2(1.0, 0.9))).epsilon(1e-8));
  CHECK_THROWS_AS(gamma(pt2(0.0, 0.5)), AnchorFailure);
}

TEST_CASE("g_plus_minus") {
  // equal endpoint values collapse both combinations
  auto [pe, me] = g_plus_minus(3.25, 3.25, 0.7);
  CHECK(pe == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(me == doctest::Approx(3.25).epsilon(1e-15));

  auto [p1, m1] = g_plus_minus(1.0, -1.0, 2.0);
  CHECK(p1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m1 == doctest::Approx(-0.5).epsilon(1e-15));

  // product identity against the boundary combination (a a' - b b')/ell
  const CounterRng rng = CounterRng::from_seed(20260814ull, "gpm");
  std::uint64_t k = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const double a = rng.uniform(k++, -3.0, 3.0), b = rng.uniform(k++, -3.0, 3.0);
    const double ap = rng.uniform(k++, -3.0, 3.0), bp = rng.uniform(k++, -3.0, 3.0);
    const double ell = rng.uniform(k++, 0.05, 4.0);
    auto [pu, mu] = g_plus_minus(a, b, ell);
    auto [pv, mv] = g_plus_minus(ap, bp, ell);
    const double lhs = pu * pv - mu * mv;
    const double rhs = (a * ap - b * bp) / ell;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  CHECK_THROWS_AS(g_plus_minus(1.0, 2.0, 0.0), ZeroChord);
}

TEST_CASE("degenerate chords are rejected") {
  AnchoredChord flat;
  flat.x = pt2(0.5, 0.5);
  flat.chord = 0.0;
  ScalarField u = parse_field("x1", 2);
  CHECK_THROWS_AS(trace_on_chord(flat, u, e1), ZeroChord);
}
