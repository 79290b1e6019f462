#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "dirtrace/domain_io.hpp"
#include "dirtrace/gallery.hpp"
#include "dirtrace/measure.hpp"
#include "dirtrace/trace.hpp"

using namespace dirtrace;

namespace {

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

Direction vertical(const DomainModel& dom) {
  return Direction::axis(dom.dim(), dom.dim() - 1);
}

}  // namespace

TEST_CASE("catalogue: every listed entry builds and is self-describing") {
  const std::vector<std::string> all = gallery::names();
  CHECK(all.size() == 9);
  for (const std::string& n : all) {
    CAPTURE(n);
    GalleryEntry e = gallery::make(n);
    CHECK(e.name == n);
    CHECK(e.domain.id == n);
    CHECK(e.domain.dim() >= 1);
    CHECK(!e.fields.empty());
    CHECK(!e.expected.empty());
    CHECK(find_expected(e, "definitely-not-a-quantity") == nullptr);
  }
  CHECK_THROWS_AS(gallery::make("moebius"), BadParameter);
}

TEST_CASE("catalogue: stored areas match an independent computation") {
  for (const std::string& n : gallery::names()) {
    CAPTURE(n);
    GalleryEntry e = gallery::make(n);
    const ExpectedQuantity* q = find_expected(e, "area");
    REQUIRE(q != nullptr);
    double area = 0.0;
    try {
      area = domain_area(e.domain);
    } catch (const UnsupportedKind&) {
      // overlapping boxes have no closed-form oracle; the sweep mass is the
      // volume, which is what the table records
      area = mu_exact(e.domain, vertical(e.domain)).total_mass;
    }
    CHECK(area == doctest::Approx(q->value).epsilon(std::max(q->tol, 1e-11)));
  }
}

TEST_CASE("gap family: atom count, truncated mass, deficit") {
  GalleryEntry e = gallery::cantor_complement(0.25, 5);
  CHECK(find_expected(e, "atom_count")->value == 63.0);
  CHECK(find_expected(e, "area")->value == doctest::Approx(0.4921875).epsilon(1e-14));
  CHECK(e.truncation_deficit == doctest::Approx(0.5 - 0.4921875).epsilon(1e-12));
  BoundaryMeasure mu = mu_exact(e.domain, Direction::axis(1, 0));
  CHECK(mu.atoms.size() == 63);
  CHECK(mu.total_mass == doctest::Approx(0.4921875).epsilon(1e-13));

  CHECK_THROWS_AS(gallery::cantor_complement(0.4, 5), BadParameter);
  CHECK_THROWS_AS(gallery::cantor_complement(0.25, 0), BadParameter);
  CHECK_THROWS_AS(gallery::cantor_complement(0.25, 40), BadParameter);
}

TEST_CASE("disconnected pair: the stored one-sided traces are reproduced") {
  GalleryEntry e = gallery::disconnected_1d();
  const ScalarField& u = e.fields.at("piecewise");
  const Direction plus = Direction::axis(1, 0);

  const ExpectedQuantity* tp = find_expected(e, "trace_plus_at_1");
  const ExpectedQuantity* tm = find_expected(e, "trace_minus_at_1");
  REQUIRE(tp != nullptr);
  REQUIRE(tm != nullptr);

  AnchoredChord ap = anchor_chord(e.domain, pt1(1.0), plus);
  CHECK(trace_on_chord(ap, u, plus).at_beta ==
        doctest::Approx(tp->value).epsilon(tp->tol));
  AnchoredChord am = anchor_chord(e.domain, pt1(1.0), plus.negated());
  CHECK(trace_on_chord(am, u, plus.negated()).at_beta ==
        doctest::Approx(tm->value).scale(1.0).epsilon(tm->tol));
}

TEST_CASE("slit square: the slit face carries the stored exit mass") {
  GalleryEntry e = gallery::slit_square();
  const ExpectedQuantity* q = find_expected(e, "slit_face_mass_e1");
  REQUIRE(q != nullptr);
  BoundaryMeasure mu = mu_exact(e.domain, Direction::axis(2, 0));
  const double face =
      measure_of(mu, [](const Point& z) { return std::abs(z[0] - 0.5) < 1e-9; });
  CHECK(face == doctest::Approx(q->value).epsilon(q->tol));
}

TEST_CASE("cusp: the singular-trace table follows the exponent") {
  for (double alpha : {0.6, 0.75, 0.9}) {
    GalleryEntry e = gallery::cusp(alpha);
    const ExpectedQuantity* q = find_expected(e, "singular_trace_sq_e1");
    REQUIRE(q != nullptr);
    CHECK(q->value == doctest::Approx(1.0 / (2.0 - alpha)).epsilon(1e-14));
    CHECK(find_expected(e, "alpha")->value == alpha);
  }
  CHECK_THROWS_AS(gallery::cusp(0.5), BadParameter);
  CHECK_THROWS_AS(gallery::cusp(1.0), BadParameter);
  CHECK_THROWS_AS(gallery::cusp(0.3), BadParameter);
}

TEST_CASE("cantor disc: slit inventory thins out geometrically") {
  GalleryEntry e = gallery::cantor_disc(5);
  CHECK(find_expected(e, "slit_count")->value == 64.0);
  CHECK(e.domain.slits().size() == 64);
  double total = 0.0;
  for (const Slit& s : e.domain.slits()) total += (s.b - s.a).norm();
  CHECK(total == doctest::Approx(std::pow(2.0 / 3.0, 6)).epsilon(1e-12));
  CHECK(total == doctest::Approx(find_expected(e, "slit_length")->value)
                     .epsilon(1e-12));
  CHECK_THROWS_AS(gallery::cantor_disc(-1), BadParameter);
  CHECK_THROWS_AS(gallery::cantor_disc(30), BadParameter);
}

TEST_CASE("bicantor: column inventory matches the gap family") {
  GalleryEntry e = gallery::bicantor(0.3, 3);
  CHECK(find_expected(e, "column_count")->value == 15.0);
  CHECK(e.domain.boxes().size() == 16);  // base strip + columns
  const double gap_mass = 0.3 * (1.0 - std::pow(0.6, 4)) / 0.4;
  CHECK(find_expected(e, "area")->value ==
        doctest::Approx(1.0 + gap_mass).epsilon(1e-13));
  CHECK(e.truncation_deficit ==
        doctest::Approx(0.3 / 0.4 - gap_mass).epsilon(1e-12));
}

TEST_CASE("serpent: staircase is continuous, bounded by teeth^(1/4)") {
  const int teeth = 6;
  GalleryEntry e = gallery::serpent(teeth);
  const ScalarField& s = e.fields.at("staircase");

  // continuity probes across the column boundaries around the k=2 riser
  const double lo = 1.0 / 10.0, hi = 1.0 / 9.0;  // riser column for k=2
  const double eps = 1e-9;
  // top of the riser meets the plateau over the lower tooth
  CHECK(s.value(pt2(lo - eps, 0.9)) ==
        doctest::Approx(s.value(pt2(lo + eps, 0.9))).epsilon(1e-7));
  CHECK(s.value(pt2(lo + eps, 0.9)) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-7));
  // bottom of the riser meets the column under the upper tooth
  CHECK(s.value(pt2(hi - eps, 0.1)) ==
        doctest::Approx(s.value(pt2(hi + eps, 0.1))).epsilon(1e-7));
  CHECK(s.value(pt2(hi - eps, 0.1)) == doctest::Approx(1.0).epsilon(1e-7));

  // supremum is attained left of the last tooth pair
  CHECK(s.value(pt2(0.001, 0.5)) ==
        doctest::Approx(find_expected(e, "staircase_max")->value).epsilon(1e-12));
  CHECK(find_expected(e, "staircase_max")->value ==
        doctest::Approx(std::pow(double(teeth), 0.25)).epsilon(1e-14));

  // chord average over the first riser: flat fifth + linear ramp + flat fifth
  const ExpectedQuantity* rm = find_expected(e, "staircase_riser1_mean");
  REQUIRE(rm != nullptr);
  const double xr = 0.5 * (1.0 / 6.0 + 1.0 / 5.0);
  const int n = 6000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += s.value(pt2(xr, (i + 0.5) / n));
  mean /= n;
  CHECK(mean == doctest::Approx(rm->value).epsilon(1e-9));

  // directional energy of the staircase: only the risers contribute
  const ExpectedQuantity* gs = find_expected(e, "staircase_grad_sq");
  REQUIRE(gs != nullptr);
  const Direction e2d = Direction::axis(2, 1);
  VolumeOptions vo;
  vo.abs_tol = 1e-9;
  QuadResult got = integrate_volume(
      e.domain, e2d,
      [&s, &e2d](const Point& x) {
        const double d = s.du(x, e2d);
        return d * d;
      },
      vo);
  CHECK(got.value == doctest::Approx(gs->value).epsilon(1e-6));

  CHECK_THROWS_AS(gallery::serpent(0), BadParameter);
  CHECK_THROWS_AS(gallery::serpent(5000), BadParameter);
}

TEST_CASE("entries survive the JSON round trip") {
  {
    GalleryEntry e = gallery::lshape();
    DomainSpec spec = domain_from_json(entry_to_json(e));
    CHECK(domain_area(spec.domain) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(spec.domain.kind() == e.domain.kind());
    REQUIRE(spec.fields.count("u") == 1);
    const Point probe = pt2(0.3, 0.4);
    CHECK(spec.fields.at("u").value(probe) ==
          doctest::Approx(e.fields.at("u").value(probe)).epsilon(1e-14));
  }
  {
    GalleryEntry e = gallery::slit_square();
    DomainSpec spec = domain_from_json(entry_to_json(e));
    CHECK(spec.domain.slits().size() == 1);
    BoundaryMeasure mu = mu_exact(spec.domain, Direction::axis(2, 0));
    CHECK(mu.total_mass == doctest::Approx(2.0).epsilon(1e-12));
    // the builtin piecewise field rides along by reference
    REQUIRE(spec.fields.count("piecewise") == 1);
    CHECK(spec.fields.at("piecewise").value(pt2(0.25, 0.5)) ==
          doctest::Approx(-0.5).epsilon(1e-14));
  }
  {
    GalleryEntry e = gallery::cantor_complement(0.25, 4);
    DomainSpec spec = domain_from_json(entry_to_json(e));
    CHECK(spec.domain.dim() == 1);
    CHECK(domain_area(spec.domain) ==
          doctest::Approx(domain_area(e.domain)).epsilon(1e-14));
  }
}

TEST_CASE("files and names resolve through one loader") {
  DomainSpec byname = load_domain("square");
  CHECK(byname.domain.id == "square");

  const std::string path = "/tmp/dirtrace_test_entry.json";
  save_json(entry_to_json(gallery::lshape()), path);
  DomainSpec byfile = load_domain(path);
  CHECK(domain_area(byfile.domain) == doctest::Approx(0.75).epsilon(1e-12));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_domain("no/such/file.json"), IoError);
  CHECK_THROWS_AS(load_json("/tmp/definitely_missing_dirtrace.json"), IoError);
}
