#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dirtrace/geometry.hpp"
#include "dirtrace/quadrature.hpp"

namespace dirtrace {

// Point mass sitting on the directional boundary.
struct Atom {
  Point z;
  double weight = 0.0;
  double chord = 0.0;  // fiber length through z (0 when unknown)
  std::string provenance;
};

// One smooth parametrized family of exits: mass(B) = integral over
// { t in ]t0,t1[ : z(t) in B } of w(t) dt.  The parameter is the hyperplane
// coordinate of the sweep, so for the divided measure w/chord == 1.
struct DensityPiece {
  double t0 = 0.0, t1 = 0.0;
  std::function<Point(double)> z;
  std::function<double(double)> w;
  std::function<double(double)> chord;
  double mass = 0.0;
  bool graded = false;  // integrand may degenerate at the parameter ends
  std::string edge_id;
};

enum class MeasureMode { Exact, MonteCarlo };

struct BoundaryMeasure {
  explicit BoundaryMeasure(Direction th) : theta(std::move(th)) {}

  Direction theta;
  std::string domain_id;
  MeasureMode mode = MeasureMode::Exact;
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  double total_mass = 0.0;
  double total_se = 0.0;  // standard error of total_mass (Monte Carlo only)
  std::uint64_t seed = 0;
  long n_samples = 0;

  double atom_mass() const;
  double piece_mass() const;
};

// Exact directional boundary measure by hyperplane sweep (structured kinds;
// throws UnsupportedKind for oracle domains).
BoundaryMeasure mu_exact(const DomainModel& dom, const Direction& theta);

// Monte Carlo pushforward: n uniform draws in the bounding box, each accepted
// interior point contributes vol(box)/n at its forward exit.  Deterministic
// for a fixed (n, seed).
BoundaryMeasure mu_monte_carlo(const DomainModel& dom, const Direction& theta,
                               long n, std::uint64_t seed);

// mu(region).  Piece scans use a fixed grid of 256 probes with bisected
// transitions, so regions thinner than piece_width/256 can be missed.
double measure_of(const BoundaryMeasure& mu,
                  const std::function<bool(const Point&)>& region);

// Restriction of mu to a region: atoms filtered, pieces clipped to the
// parameter runs where z(t) lies inside (same probe grid as measure_of).
BoundaryMeasure restrict_measure(const BoundaryMeasure& mu,
                                 const std::function<bool(const Point&)>& region);

// integral of f(z) dmu
QuadResult integrate_boundary(const BoundaryMeasure& mu,
                              const std::function<double(const Point&)>& f,
                              double abs_tol = 1e-10);

// The measure mu/chord (fiber length divided out); atom chords must be known.
BoundaryMeasure divide_by_chord(const BoundaryMeasure& mu);

struct VolumeOptions {
  double abs_tol = 1e-10;
  int max_levels = 18;
};

// integral over the domain of F(x) dx, swept along theta (structured kinds).
QuadResult integrate_volume(const DomainModel& dom, const Direction& theta,
                            const std::function<double(const Point&)>& F,
                            const VolumeOptions& opts = {});

// Independent area/length oracle: interval sums, disjoint box sums,
// shoelace, or the closed form for the cusp.  Never uses the sweep.
double domain_area(const DomainModel& dom);

}  // namespace dirtrace
