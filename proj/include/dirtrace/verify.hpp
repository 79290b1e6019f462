#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dirtrace/field.hpp"
#include "dirtrace/geometry.hpp"
#include "dirtrace/measure.hpp"
#include "dirtrace/trace.hpp"

namespace dirtrace {

// Outcome of one numeric check.  `pass` means
//   identities:    |lhs - rhs| <= tolerance*scale + error_budget
//   inequalities:  lhs <= rhs + tolerance*scale + error_budget
// with `scale` recorded in the report and residual = |lhs - rhs| resp.
// max(0, lhs - rhs).
struct VerificationReport {
  std::string name;
  std::string domain_id;
  std::string field_u, field_v;
  std::vector<double> theta;
  double lhs = 0.0, rhs = 0.0;
  double residual = 0.0;
  double scale = 1.0;
  double tolerance = 0.0;
  double error_budget = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  static VerificationReport from_json(const nlohmann::json& j);
};

struct GreenOptions {
  double check_tol = 1e-6;
  double volume_tol = 1e-10;
  double boundary_tol = 1e-8;
  TraceOptions trace{};
};

// integral of (u dv + v du) over the domain against the chord-divided
// boundary pairing of the two-end traces.
VerificationReport check_green(const DomainModel& dom, const ScalarField& u,
                               const ScalarField& v, const Direction& theta,
                               const BoundaryMeasure& mu,
                               const GreenOptions& opts = {});

struct BoundOptions {
  double slack_tol = 1e-9;
  double volume_tol = 1e-10;
  double boundary_tol = 1e-8;
  TraceOptions trace{};
};

// integral of (trace)^2 dmu  <=  2 max(1, diam^2) ||u||_theta^2
VerificationReport check_trace_bound(const DomainModel& dom, const ScalarField& u,
                                     const Direction& theta,
                                     const BoundaryMeasure& mu,
                                     const BoundOptions& opts = {});
// integral of (a+b)^2 dmu    <=  4 max(1, diam^2) ||u||_theta^2
VerificationReport check_sum_bound(const DomainModel& dom, const ScalarField& u,
                                   const Direction& theta,
                                   const BoundaryMeasure& mu,
                                   const BoundOptions& opts = {});
// integral of ((a-b)/ell)^2 dmu  <=  ||u||_theta^2
VerificationReport check_diff_bound(const DomainModel& dom, const ScalarField& u,
                                    const Direction& theta,
                                    const BoundaryMeasure& mu,
                                    const BoundOptions& opts = {});
// All three with one shared trace cache (cheaper than three separate calls).
std::vector<VerificationReport> check_all_bounds(const DomainModel& dom,
                                                 const ScalarField& u,
                                                 const Direction& theta,
                                                 const BoundaryMeasure& mu,
                                                 const BoundOptions& opts = {});

struct PoincareOptions {
  double check_tol = 1e-9;
  double volume_tol = 1e-10;
  double hypothesis_tol = 1e-8;  // max |trace| allowed, relative
  int probes = 64;
  TraceOptions trace{};
};

// ||u||_L2 <= diam * ||du||_L2 under vanishing forward trace; throws
// HypothesisViolated when the trace is not numerically zero.
VerificationReport check_poincare(const DomainModel& dom, const ScalarField& u,
                                  const Direction& theta,
                                  const PoincareOptions& opts = {});

struct ConsistencyWitness {
  std::vector<double> z;
  std::vector<std::pair<int, double>> values;  // (direction index, trace)
  double spread = 0.0;
};

struct ConsistencyReport {
  std::string domain_id;
  std::string field;
  std::vector<std::vector<double>> dirs;
  double tol = 0.0;
  bool consistent = false;
  bool no_shared_support = false;
  long clusters = 0;
  long multi_clusters = 0;
  std::vector<ConsistencyWitness> witnesses;  // worst spreads first
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

// Cluster boundary probes shared between directions and compare the traces
// anchored along each direction; spreads above tol flag inconsistency.
ConsistencyReport check_consistency(const DomainModel& dom, const ScalarField& u,
                                    const std::vector<Direction>& dirs,
                                    double tol,
                                    const std::vector<Point>& extra_probes = {},
                                    const TraceOptions& topts = {});

// Randomized one-dimensional checks: endpoint recovery from averaged
// integrals, the three endpoint inequalities, the zero-endpoint Poincare
// bound, and the product identity of the g_plus_minus pair.
VerificationReport check_1d_lemma(int n, std::uint64_t seed);

struct PartitionOptions {
  long n_mc = 20000;
  std::uint64_t seed = 20260814;
  double eps = 1e-6;           // shared-boundary tube half-width
  double shared_tol = 1e-3;    // absolute cap on shared-tube exit mass
  double uncovered_tol = 1e-9; // relative cap on uncovered exit mass
  int interior_samples = 200;
};

// Subdomains must partition the domain (disjoint, contained); every exit
// along each direction must be an exit of some subdomain, and exits near two
// subdomain boundaries must carry negligible mass.  Throws BadPartition on
// overlap or non-containment.
VerificationReport check_sufficiency_partition(const DomainModel& dom,
                                               const std::vector<DomainModel>& subs,
                                               const std::vector<Direction>& dirs,
                                               const PartitionOptions& opts = {});

}  // namespace dirtrace
