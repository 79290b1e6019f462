#include "dirtrace/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dirtrace/quadrature.hpp"
#include "dirtrace/rng.hpp"

namespace dirtrace {

// ---------------------------------------------------------------------------
// JSON

nlohmann::json VerificationReport::to_json() const {
  return nlohmann::json{
      {"name", name},           {"domain", domain_id},
      {"field_u", field_u},     {"field_v", field_v},
      {"theta", theta},         {"lhs", lhs},
      {"rhs", rhs},             {"residual", residual},
      {"scale", scale},         {"tolerance", tolerance},
      {"error_budget", error_budget},
      {"pass", pass},           {"seed", seed},
      {"notes", notes}};
}

VerificationReport VerificationReport::from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.name = j.at("name").get<std::string>();
  r.domain_id = j.at("domain").get<std::string>();
  r.field_u = j.at("field_u").get<std::string>();
  r.field_v = j.at("field_v").get<std::string>();
  r.theta = j.at("theta").get<std::vector<double>>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.residual = j.at("residual").get<double>();
  r.scale = j.at("scale").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.error_budget = j.at("error_budget").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

nlohmann::json ConsistencyReport::to_json() const {
  nlohmann::json w = nlohmann::json::array();
  for (const ConsistencyWitness& wit : witnesses) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& [d, v] : wit.values) vals.push_back({{"dir", d}, {"value", v}});
    w.push_back({{"z", wit.z}, {"values", vals}, {"spread", wit.spread}});
  }
  return nlohmann::json{{"domain", domain_id},
                        {"field", field},
                        {"dirs", dirs},
                        {"tol", tol},
                        {"consistent", consistent},
                        {"no_shared_support", no_shared_support},
                        {"clusters", clusters},
                        {"multi_clusters", multi_clusters},
                        {"witnesses", w},
                        {"notes", notes}};
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

std::vector<double> theta_vec(const Direction& th) {
  std::vector<double> v(static_cast<std::size_t>(th.dim()));
  for (int k = 0; k < th.dim(); ++k) v[static_cast<std::size_t>(k)] = th[k];
  return v;
}

// ||u||_theta^2 = integral of u^2 + (du)^2
QuadResult norm_theta_sq(const DomainModel& dom, const ScalarField& u,
                         const Direction& theta, double tol) {
  auto F = [&](const Point& x) {
    const double v = u.value(x);
    const double d = u.du(x, theta);
    return v * v + d * d;
  };
  VolumeOptions vo;
  vo.abs_tol = tol;
  return integrate_volume(dom, theta, F, vo);
}

struct ChordData {
  double a = 0.0;      // trace at the forward exit
  double b = 0.0;      // trace at the backward exit
  double chord = 0.0;
  double err = 0.0;
};

// Memoizes anchored chord traces by the exact bits of the boundary point;
// integrands for the different checks then share one trace per node.
class TraceCache {
 public:
  TraceCache(const DomainModel& dom, const ScalarField& u, const Direction& th,
             TraceOptions topts)
      : dom_(dom), u_(u), th_(th), topts_(topts) {}

  const ChordData& get(const Point& z) {
    const std::uint64_t key = hash(z);
    auto it = map_.find(key);
    if (it != map_.end() && it->second.first == z) return it->second.second;
    const AnchoredChord ch = anchor_chord(dom_, z, th_);
    const Trace1dResult tr = trace_on_chord(ch, u_, th_, topts_);
    ChordData cd{tr.at_beta, tr.at_alpha, ch.chord, tr.error};
    max_err_ = std::max(max_err_, tr.error);
    auto [pos, _] = map_.insert_or_assign(key, std::make_pair(z, cd));
    return pos->second.second;
  }

  double max_err() const { return max_err_; }

 private:
  static std::uint64_t hash(const Point& z) {
    std::uint64_t h = 1469598103934665603ull;
    for (int k = 0; k < z.size(); ++k) {
      h ^= std::bit_cast<std::uint64_t>(z[k]);
      h *= 1099511628211ull;
    }
    return h;
  }

  const DomainModel& dom_;
  const ScalarField& u_;
  Direction th_;
  TraceOptions topts_;
  std::unordered_map<std::uint64_t, std::pair<Point, ChordData>> map_;
  double max_err_ = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Green pairing

VerificationReport check_green(const DomainModel& dom, const ScalarField& u,
                               const ScalarField& v, const Direction& theta,
                               const BoundaryMeasure& mu, const GreenOptions& opts) {
  VerificationReport rep;
  rep.name = "green";
  rep.domain_id = dom.id;
  rep.field_u = u.id();
  rep.field_v = v.id();
  rep.theta = theta_vec(theta);
  rep.tolerance = opts.check_tol;

  auto F = [&](const Point& x) {
    return u.value(x) * v.du(x, theta) + v.value(x) * u.du(x, theta);
  };
  VolumeOptions vo;
  vo.abs_tol = opts.volume_tol;
  const QuadResult lhs = integrate_volume(dom, theta, F, vo);

  TraceCache cu(dom, u, theta, opts.trace);
  TraceCache cv(dom, v, theta, opts.trace);
  auto f = [&](const Point& z) {
    const ChordData& du_ = cu.get(z);
    const ChordData& dv_ = cv.get(z);
    return (du_.a * dv_.a - du_.b * dv_.b) / du_.chord;
  };
  const QuadResult rhs = integrate_boundary(mu, f, opts.boundary_tol);

  const double nu = std::sqrt(std::max(0.0, norm_theta_sq(dom, u, theta, opts.volume_tol).value));
  const double nv = std::sqrt(std::max(0.0, norm_theta_sq(dom, v, theta, opts.volume_tol).value));
  rep.scale = std::max(nu * nv, 1e-12);
  rep.lhs = lhs.value;
  rep.rhs = rhs.value;
  rep.residual = std::abs(lhs.value - rhs.value);
  rep.error_budget = lhs.error + rhs.error +
                     (cu.max_err() + cv.max_err()) * std::abs(mu.total_mass) +
                     2.0 * mu.total_se;
  rep.pass = rep.residual <= rep.tolerance * rep.scale + rep.error_budget;
  rep.notes.push_back("volume_evals=" + std::to_string(lhs.evals));
  rep.notes.push_back("boundary_evals=" + std::to_string(rhs.evals));
  rep.notes.push_back("norm_u=" + std::to_string(nu) + " norm_v=" + std::to_string(nv));
  return rep;
}

// ---------------------------------------------------------------------------
// Trace inequalities

namespace {

enum class BoundKind { Trace, Sum, Diff };

VerificationReport one_bound(const DomainModel& dom, const ScalarField& u,
                             const Direction& theta, const BoundaryMeasure& mu,
                             const BoundOptions& opts, BoundKind kind,
                             TraceCache& cache, double norm2, double norm2_err) {
  VerificationReport rep;
  rep.domain_id = dom.id;
  rep.field_u = u.id();
  rep.theta = theta_vec(theta);
  rep.tolerance = opts.slack_tol;

  const double diam = dom.diameter();
  const double d2 = std::max(1.0, diam * diam);

  std::function<double(const Point&)> f;
  switch (kind) {
    case BoundKind::Trace:
      rep.name = "trace_bound";
      rep.rhs = 2.0 * d2 * norm2;
      f = [&cache](const Point& z) {
        const ChordData& c = cache.get(z);
        return c.a * c.a;
      };
      break;
    case BoundKind::Sum:
      rep.name = "sum_bound";
      rep.rhs = 4.0 * d2 * norm2;
      f = [&cache](const Point& z) {
        const ChordData& c = cache.get(z);
        const double s = c.a + c.b;
        return s * s;
      };
      break;
    case BoundKind::Diff:
      rep.name = "diff_bound";
      rep.rhs = norm2;
      f = [&cache](const Point& z) {
        const ChordData& c = cache.get(z);
        const double d = (c.a - c.b) / c.chord;
        return d * d;
      };
      break;
  }
  const QuadResult lhs = integrate_boundary(mu, f, opts.boundary_tol);
  rep.lhs = lhs.value;
  rep.scale = std::max(rep.rhs, 1e-12);
  rep.residual = std::max(0.0, rep.lhs - rep.rhs);
  rep.error_budget = lhs.error + norm2_err * (kind == BoundKind::Diff ? 1.0 : 4.0 * d2) +
                     cache.max_err() * std::abs(mu.total_mass) + 2.0 * mu.total_se;
  rep.pass = rep.lhs <= rep.rhs + rep.tolerance * rep.scale + rep.error_budget;
  rep.notes.push_back("boundary_evals=" + std::to_string(lhs.evals));
  return rep;
}

}  // namespace

std::vector<VerificationReport> check_all_bounds(const DomainModel& dom,
                                                 const ScalarField& u,
                                                 const Direction& theta,
                                                 const BoundaryMeasure& mu,
                                                 const BoundOptions& opts) {
  TraceCache cache(dom, u, theta, opts.trace);
  const QuadResult n2 = norm_theta_sq(dom, u, theta, opts.volume_tol);
  std::vector<VerificationReport> out;
  out.push_back(one_bound(dom, u, theta, mu, opts, BoundKind::Trace, cache,
                          n2.value, n2.error));
  out.push_back(one_bound(dom, u, theta, mu, opts, BoundKind::Sum, cache,
                          n2.value, n2.error));
  out.push_back(one_bound(dom, u, theta, mu, opts, BoundKind::Diff, cache,
                          n2.value, n2.error));
  return out;
}

VerificationReport check_trace_bound(const DomainModel& dom, const ScalarField& u,
                                     const Direction& theta,
                                     const BoundaryMeasure& mu,
                                     const BoundOptions& opts) {
  TraceCache cache(dom, u, theta, opts.trace);
  const QuadResult n2 = norm_theta_sq(dom, u, theta, opts.volume_tol);
  return one_bound(dom, u, theta, mu, opts, BoundKind::Trace, cache, n2.value,
                   n2.error);
}

VerificationReport check_sum_bound(const DomainModel& dom, const ScalarField& u,
                                   const Direction& theta,
                                   const BoundaryMeasure& mu,
                                   const BoundOptions& opts) {
  TraceCache cache(dom, u, theta, opts.trace);
  const QuadResult n2 = norm_theta_sq(dom, u, theta, opts.volume_tol);
  return one_bound(dom, u, theta, mu, opts, BoundKind::Sum, cache, n2.value,
                   n2.error);
}

VerificationReport check_diff_bound(const DomainModel& dom, const ScalarField& u,
                                    const Direction& theta,
                                    const BoundaryMeasure& mu,
                                    const BoundOptions& opts) {
  TraceCache cache(dom, u, theta, opts.trace);
  const QuadResult n2 = norm_theta_sq(dom, u, theta, opts.volume_tol);
  return one_bound(dom, u, theta, mu, opts, BoundKind::Diff, cache, n2.value,
                   n2.error);
}

// ---------------------------------------------------------------------------
// Poincare

VerificationReport check_poincare(const DomainModel& dom, const ScalarField& u,
                                  const Direction& theta,
                                  const PoincareOptions& opts) {
  VerificationReport rep;
  rep.name = "poincare";
  rep.domain_id = dom.id;
  rep.field_u = u.id();
  rep.theta = theta_vec(theta);
  rep.tolerance = opts.check_tol;

  BoundaryMeasure mu = dom.kind() == DomainKind::Oracle
                           ? mu_monte_carlo(dom, theta, 4096, 20260814)
                           : mu_exact(dom, theta);

  // hypothesis: the forward trace vanishes
  VolumeOptions vo;
  vo.abs_tol = opts.volume_tol;
  auto F2 = [&](const Point& x) {
    const double v = u.value(x);
    return v * v;
  };
  auto Fd2 = [&](const Point& x) {
    const double d = u.du(x, theta);
    return d * d;
  };
  const QuadResult l2 = integrate_volume(dom, theta, F2, vo);
  const QuadResult d2 = integrate_volume(dom, theta, Fd2, vo);
  const double usize = std::sqrt(std::max(0.0, l2.value + d2.value));

  TraceCache cache(dom, u, theta, opts.trace);
  int probed = 0;
  double worst = 0.0;
  for (const Atom& a : mu.atoms) {
    if (probed >= opts.probes) break;
    worst = std::max(worst, std::abs(cache.get(a.z).a));
    ++probed;
  }
  const int per_piece =
      mu.pieces.empty()
          ? 0
          : std::max(1, static_cast<int>((opts.probes - probed) /
                                         static_cast<long>(mu.pieces.size())) );
  for (const DensityPiece& p : mu.pieces) {
    for (int k = 0; k < per_piece; ++k) {
      const double t = p.t0 + (k + 0.5) * (p.t1 - p.t0) / per_piece;
      worst = std::max(worst, std::abs(cache.get(p.z(t)).a));
    }
  }
  if (worst > opts.hypothesis_tol * (1.0 + usize))
    throw HypothesisViolated("forward trace is not numerically zero (max |trace| = " +
                             std::to_string(worst) + ")");

  rep.lhs = std::sqrt(std::max(0.0, l2.value));
  rep.rhs = dom.diameter() * std::sqrt(std::max(0.0, d2.value));
  rep.scale = std::max(rep.rhs, 1e-12);
  rep.residual = std::max(0.0, rep.lhs - rep.rhs);
  rep.error_budget = l2.error + d2.error;
  rep.pass = rep.lhs <= rep.rhs + rep.tolerance * rep.scale + rep.error_budget;
  rep.notes.push_back("max_abs_trace=" + std::to_string(worst));
  return rep;
}

// ---------------------------------------------------------------------------
// Consistency across directions

namespace {

struct Probe {
  Point z;
  int dir;  // -1: user probe, try every direction
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(b)] = a;
  }
};

}  // namespace

ConsistencyReport check_consistency(const DomainModel& dom, const ScalarField& u,
                                    const std::vector<Direction>& dirs, double tol,
                                    const std::vector<Point>& extra_probes,
                                    const TraceOptions& topts) {
  if (dirs.size() < 2)
    throw BadParameter("consistency check needs at least two directions");
  ConsistencyReport rep;
  rep.domain_id = dom.id;
  rep.field = u.id();
  rep.tol = tol;
  for (const Direction& d : dirs) rep.dirs.push_back(theta_vec(d));

  std::vector<Probe> probes;
  constexpr int kPerPiece = 8;
  constexpr std::size_t kCapPerDir = 4096;
  for (std::size_t di = 0; di < dirs.size(); ++di) {
    const BoundaryMeasure mu = mu_exact(dom, dirs[di]);
    std::vector<Probe> mine;
    for (const Atom& a : mu.atoms) mine.push_back({a.z, static_cast<int>(di)});
    for (const DensityPiece& p : mu.pieces)
      for (int k = 0; k < kPerPiece; ++k) {
        const double t = p.t0 + (k + 0.5) * (p.t1 - p.t0) / kPerPiece;
        mine.push_back({p.z(t), static_cast<int>(di)});
      }
    if (mine.size() > kCapPerDir) {
      const std::size_t stride = mine.size() / kCapPerDir + 1;
      std::vector<Probe> thin;
      for (std::size_t i = 0; i < mine.size(); i += stride) thin.push_back(mine[i]);
      mine = std::move(thin);
    }
    probes.insert(probes.end(), mine.begin(), mine.end());
  }
  for (const Point& z : extra_probes) probes.push_back({z, -1});

  // cluster by grid hashing at the merge radius
  const double radius = 1e-9 * (1.0 + dom.diameter());
  const int d = dom.dim();
  auto cell_of = [&](const Point& z, int shift0, int shift1) {
    long long cx = static_cast<long long>(std::floor(z[0] / radius)) + shift0;
    long long cy = d > 1 ? static_cast<long long>(std::floor(z[1] / radius)) + shift1 : 0;
    return std::make_pair(cx, cy);
  };
  std::unordered_map<long long, std::vector<int>> grid;
  auto key_of = [](std::pair<long long, long long> c) {
    return c.first * 0x9E3779B97F4A7C15ll + c.second;
  };
  UnionFind uf(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i)
    grid[key_of(cell_of(probes[i].z, 0, 0))].push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (int s0 = -1; s0 <= 1; ++s0)
      for (int s1 = -1; s1 <= 1; ++s1) {
        auto it = grid.find(key_of(cell_of(probes[i].z, s0, s1)));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          if (j <= static_cast<int>(i)) continue;
          if ((probes[static_cast<std::size_t>(j)].z - probes[i].z).norm() <= radius)
            uf.unite(static_cast<int>(i), j);
        }
      }
  }

  std::unordered_map<int, std::vector<int>> clusters;
  for (std::size_t i = 0; i < probes.size(); ++i)
    clusters[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));
  rep.clusters = static_cast<long>(clusters.size());

  long anchor_failures = 0;
  for (const auto& [root, members] : clusters) {
    bool wildcard = false;
    std::vector<bool> present(dirs.size(), false);
    int distinct = 0;
    for (int m : members) {
      const int dir = probes[static_cast<std::size_t>(m)].dir;
      if (dir < 0) {
        wildcard = true;
        continue;
      }
      if (!present[static_cast<std::size_t>(dir)]) {
        present[static_cast<std::size_t>(dir)] = true;
        ++distinct;
      }
    }
    if (!wildcard && distinct < 2) continue;
    const Point& z = probes[static_cast<std::size_t>(
        *std::min_element(members.begin(), members.end()))].z;
    ConsistencyWitness wit;
    wit.z.assign(z.data(), z.data() + z.size());
    for (std::size_t di = 0; di < dirs.size(); ++di) {
      if (!wildcard && !present[di]) continue;
      try {
        const AnchoredChord ch = anchor_chord(dom, z, dirs[di]);
        const Trace1dResult tr = trace_on_chord(ch, u, dirs[di], topts);
        wit.values.push_back({static_cast<int>(di), tr.at_beta});
      } catch (const AnchorFailure&) {
        ++anchor_failures;
      }
    }
    if (wit.values.size() < 2) continue;
    ++rep.multi_clusters;
    double lo = wit.values.front().second, hi = lo;
    for (const auto& [_, v] : wit.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    wit.spread = hi - lo;
    rep.witnesses.push_back(std::move(wit));
  }

  std::sort(rep.witnesses.begin(), rep.witnesses.end(),
            [](const ConsistencyWitness& a, const ConsistencyWitness& b) {
              return a.spread > b.spread;
            });
  rep.consistent = true;
  for (const ConsistencyWitness& w : rep.witnesses)
    if (w.spread > tol) rep.consistent = false;
  rep.no_shared_support = rep.multi_clusters == 0;
  if (rep.no_shared_support)
    rep.notes.push_back("NoSharedSupport: directions share no boundary probes");
  if (anchor_failures > 0)
    rep.notes.push_back("anchor_failures=" + std::to_string(anchor_failures));
  if (rep.witnesses.size() > 8) rep.witnesses.resize(8);
  return rep;
}

// ---------------------------------------------------------------------------
// Randomized 1-d lemma

VerificationReport check_1d_lemma(int n, std::uint64_t seed) {
  VerificationReport rep;
  rep.name = "1d_lemma";
  rep.domain_id = "interval";
  rep.seed = seed;
  rep.tolerance = 1e-8;

  const CounterRng rng = CounterRng::from_seed(seed, "check_1d_lemma");
  long violations = 0;
  double worst = 0.0;
  auto note_fail = [&](int trial, const std::string& what, double margin) {
    ++violations;
    worst = std::max(worst, margin);
    if (rep.notes.size() < 12)
      rep.notes.push_back("trial " + std::to_string(trial) + ": " + what +
                          " margin=" + std::to_string(margin));
  };

  for (int trial = 0; trial < n; ++trial) {
    const std::uint64_t base = static_cast<std::uint64_t>(trial) * 16;
    double c[6];
    for (int k = 0; k < 6; ++k) c[k] = rng.uniform(base + static_cast<std::uint64_t>(k), -1.0, 1.0);
    const double amp = rng.uniform(base + 6, 0.0, 1.0);
    const double freq = rng.uniform(base + 7, 0.5, 3.0);
    const double phase = rng.uniform(base + 8, 0.0, 6.283185307179586);
    const double alpha = rng.uniform(base + 9, -1.0, 1.0);
    const double L = rng.uniform(base + 10, 0.3, 2.5);
    const double beta = alpha + L;

    auto f = [&](double t) {
      double p = 0.0;
      for (int k = 5; k >= 0; --k) p = p * t + c[k];
      return p + amp * std::sin(freq * t + phase);
    };
    auto df = [&](double t) {
      double p = 0.0;
      for (int k = 5; k >= 1; --k) p = p * t + c[k] * k;
      return p + amp * freq * std::cos(freq * t + phase);
    };

    const double fb = f(beta), fa = f(alpha);
    const Trace1dResult tr = trace_1d(f, df, alpha, beta);
    const double rec_scale = 1.0 + std::abs(fb) + std::abs(fa);
    if (std::abs(tr.at_beta - fb) > 1e-8 * rec_scale)
      note_fail(trial, "endpoint recovery (beta)", std::abs(tr.at_beta - fb) / rec_scale);
    if (std::abs(tr.at_alpha - fa) > 1e-8 * rec_scale)
      note_fail(trial, "endpoint recovery (alpha)", std::abs(tr.at_alpha - fa) / rec_scale);

    const double h1 = integrate_adaptive(
                          [&](double t) {
                            const double v = f(t), d = df(t);
                            return v * v + d * d;
                          },
                          alpha, beta, 1e-13)
                          .value;
    const double d2 = std::max(1.0, L * L);
    const double slack = 1e-9 * (1.0 + h1);
    const double m2 = std::max(fb * fb, fa * fa);
    if (m2 > 2.0 * d2 / L * h1 + slack)
      note_fail(trial, "endpoint bound", m2 - 2.0 * d2 / L * h1);
    const double s2 = (fb + fa) * (fb + fa);
    if (s2 > 4.0 * d2 / L * h1 + slack)
      note_fail(trial, "sum bound", s2 - 4.0 * d2 / L * h1);
    const double q = (fb - fa) / L;
    if (q * q > h1 / L + slack)
      note_fail(trial, "difference quotient bound", q * q - h1 / L);

    // zero-endpoint Poincare: g = f - f(beta)
    const double g_l2 = integrate_adaptive(
                            [&](double t) {
                              const double v = f(t) - fb;
                              return v * v;
                            },
                            alpha, beta, 1e-13)
                            .value;
    const double df_l2 = integrate_adaptive(
                             [&](double t) {
                               const double d = df(t);
                               return d * d;
                             },
                             alpha, beta, 1e-13)
                             .value;
    if (std::sqrt(std::max(0.0, g_l2)) >
        L * std::sqrt(std::max(0.0, df_l2)) + slack)
      note_fail(trial, "zero-endpoint poincare",
                std::sqrt(g_l2) - L * std::sqrt(df_l2));

    // product identity of the +- pair
    const double a = rng.uniform(base + 11, -2.0, 2.0);
    const double b = rng.uniform(base + 12, -2.0, 2.0);
    const double a2 = rng.uniform(base + 13, -2.0, 2.0);
    const double b2 = rng.uniform(base + 14, -2.0, 2.0);
    const double ell = rng.uniform(base + 15, 0.1, 3.0);
    const auto [gu_p, gu_m] = g_plus_minus(a, b, ell);
    const auto [gv_p, gv_m] = g_plus_minus(a2, b2, ell);
    const double lhs_id = gu_p * gv_p - gu_m * gv_m;
    const double rhs_id = (a * a2 - b * b2) / ell;
    const double id_scale = 1.0 + std::abs(lhs_id) + std::abs(rhs_id);
    if (std::abs(lhs_id - rhs_id) > 1e-12 * id_scale)
      note_fail(trial, "product identity", std::abs(lhs_id - rhs_id) / id_scale);
  }

  rep.lhs = worst;
  rep.rhs = 0.0;
  rep.residual = worst;
  rep.scale = 1.0;
  rep.pass = violations == 0;
  rep.notes.insert(rep.notes.begin(),
                   "trials=" + std::to_string(n) +
                       " violations=" + std::to_string(violations));
  return rep;
}

// ---------------------------------------------------------------------------
// Partition sufficiency

namespace {

double box_boundary_dist(const AxisBox& b, const Point& z) {
  const int d = b.dim();
  bool inside = true;
  double out2 = 0.0;
  for (int k = 0; k < d; ++k) {
    if (z[k] < b.lo[k]) {
      inside = false;
      out2 += (b.lo[k] - z[k]) * (b.lo[k] - z[k]);
    } else if (z[k] > b.hi[k]) {
      inside = false;
      out2 += (z[k] - b.hi[k]) * (z[k] - b.hi[k]);
    }
  }
  if (!inside) return std::sqrt(out2);
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < d; ++k)
    m = std::min(m, std::min(z[k] - b.lo[k], b.hi[k] - z[k]));
  return m;
}

double sub_boundary_dist(const DomainModel& sub, const Point& z) {
  double m = std::numeric_limits<double>::infinity();
  for (const AxisBox& b : sub.boxes()) m = std::min(m, box_boundary_dist(b, z));
  return m;
}

}  // namespace

VerificationReport check_sufficiency_partition(const DomainModel& dom,
                                               const std::vector<DomainModel>& subs,
                                               const std::vector<Direction>& dirs,
                                               const PartitionOptions& opts) {
  if (subs.empty()) throw BadParameter("partition check needs subdomains");
  if (dirs.empty()) throw BadParameter("partition check needs directions");
  for (const DomainModel& s : subs)
    if (s.kind() != DomainKind::RectilinearUnion &&
        s.kind() != DomainKind::IntervalUnion)
      throw UnsupportedKind("partition subdomains must be box unions");

  VerificationReport rep;
  rep.name = "partition";
  rep.domain_id = dom.id;
  rep.seed = opts.seed;
  rep.tolerance = opts.shared_tol;

  // interior samples per subdomain: containment in the parent, no overlaps
  std::vector<std::vector<Point>> samples(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const CounterRng rng =
        CounterRng::from_seed(opts.seed, "partition_sub:" + std::to_string(i));
    const AxisBox& bb = subs[i].bounding_box();
    std::uint64_t tries = 0;
    while (samples[i].size() < static_cast<std::size_t>(opts.interior_samples) &&
           tries < 400ull * static_cast<std::uint64_t>(opts.interior_samples)) {
      Point p = rng.point_in_box(tries++, bb.lo, bb.hi);
      if (subs[i].contains(p)) samples[i].push_back(std::move(p));
    }
    if (samples[i].empty())
      throw BadPartition("subdomain " + std::to_string(i) +
                         " produced no interior samples");
    for (const Point& p : samples[i])
      if (!dom.contains(p))
        throw BadPartition("subdomain " + std::to_string(i) +
                           " leaks outside the domain near " + format_point(p));
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    for (std::size_t j = 0; j < subs.size(); ++j) {
      if (i == j) continue;
      for (const Point& p : samples[i])
        if (subs[j].contains(p))
          throw BadPartition("subdomains " + std::to_string(i) + " and " +
                             std::to_string(j) + " overlap near " +
                             format_point(p));
    }

  // exits: coverage and shared-tube mass
  const CounterRng rng = CounterRng::from_seed(opts.seed, "partition_mc");
  const AxisBox& bb = dom.bounding_box();
  const double w = bb.volume() / static_cast<double>(opts.n_mc);
  const double diam = dom.diameter();
  const double t_anchor = 1e-7 * diam;
  long accepted = 0;
  std::vector<double> shared_mass(dirs.size(), 0.0), unc_mass(dirs.size(), 0.0);
  for (long i = 0; i < opts.n_mc; ++i) {
    Point x = rng.point_in_box(static_cast<std::uint64_t>(i), bb.lo, bb.hi);
    if (!dom.contains(x)) continue;
    ++accepted;
    for (std::size_t di = 0; di < dirs.size(); ++di) {
      const ExitRecord er = exit_record(dom, x, dirs[di]);
      const Point xprobe = er.z_plus - t_anchor * dirs[di].vector();
      bool covered = false;
      if (dom.contains(xprobe)) {
        for (const DomainModel& sub : subs) {
          if (!sub.contains(xprobe)) continue;
          const double dsub = delta_theta(sub, xprobe, dirs[di]);
          if (dsub <= 2.0 * t_anchor) covered = true;
          break;  // at most one subdomain holds the probe
        }
      }
      if (!covered) unc_mass[di] += w;
      int near_count = 0;
      for (const DomainModel& sub : subs)
        if (sub_boundary_dist(sub, er.z_plus) <= opts.eps) {
          if (++near_count >= 2) break;
        }
      if (near_count >= 2) shared_mass[di] += w;
    }
  }
  if (accepted == 0) throw DegenerateDomain("partition check found no interior mass");
  const double lambda_est = w * static_cast<double>(accepted);

  double shared_worst = 0.0, unc_worst = 0.0;
  for (std::size_t di = 0; di < dirs.size(); ++di) {
    shared_worst = std::max(shared_worst, shared_mass[di]);
    unc_worst = std::max(unc_worst, unc_mass[di]);
  }
  rep.lhs = shared_worst;
  rep.rhs = opts.shared_tol;
  rep.scale = std::max(lambda_est, 1e-12);
  rep.residual = std::max(0.0, rep.lhs - rep.rhs);
  const bool unc_ok = unc_worst <= opts.uncovered_tol * lambda_est + 4.0 * w;
  rep.pass = rep.lhs <= rep.rhs && unc_ok;
  rep.notes.push_back("lambda_est=" + std::to_string(lambda_est));
  rep.notes.push_back("uncovered_worst=" + std::to_string(unc_worst));
  rep.notes.push_back("shared_worst=" + std::to_string(shared_worst));
  rep.notes.push_back("eps=" + std::to_string(opts.eps));
  return rep;
}

}  // namespace dirtrace
