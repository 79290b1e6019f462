#include "dirtrace/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dirtrace/domain_io.hpp"
#include "dirtrace/measure.hpp"
#include "dirtrace/trace.hpp"
#include "dirtrace/verify.hpp"

namespace dirtrace::cli {
namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double parse_number(const std::string& s) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw BadParameter("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw BadParameter("trailing characters in number: '" + s + "'");
  return v;
}

std::string fmt_theta(const Direction& th) {
  char buf[80];
  if (th.dim() == 1) return th[0] > 0 ? "+1" : "-1";
  std::snprintf(buf, sizeof buf, "(%.10g,%.10g)", th[0], th[1]);
  return buf;
}

ScalarField resolve_field(const std::string& text, const DomainSpec& spec) {
  auto it = spec.fields.find(text);
  if (it != spec.fields.end()) return it->second;
  return parse_field(text, spec.domain.dim());
}

GalleryEntry entry_from_config(const RunConfig& cfg) {
  const std::string& n = cfg.name;
  const double rho = cfg.rho;
  const int depth = cfg.depth;
  if (n == "square") return gallery::square();
  if (n == "lshape") return gallery::lshape();
  if (n == "cantor" || n == "cantor_complement")
    return gallery::cantor_complement(rho < 0 ? 1.0 / 3.0 : rho, depth < 0 ? 12 : depth);
  if (n == "cusp") return gallery::cusp(cfg.alpha < 0 ? 0.75 : cfg.alpha);
  if (n == "disconnected_1d") return gallery::disconnected_1d();
  if (n == "slit_square") return gallery::slit_square();
  if (n == "cantor_disc") return gallery::cantor_disc(depth < 0 ? 14 : depth);
  if (n == "bicantor") return gallery::bicantor(rho < 0 ? 0.3 : rho, depth < 0 ? 8 : depth);
  if (n == "serpent") return gallery::serpent(depth < 0 ? 64 : depth);
  throw BadParameter("unknown gallery entry: " + n);
}

int do_gallery(const RunConfig& cfg) {
  GalleryEntry e = entry_from_config(cfg);
  save_json(entry_to_json(e), cfg.emit);
  std::printf("gallery %s -> %s\n", e.name.c_str(), cfg.emit.c_str());
  return 0;
}

int do_measure(const RunConfig& cfg) {
  DomainSpec spec = load_domain(cfg.domain);
  auto dirs = parse_thetas(cfg.thetas, spec.domain.dim());
  if (dirs.size() != 1) throw BadParameter("measure expects exactly one --theta");
  BoundaryMeasure mu =
      cfg.mode == "exact"
          ? mu_exact(spec.domain, dirs[0])
          : mu_monte_carlo(spec.domain, dirs[0], std::size_t(cfg.samples), cfg.seed);
  write_measure_csv(mu, cfg.out);
  if (!cfg.out_density.empty()) save_json(densities_to_json(mu), cfg.out_density);
  std::printf("measure %s theta=%s mode=%s total_mass=%.12g atoms=%zu pieces=%zu -> %s\n",
              spec.domain.id.c_str(), fmt_theta(dirs[0]).c_str(), cfg.mode.c_str(),
              mu.total_mass, mu.atoms.size(), mu.pieces.size(), cfg.out.c_str());
  return 0;
}

int do_trace(const RunConfig& cfg) {
  DomainSpec spec = load_domain(cfg.domain);
  auto dirs = parse_thetas(cfg.thetas, spec.domain.dim());
  if (dirs.size() != 1) throw BadParameter("trace expects exactly one --theta");
  if (cfg.fields.empty()) throw BadParameter("trace needs a --field");
  ScalarField u = resolve_field(cfg.fields[0], spec);

  std::vector<CsvNode> nodes;
  if (!cfg.nodes.empty()) {
    nodes = read_nodes_csv(cfg.nodes, spec.domain.dim());
  } else {
    nodes = measure_nodes(mu_exact(spec.domain, dirs[0]));
  }

  const TraceOptions topts{};
  std::ofstream out(cfg.out);
  if (!out) throw IoError("cannot open for writing: " + cfg.out);
  out << "x,y,weight,provenance,value,partner_value,chord,quad_error\n";
  std::size_t failures = 0;
  const double nan = std::nan("");
  for (const auto& n : nodes) {
    char buf[256];
    try {
      const AnchoredChord ch = anchor_chord(spec.domain, n.z, dirs[0]);
      const Trace1dResult tr = trace_on_chord(ch, u, dirs[0], topts);
      TraceSample s{ch.z_plus, ch.z_minus, tr.at_beta, tr.at_alpha, ch.chord, tr.error};
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.3g",
                    n.z[0], spec.domain.dim() > 1 ? n.z[1] : 0.0, n.weight,
                    n.provenance.c_str(), s.value, s.partner_value, s.chord, s.error);
    } catch (const AnchorFailure&) {
      ++failures;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s+anchor_failed,%g,%g,%g,%g",
                    n.z[0], spec.domain.dim() > 1 ? n.z[1] : 0.0, n.weight,
                    n.provenance.c_str(), nan, nan, nan, nan);
    }
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + cfg.out);
  std::printf("trace %s field=%s theta=%s nodes=%zu anchor_failures=%zu -> %s\n",
              spec.domain.id.c_str(), u.id().c_str(), fmt_theta(dirs[0]).c_str(), nodes.size(),
              failures, cfg.out.c_str());
  return failures == 0 ? 0 : 1;
}

VerificationReport wrap_consistency(const ConsistencyReport& c, const ScalarField& u, double tol) {
  VerificationReport r;
  r.name = "consistency";
  r.domain_id = c.domain_id;
  r.field_u = u.id();
  double spread = 0.0;
  for (const auto& w : c.witnesses) spread = std::max(spread, w.spread);
  r.lhs = spread;
  r.rhs = tol;
  r.residual = std::max(0.0, spread - tol);
  r.scale = 1.0;
  r.tolerance = tol;
  r.error_budget = 0.0;
  r.pass = c.consistent;
  r.notes = c.notes;
  char buf[128];
  std::snprintf(buf, sizeof buf, "clusters=%zu multi=%zu", std::size_t(c.clusters),
                std::size_t(c.multi_clusters));
  r.notes.push_back(buf);
  for (const auto& w : c.witnesses) {
    std::string s = "witness z=(";
    for (std::size_t i = 0; i < w.z.size(); ++i) {
      if (i) s += ",";
      std::snprintf(buf, sizeof buf, "%.12g", w.z[i]);
      s += buf;
    }
    s += ") values=[";
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      if (i) s += ",";
      std::snprintf(buf, sizeof buf, "%.12g", w.values[i].second);
      s += buf;
    }
    std::snprintf(buf, sizeof buf, "] spread=%.12g", w.spread);
    s += buf;
    r.notes.push_back(s);
  }
  return r;
}

int do_verify(const RunConfig& cfg) {
  DomainSpec spec = load_domain(cfg.domain);
  auto dirs = parse_thetas(cfg.thetas, spec.domain.dim());
  if (dirs.empty()) throw BadParameter("verify needs at least one direction");

  ScalarField u, v;
  if (!cfg.fields.empty()) {
    u = resolve_field(cfg.fields[0], spec);
    v = cfg.fields.size() > 1 ? resolve_field(cfg.fields[1], spec) : u;
  } else {
    auto iu = spec.fields.find("u");
    if (iu == spec.fields.end() && !spec.fields.empty()) iu = spec.fields.begin();
    if (iu == spec.fields.end()) throw BadParameter("no --field given and the domain spec has none");
    u = iu->second;
    auto iv = spec.fields.find("v");
    v = iv == spec.fields.end() ? u : iv->second;
  }

  const bool want_green = cfg.suite == "default" || cfg.suite == "green";
  const bool want_bounds = cfg.suite == "default" || cfg.suite == "bounds";
  const bool want_cons =
      cfg.suite == "consistency" || (cfg.suite == "default" && dirs.size() >= 2);

  std::vector<VerificationReport> reports;
  for (const auto& th : dirs) {
    BoundaryMeasure mu = mu_exact(spec.domain, th);
    if (want_green) reports.push_back(check_green(spec.domain, u, v, th, mu, GreenOptions{}));
    if (want_bounds) {
      auto three = check_all_bounds(spec.domain, u, th, mu, BoundOptions{});
      for (auto& r : three) reports.push_back(std::move(r));
    }
  }
  if (want_cons) {
    if (dirs.size() < 2) throw BadParameter("consistency needs at least two directions");
    ConsistencyReport c = check_consistency(spec.domain, u, dirs, cfg.tol);
    reports.push_back(wrap_consistency(c, u, cfg.tol));
  }

  json arr = json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    arr.push_back(r.to_json());
    all_pass = all_pass && r.pass;
    std::printf("[%s] %-14s domain=%s field=%s lhs=%.9g rhs=%.9g residual=%.3g budget=%.3g\n",
                r.pass ? " ok " : "FAIL", r.name.c_str(), r.domain_id.c_str(),
                r.field_u.c_str(), r.lhs, r.rhs, r.residual, r.error_budget);
  }
  save_json(arr, cfg.out.empty() ? "report.json" : cfg.out);
  return all_pass ? 0 : 1;
}

}  // namespace

json RunConfig::to_json() const {
  return json{{"subcommand", subcommand}, {"domain", domain},   {"fields", fields},
              {"thetas", thetas},         {"mode", mode},       {"samples", samples},
              {"seed", seed},             {"suite", suite},     {"out", out},
              {"out_density", out_density}, {"nodes", nodes},   {"emit", emit},
              {"name", name},             {"rho", rho},         {"depth", depth},
              {"alpha", alpha},           {"teeth", teeth},     {"tol", tol}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.subcommand = j.value("subcommand", "");
  c.domain = j.value("domain", "");
  c.fields = j.value("fields", std::vector<std::string>{});
  c.thetas = j.value("thetas", "");
  c.mode = j.value("mode", "exact");
  c.samples = j.value("samples", 20000ll);
  c.seed = j.value("seed", std::uint64_t(20260814ull));
  c.suite = j.value("suite", "default");
  c.out = j.value("out", "");
  c.out_density = j.value("out_density", "");
  c.nodes = j.value("nodes", "");
  c.emit = j.value("emit", "");
  c.name = j.value("name", "");
  c.rho = j.value("rho", -1.0);
  c.depth = j.value("depth", -1);
  c.alpha = j.value("alpha", -1.0);
  c.teeth = j.value("teeth", -1);
  c.tol = j.value("tol", 1e-8);
  return c;
}

std::vector<Direction> parse_thetas(const std::string& text, int dim) {
  std::vector<std::string> items;
  std::string cur;
  int nest = 0;
  for (char ch : text) {
    if (ch == '(') ++nest;
    if (ch == ')') --nest;
    if (ch == ',' && nest == 0) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (nest != 0) throw BadParameter("unbalanced parentheses in theta list");
  items.push_back(cur);

  std::vector<Direction> out;
  for (auto& raw0 : items) {
    const std::string raw = trimmed(raw0);
    if (raw.empty()) throw BadParameter("empty direction in theta list");
    if (raw.front() == '(') {
      if (raw.back() != ')') throw BadParameter("malformed direction: " + raw);
      std::vector<double> comps;
      std::string inner = raw.substr(1, raw.size() - 2), cell;
      std::istringstream is(inner);
      while (std::getline(is, cell, ',')) comps.push_back(parse_number(trimmed(cell)));
      if (int(comps.size()) != dim)
        throw BadParameter("direction has " + std::to_string(comps.size()) +
                           " components for a dim-" + std::to_string(dim) + " domain");
      Point vv(dim);
      for (int i = 0; i < dim; ++i) vv[i] = comps[i];
      out.push_back(Direction(vv));
      continue;
    }
    std::string num = raw;
    bool deg_suffix = false;
    if (num.size() > 3 && num.compare(num.size() - 3, 3, "deg") == 0) {
      deg_suffix = true;
      num = trimmed(num.substr(0, num.size() - 3));
    }
    const double val = parse_number(num);
    if (dim == 1) {
      if (deg_suffix) throw BadParameter("degree angles need a 2-D domain");
      if (val != 1.0 && val != -1.0) throw BadParameter("1-D directions are +1 or -1");
      out.push_back(Direction::axis(1, 0, val > 0 ? +1 : -1));
    } else if (dim == 2) {
      // bare numbers are degrees in 2-D; right angles map to exact axes
      if (std::fmod(val, 90.0) == 0.0) {
        int q = int(std::lround(val / 90.0)) % 4;
        if (q < 0) q += 4;
        const int k = q % 2;
        const int sign = q < 2 ? +1 : -1;
        out.push_back(Direction::axis(2, k, sign));
      } else {
        const double rad = val * std::atan(1.0) / 45.0;
        Point vv(2);
        vv << std::cos(rad), std::sin(rad);
        out.push_back(Direction(vv));
      }
    } else {
      throw BadParameter("bare angles are only defined for 1-D and 2-D domains");
    }
  }
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"directional boundary measures and traces on rough planar domains"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* g = app.add_subcommand("gallery", "export a built-in example domain as a spec file");
  g->add_option("name", cfg.name, "entry name (see --help for the list)")->required();
  g->add_option("--rho", cfg.rho, "Cantor ratio in ]0,1/3]");
  g->add_option("--depth", cfg.depth, "truncation depth / tooth count");
  g->add_option("--alpha", cfg.alpha, "cusp field exponent in ]1/2,1[");
  g->add_option("--emit", cfg.emit, "output spec path")->required();

  auto* m = app.add_subcommand("measure", "build the directional boundary measure");
  m->add_option("--domain", cfg.domain, "spec path or gallery name")->required();
  m->add_option("--theta", cfg.thetas, "direction")->required();
  m->add_option("--mode", cfg.mode)->check(CLI::IsMember({"exact", "mc"}));
  m->add_option("--samples", cfg.samples, "Monte Carlo sample count");
  m->add_option("--seed", cfg.seed);
  m->add_option("--out", cfg.out, "atom/node CSV path")->required();
  m->add_option("--out-density", cfg.out_density, "density JSON path");

  auto* t = app.add_subcommand("trace", "evaluate directional traces at boundary nodes");
  t->add_option("--domain", cfg.domain)->required();
  t->add_option("--field", cfg.fields, "expression or spec field name")->required();
  t->add_option("--theta", cfg.thetas)->required();
  t->add_option("--nodes", cfg.nodes, "node CSV (defaults to the exact measure's nodes)");
  t->add_option("--out", cfg.out)->required();

  auto* v = app.add_subcommand("verify", "run verification suites, write a JSON report");
  v->add_option("--suite", cfg.suite)
      ->check(CLI::IsMember({"default", "green", "bounds", "consistency"}));
  v->add_option("--domain", cfg.domain)->required();
  v->add_option("--field", cfg.fields, "expression or spec field name (repeatable)");
  v->add_option("--thetas", cfg.thetas, "comma-separated directions")->required();
  v->add_option("--out", cfg.out, "report path (default report.json)");
  v->add_option("--seed", cfg.seed);
  v->add_option("--tol", cfg.tol, "consistency spread tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (g->parsed()) {
      cfg.subcommand = "gallery";
      return do_gallery(cfg);
    }
    if (m->parsed()) {
      cfg.subcommand = "measure";
      return do_measure(cfg);
    }
    if (t->parsed()) {
      cfg.subcommand = "trace";
      return do_trace(cfg);
    }
    cfg.subcommand = "verify";
    return do_verify(cfg);
  } catch (const IoError& ex) {
    std::cerr << "io error: " << ex.what() << '\n';
    return 3;
  } catch (const FieldParseError& ex) {
    std::cerr << "usage error: " << ex.what() << '\n';
    return 2;
  } catch (const BadParameter& ex) {
    std::cerr << "usage error: " << ex.what() << '\n';
    return 2;
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}

}  // namespace dirtrace::cli
