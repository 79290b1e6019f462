#include "dirtrace/domain_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dirtrace/quadrature.hpp"

namespace dirtrace {
namespace {

using nlohmann::json;

json point_to_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point point_from_json(const json& a, int want_dim = -1) {
  if (!a.is_array() || a.empty()) throw IoError("expected a coordinate array");
  Point p(int(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) p[int(i)] = a[i].get<double>();
  if (want_dim > 0 && p.size() != want_dim) throw IoError("coordinate dimension mismatch");
  return p;
}

json slits_to_json(const std::vector<Slit>& slits) {
  json a = json::array();
  for (const auto& s : slits)
    a.push_back({{s.a[0], s.a[1]}, {s.b[0], s.b[1]}});
  return a;
}

std::vector<Slit> slits_from_json(const json& a) {
  std::vector<Slit> out;
  for (const auto& js : a) {
    if (!js.is_array() || js.size() != 2) throw IoError("slit must be a pair of points");
    Point pa = point_from_json(js[0], 2), pb = point_from_json(js[1], 2);
    out.push_back({Eigen::Vector2d(pa[0], pa[1]), Eigen::Vector2d(pb[0], pb[1])});
  }
  return out;
}

json boxes_to_json(const std::vector<AxisBox>& boxes) {
  json a = json::array();
  for (const auto& b : boxes) a.push_back({point_to_json(b.lo), point_to_json(b.hi)});
  return a;
}

std::vector<AxisBox> boxes_from_json(const json& a) {
  std::vector<AxisBox> out;
  for (const auto& jb : a) {
    if (!jb.is_array() || jb.size() != 2) throw IoError("box must be [lo, hi]");
    out.push_back({point_from_json(jb[0]), point_from_json(jb[1])});
  }
  return out;
}

ScalarField field_from_json(const json& jf, int dim) {
  if (jf.is_string()) return parse_field(jf.get<std::string>(), dim);
  if (jf.is_object() && jf.contains("expr")) return parse_field(jf["expr"].get<std::string>(), dim);
  if (jf.is_object() && jf.contains("builtin")) {
    const std::string ref = jf["builtin"].get<std::string>();
    const auto cut = ref.find('/');
    if (cut == std::string::npos) throw IoError("builtin field reference must be entry/key: " + ref);
    GalleryEntry e = gallery::make(ref.substr(0, cut));
    auto it = e.fields.find(ref.substr(cut + 1));
    if (it == e.fields.end()) throw IoError("unknown builtin field: " + ref);
    return it->second;
  }
  throw IoError("field spec must be an expression string or a builtin reference");
}

void append_field_json(json& jf, const std::string& entry_name, const std::string& key,
                       const ScalarField& f) {
  // parse_field ids round-trip as expressions; anything else is a builtin
  try {
    ScalarField probe = parse_field(f.id(), f.dim());
    (void)probe;
    jf[key] = {{"expr", f.id()}};
  } catch (const FieldParseError&) {
    jf[key] = {{"builtin", entry_name + "/" + key}};
  }
}

}  // namespace

json domain_to_json(const DomainModel& dom) {
  json j;
  j["id"] = dom.id;
  const AxisBox bb = dom.bounding_box();
  j["bbox"] = {point_to_json(bb.lo), point_to_json(bb.hi)};
  switch (dom.kind()) {
    case DomainKind::IntervalUnion: {
      j["kind"] = "interval_union";
      json a = json::array();
      for (const auto& iv : dom.intervals()) a.push_back({iv.lo, iv.hi});
      j["intervals"] = a;
      break;
    }
    case DomainKind::RectilinearUnion:
      j["kind"] = "rectilinear_union";
      j["boxes"] = boxes_to_json(dom.boxes());
      j["holes"] = boxes_to_json(dom.holes());
      j["slits"] = slits_to_json(dom.slits());
      break;
    case DomainKind::Polygon: {
      j["kind"] = "polygon";
      json loop = json::array();
      for (const auto& v : dom.loop()) loop.push_back({v[0], v[1]});
      j["loop"] = loop;
      j["slits"] = slits_to_json(dom.slits());
      break;
    }
    case DomainKind::CuspAnalytic:
      j["kind"] = "cusp";
      break;
    case DomainKind::Oracle:
      throw UnsupportedKind("oracle domains have no file representation");
  }
  return j;
}

json entry_to_json(const GalleryEntry& e) {
  json j = domain_to_json(e.domain);
  json jf = json::object();
  for (const auto& [key, f] : e.fields) append_field_json(jf, e.name, key, f);
  j["fields"] = jf;
  json je = json::array();
  for (const auto& q : e.expected)
    je.push_back({{"id", q.id}, {"value", q.value}, {"tol", q.tol}, {"note", q.note}});
  j["expected"] = je;
  if (e.truncation_deficit > 0.0) j["truncation_deficit"] = e.truncation_deficit;
  return j;
}

DomainSpec domain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw IoError("domain spec must carry a kind");
  const std::string kind = j["kind"].get<std::string>();
  DomainSpec spec;
  if (kind == "interval_union") {
    std::vector<Interval> ivs;
    for (const auto& ji : j.at("intervals"))
      ivs.push_back({ji.at(0).get<double>(), ji.at(1).get<double>()});
    spec.domain = DomainModel::interval_union(ivs);
  } else if (kind == "rectilinear_union") {
    spec.domain = DomainModel::rectilinear(
        boxes_from_json(j.at("boxes")),
        j.contains("holes") ? boxes_from_json(j["holes"]) : std::vector<AxisBox>{},
        j.contains("slits") ? slits_from_json(j["slits"]) : std::vector<Slit>{});
  } else if (kind == "polygon") {
    std::vector<Eigen::Vector2d> loop;
    for (const auto& jv : j.at("loop"))
      loop.emplace_back(jv.at(0).get<double>(), jv.at(1).get<double>());
    spec.domain = DomainModel::polygon(
        loop, j.contains("slits") ? slits_from_json(j["slits"]) : std::vector<Slit>{});
  } else if (kind == "cusp") {
    spec.domain = DomainModel::cusp();
  } else {
    throw IoError("unknown domain kind: " + kind);
  }
  if (j.contains("id")) spec.domain.id = j["id"].get<std::string>();
  if (j.contains("fields"))
    for (const auto& [key, jf] : j["fields"].items())
      spec.fields[key] = field_from_json(jf, spec.domain.dim());
  return spec;
}

DomainSpec load_domain(const std::string& path_or_name) {
  {
    std::ifstream in(path_or_name);
    if (in.good()) {
      json j;
      try {
        in >> j;
      } catch (const json::exception& ex) {
        throw IoError("failed to parse " + path_or_name + ": " + ex.what());
      }
      return domain_from_json(j);
    }
  }
  for (const auto& n : gallery::names())
    if (n == path_or_name) {
      GalleryEntry e = gallery::make(path_or_name);
      return {e.domain, e.fields};
    }
  if (path_or_name == "cantor") {  // short name used in command examples
    GalleryEntry e = gallery::cantor_complement();
    return {e.domain, e.fields};
  }
  throw IoError("no such file or gallery entry: " + path_or_name);
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw IoError("failed to parse " + path + ": " + ex.what());
  }
  return j;
}

namespace {

void csv_row(std::ostream& os, const Point& z, double w, const std::string& prov) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", z[0], z.size() > 1 ? z[1] : 0.0, w);
  os << buf << prov << '\n';
}

}  // namespace

std::vector<CsvNode> measure_nodes(const BoundaryMeasure& mu) {
  std::vector<CsvNode> out;
  out.reserve(mu.atoms.size() + 16 * mu.pieces.size());
  for (const auto& a : mu.atoms) out.push_back({a.z, a.weight, a.provenance});
  const QuadRule& gl = gauss_legendre(16);
  for (const auto& p : mu.pieces) {
    // dyadic panels toward both ends on graded pieces, one panel otherwise
    std::vector<double> edges{p.t0};
    if (p.graded) {
      const int levels = 8;
      const double h = p.t1 - p.t0;
      for (int k = levels; k >= 1; --k) edges.push_back(p.t0 + h * std::ldexp(1.0, -k));
      for (int k = 2; k <= levels; ++k) edges.push_back(p.t1 - h * std::ldexp(1.0, -k));
    }
    edges.push_back(p.t1);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = edges[e], b = edges[e + 1], h2 = 0.5 * (b - a), m = 0.5 * (a + b);
      for (int k = 0; k < 16; ++k) {
        const double t = m + h2 * gl.nodes[k];
        out.push_back({p.z(t), h2 * gl.weights[k] * p.w(t),
                       p.edge_id + "@" + std::to_string(e * 16 + k)});
      }
    }
  }
  return out;
}

void write_measure_csv(const BoundaryMeasure& mu, std::ostream& os) {
  os << "x,y,weight,provenance\n";
  for (const auto& n : measure_nodes(mu)) csv_row(os, n.z, n.weight, n.provenance);
}

void write_measure_csv(const BoundaryMeasure& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_measure_csv(mu, out);
  if (!out) throw IoError("write failed: " + path);
}

json densities_to_json(const BoundaryMeasure& mu) {
  json j;
  j["domain"] = mu.domain_id;
  j["theta"] = point_to_json(mu.theta.vector());
  j["mode"] = mu.mode == MeasureMode::Exact ? "exact" : "mc";
  j["total_mass"] = mu.total_mass;
  j["atom_mass"] = mu.atom_mass();
  if (mu.mode == MeasureMode::MonteCarlo) {
    j["seed"] = mu.seed;
    j["samples"] = mu.n_samples;
    j["total_se"] = mu.total_se;
  }
  json pieces = json::array();
  const QuadRule& gl = gauss_legendre(16);
  for (const auto& p : mu.pieces) {
    json jp;
    jp["edge"] = p.edge_id;
    jp["t0"] = p.t0;
    jp["t1"] = p.t1;
    jp["mass"] = p.mass;
    jp["graded"] = p.graded;
    json nodes = json::array(), values = json::array(), points = json::array();
    const double h2 = 0.5 * (p.t1 - p.t0), m = 0.5 * (p.t0 + p.t1);
    for (int k = 0; k < 16; ++k) {
      const double t = m + h2 * gl.nodes[k];
      nodes.push_back(t);
      values.push_back(p.w(t));
      points.push_back(point_to_json(p.z(t)));
    }
    jp["nodes"] = nodes;
    jp["values"] = values;
    jp["points"] = points;
    pieces.push_back(jp);
  }
  j["densities"] = pieces;
  return j;
}

std::vector<CsvNode> read_nodes_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<CsvNode> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("x,", 0) == 0) continue;  // header
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw IoError("bad CSV row: " + line);
    CsvNode n;
    n.z = Point(dim);
    n.z[0] = std::stod(cells[0]);
    if (dim > 1) n.z[1] = std::stod(cells[1]);
    n.weight = std::stod(cells[2]);
    n.provenance = cells[3];
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace dirtrace
