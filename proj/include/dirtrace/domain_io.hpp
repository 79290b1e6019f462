#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirtrace/gallery.hpp"
#include "dirtrace/measure.hpp"

namespace dirtrace {

// Domain plus named fields, as carried by a spec file.
struct DomainSpec {
  DomainModel domain;
  std::map<std::string, ScalarField> fields;
};

nlohmann::json domain_to_json(const DomainModel& dom);
// domain + field expressions (+ expected-value table, informational)
nlohmann::json entry_to_json(const GalleryEntry& e);
DomainSpec domain_from_json(const nlohmann::json& j);

// Accepts a path to a spec JSON or a gallery entry name.
DomainSpec load_domain(const std::string& path_or_name);

void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

struct CsvNode {
  Point z;
  double weight = 0.0;
  std::string provenance;
};

// Atoms plus 16-node Gauss-Legendre rows per density piece (dyadic panels on
// graded pieces), so the weight column still sums to the total mass up to
// quadrature error.
std::vector<CsvNode> measure_nodes(const BoundaryMeasure& mu);

// measure_nodes laid out as CSV with columns x,y,weight,provenance.
void write_measure_csv(const BoundaryMeasure& mu, std::ostream& os);
void write_measure_csv(const BoundaryMeasure& mu, const std::string& path);
nlohmann::json densities_to_json(const BoundaryMeasure& mu);

std::vector<CsvNode> read_nodes_csv(const std::string& path, int dim);

}  // namespace dirtrace
