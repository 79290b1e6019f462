#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dirtrace/geometry.hpp"

namespace dirtrace::cli {

struct RunConfig {
  std::string subcommand;
  std::string domain;                // spec path or gallery name
  std::vector<std::string> fields;   // expressions or gallery field keys
  std::string thetas;                // raw direction list
  std::string mode = "exact";
  long long samples = 20000;
  std::uint64_t seed = 20260814ull;
  std::string suite = "default";
  std::string out;
  std::string out_density;
  std::string nodes;
  std::string emit;
  std::string name;                  // gallery entry name
  double rho = -1.0;                 // negative = entry default
  int depth = -1;
  double alpha = -1.0;
  int teeth = -1;
  double tol = 1e-8;                 // consistency spread tolerance

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// "30deg"-style angles and bare numbers are degrees in 2-D; "(a,b)" gives raw
// components; 1-D accepts +1/-1.  Items separated by top-level commas.
std::vector<Direction> parse_thetas(const std::string& text, int dim);

// exit codes: 0 ok, 1 failed check or computation, 2 usage, 3 io
int run(int argc, const char* const* argv);

}  // namespace dirtrace::cli
