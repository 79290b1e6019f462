#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "dirtrace/geometry.hpp"

namespace dirtrace {

// A scalar field u: R^d -> R together with its gradient.  Fields are always
// evaluated at interior points of a domain; behaviour elsewhere is the
// caller's problem.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::string id, int dim,
              std::function<double(const Point&)> value,
              std::function<Point(const Point&)> gradient);

  double value(const Point& x) const { return value_(x); }
  Point gradient(const Point& x) const { return gradient_(x); }
  // directional derivative theta . grad u
  double du(const Point& x, const Direction& theta) const {
    return theta.dot(gradient_(x));
  }
  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(value_); }

 private:
  std::string id_;
  int dim_ = 0;
  std::function<double(const Point&)> value_;
  std::function<Point(const Point&)> gradient_;
};

// Parse an arithmetic expression in variables x1..x<dim> into a field whose
// gradient is produced by forward-mode differentiation.  Supported: + - * /,
// ^ (right associative), unary minus, parentheses, numeric literals, pi, and
// the functions sin cos tan exp log sqrt abs.  Throws FieldParseError.
ScalarField parse_field(const std::string& expr, int dim);

ScalarField constant_field(double c, int dim);

// Compare the field's gradient against central finite differences at n
// interior points of the domain; returns the worst relative mismatch.
double validate_field_gradient(const ScalarField& u, const DomainModel& dom,
                               int n, std::uint64_t seed);

}  // namespace dirtrace
