#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirtrace {

using Point = Eigen::VectorXd;

// Base for everything the library throws on purpose. Subclasses name the
// failure mode so tests and the CLI can react to specific conditions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class PointNotInterior : public Error { using Error::Error; };
class RayUnresolved : public Error { using Error::Error; };
class UnsupportedKind : public Error { using Error::Error; };
class DegenerateDomain : public Error { using Error::Error; };
class NonFiniteIntegrand : public Error { using Error::Error; };
class QuadratureNoConverge : public Error { using Error::Error; };
class ZeroChord : public Error { using Error::Error; };
class AnchorFailure : public Error { using Error::Error; };
class HypothesisViolated : public Error { using Error::Error; };
class BadPartition : public Error { using Error::Error; };
class BadParameter : public Error { using Error::Error; };
class FieldParseError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

// Open interval ]lo,hi[ on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double s) const { return lo < s && s < hi; }
  bool empty() const { return !(lo < hi); }
};

// Neumaier-compensated accumulator; totals over many cells/atoms stay well
// under the 1e-9 relative budget even with ~1e5 summands.
class StableSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::string format_point(const Point& p) {
  std::string s = "(";
  for (int i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace dirtrace
