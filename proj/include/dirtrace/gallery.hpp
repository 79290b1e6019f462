#pragma once

#include <map>
#include <string>
#include <vector>

#include "dirtrace/field.hpp"
#include "dirtrace/geometry.hpp"

namespace dirtrace {

struct ExpectedQuantity {
  std::string id;
  double value = 0.0;
  double tol = 1e-9;
  std::string note;
};

struct GalleryEntry {
  std::string name;
  DomainModel domain;
  std::map<std::string, ScalarField> fields;
  std::vector<ExpectedQuantity> expected;
  double truncation_deficit = 0.0;  // interior mass omitted by truncation
  std::vector<std::string> notes;
};

const ExpectedQuantity* find_expected(const GalleryEntry& e, const std::string& id);

namespace gallery {

GalleryEntry square();
GalleryEntry lshape();
// union of the intervals removed while hollowing out a rho-Cantor set,
// truncated at the given depth (levels 0..depth)
GalleryEntry cantor_complement(double rho = 1.0 / 3.0, int depth = 12);
// {(x1,x2): 0<x2<1, |x1|<x2^3} with the power field x2^(-alpha)
GalleryEntry cusp(double alpha = 0.75);
GalleryEntry disconnected_1d();
GalleryEntry slit_square();
// 720-gon of radius 2 with the level-(depth+1) remainder intervals of the
// middle-thirds set, centred on the x-axis, removed as slits
GalleryEntry cantor_disc(int depth = 14);
// Cantor-comb of full-height columns over a solid base strip
GalleryEntry bicantor(double rho = 0.3, int depth = 8);
// comb with interleaved teeth and an unbounded-but-H1 staircase field
GalleryEntry serpent(int teeth = 64);

std::vector<std::string> names();
GalleryEntry make(const std::string& name);

}  // namespace gallery
}  // namespace dirtrace
