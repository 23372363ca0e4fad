#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "igabem/bem_diagnostics.hpp"

namespace igabem {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// Max entry of d[k+1] d[k] over volume and surface complexes (exact integers, so 0 expected).
double complex_defect(const DeRhamComplex& c);
// Largest jump across interfaces of a random coefficient vector's conforming
// part (value for 0-forms, tangential for 1-forms, normal for 2-forms),
// relative to the largest sampled field magnitude.
double conformity_defect(const DiscreteSpace& space, const MultipatchDomain& domain, int samples = 4,
                         unsigned seed = 7);
// Potential of the constant unit density on the unit sphere, obtained by
// solving V0 sigma = <1, .> and evaluating the single layer at x.
double shell_potential(const BoundaryDiscretization& bd, const Mat& V0, const Vec3& x);

std::vector<Check> verify_exactness(int max_level = 2);
std::vector<Check> verify_operators(int max_level = 2);
std::vector<Check> verify_potential();
std::vector<Check> verify_calderon();
// suite: exactness | operators | potential | calderon | all
std::vector<Check> run_verify_suite(const std::string& suite);

// One "PASS|FAIL name value (threshold) detail" line per check; returns true if all pass.
bool print_checks(std::ostream& os, const std::vector<Check>& checks);

}  // namespace igabem
