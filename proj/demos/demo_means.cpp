// Prints the r-mean of a fixed pair, its AG gap, and the quasi-order values
// q(A, B) and q(B, A).

#include <iostream>

#include "ncag/inequalities.hpp"
#include "ncag/quasiorder.hpp"

int main() {
  using namespace ncag;
  const PDMatrix a = PDMatrix::from_rows({{2.0, 1.0}, {1.0, 3.0}});
  const PDMatrix b = PDMatrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});

  for (double r : {0.5, 2.0, 3.0}) {
    const MeanCandidate c(MeanTag::r_mean, r);
    std::cout << "M_" << r << "(A, B) =\n" << r_mean(a, b, r).matrix() << "\n";
    std::cout << "  AG gap (normalized): " << ag_gap(c, a, b).normalized() << "\n";
  }
  std::cout << "q(A, B) = " << q_value(a, b).q << "\n";
  std::cout << "q(B, A) = " << q_value(b, a).q << "\n";
  return 0;
}
