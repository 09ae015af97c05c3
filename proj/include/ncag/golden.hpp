#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

namespace ncag {

struct ScalarMin {
  double x;
  double fx;
};

/// Golden-section minimization of a unimodal f on [a, b]. Stops once the
/// bracket is narrower than `tol` or after `max_iter` reductions.
template <class F>
ScalarMin golden_section_minimize(F&& f, double a, double b, double tol = 1e-10,
                                  std::size_t max_iter = 200) {
  if (b < a) std::swap(a, b);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (std::size_t it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

}  // namespace ncag
