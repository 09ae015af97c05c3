#pragma once

// The vector-state relation X ">=" Y, meaning <X xi,xi><Y^{-1} xi,xi> >= 1 for
// every unit vector xi, measured through
//
//   q(X, Y) = min_{|xi| = 1} <X xi,xi> <Y^{-1} xi,xi>.
//
// Primary route (t-scan): minimizing t a + b / t over t gives 2 sqrt(ab), and
// the two minimizations commute, so
//
//   q(X, Y) = ( min_{t>0} lambda_min(t X + t^{-1} Y^{-1}) / 2 )^2.
//
// The inner minimizer for the optimal xi is t = sqrt(<Y^{-1}xi,xi>/<X xi,xi>),
// which always lies in [1/sqrt(|X||Y|), sqrt(|X^{-1}||Y^{-1}|)].
// The independent route (sphere) minimizes the product directly over the unit
// sphere by projected gradient from many starts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ncag/golden.hpp"
#include "ncag/parallel.hpp"
#include "ncag/pdcore.hpp"
#include "ncag/random.hpp"

namespace ncag {

struct QuasiOrderOptions {
  double qo_tol = kDefaultQoTol;
  std::size_t grid_points = 96;
  /// Golden-section tolerance in log t.
  double golden_tol = 1e-10;
  /// Grid local minima refined per scan.
  std::size_t max_refine = 8;
  /// |q - 1| below this triggers a rescan at 10x grid density.
  double boundary_band = 1e-6;
  bool sphere_check = true;
  std::size_t sphere_random_starts = 8;
  std::size_t sphere_max_iter = 500;
  double sphere_grad_tol = 1e-10;
  std::uint64_t seed = 0x51f15eedULL;
};

struct QuasiOrderReport {
  double q = 0.0;
  /// NaN when the sphere cross-check is disabled.
  double q_sphere = std::numeric_limits<double>::quiet_NaN();
  UnitVector xi_star = UnitVector(Vector::Ones(1));
  double t_star = 1.0;
  double method_agreement = std::numeric_limits<double>::quiet_NaN();
  bool holds = false;
};

struct TBracket {
  double lo;
  double hi;
};

inline TBracket t_bracket(const PDMatrix& x, const PDMatrix& y) {
  const TBracket b{1.0 / std::sqrt(x.norm() * y.norm()),
                   1.0 / std::sqrt(x.min_eigenvalue() * y.min_eigenvalue())};
  if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo > 0.0) ||
      b.hi < b.lo * (1.0 - 1e-12)) {
    throw ScanBracketFailure("t bracket [" + std::to_string(b.lo) + ", " +
                             std::to_string(b.hi) + "] is degenerate");
  }
  return {b.lo, std::max(b.lo, b.hi)};
}

/// Log-spaced grid over the t bracket.
inline std::vector<double> make_t_grid(const PDMatrix& x, const PDMatrix& y,
                                       std::size_t points = 96) {
  const TBracket b = t_bracket(x, y);
  points = std::max<std::size_t>(points, 2);
  std::vector<double> grid(points);
  const double l0 = std::log(b.lo);
  const double l1 = std::log(b.hi);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(points - 1));
  }
  return grid;
}

struct TScanResult {
  double g_min = 0.0;  // min_t lambda_min(t X + t^{-1} W)
  double t_star = 1.0;
};

namespace detail {

inline double pencil_min(const Matrix& x, const Matrix& w, double t) {
  return lambda_min(t * x + w / t);
}

// Minimizes lambda_min(t X + W / t) over a log-t grid, refining every grid
// local minimum (best `max_refine`) by golden section on its two neighbours.
inline TScanResult scan_pencil(const Matrix& x, const Matrix& w, const std::vector<double>& grid,
                               double golden_tol, std::size_t max_refine) {
  if (grid.empty()) throw ScanBracketFailure("empty t grid");
  const std::size_t n = grid.size();
  std::vector<double> s(n), g(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(grid[k] > 0.0)) throw ScanBracketFailure("t grid must be positive");
    s[k] = std::log(grid[k]);
    g[k] = pencil_min(x, w, grid[k]);
  }
  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < n; ++k) {
    const bool left = k == 0 || g[k] <= g[k - 1];
    const bool right = k + 1 == n || g[k] <= g[k + 1];
    if (left && right) minima.push_back(k);
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
  if (minima.size() > max_refine) minima.resize(max_refine);

  TScanResult best{g[minima.front()], grid[minima.front()]};
  auto f = [&](double sv) { return pencil_min(x, w, std::exp(sv)); };
  for (std::size_t k : minima) {
    const double a = s[k == 0 ? 0 : k - 1];
    const double b = s[k + 1 == n ? n - 1 : k + 1];
    if (b - a <= golden_tol) continue;
    const ScalarMin m = golden_section_minimize(f, a, b, golden_tol);
    if (m.fx < best.g_min) best = {m.fx, std::exp(m.x)};
  }
  return best;
}

struct SphereResult {
  double q;
  Vector xi;
};

// Projected gradient (Barzilai-Borwein steps, Armijo backtracking) on
// log<X v,v> + log<W v,v> over the unit sphere from one start.
inline SphereResult sphere_descent(const Matrix& x, const Matrix& w, Vector v,
                                   std::size_t max_iter, double grad_tol) {
  v.normalize();
  auto eval = [&](const Vector& u, Vector* rg) {
    const Vector xu = x * u;
    const Vector wu = w * u;
    const double a = u.dot(xu);
    const double b = u.dot(wu);
    if (rg) {
      const Vector grad = 2.0 * xu / a + 2.0 * wu / b;
      *rg = grad - grad.dot(u) * u;
    }
    return std::log(a) + std::log(b);
  };
  Vector rg;
  double phi = eval(v, &rg);
  double alpha = 0.5 / std::max(rg.norm(), 1e-300);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double gn2 = rg.squaredNorm();
    if (std::sqrt(gn2) <= grad_tol) break;
    bool accepted = false;
    Vector v_new, rg_new;
    double phi_new = phi;
    double step = alpha;
    for (int bt = 0; bt < 60; ++bt) {
      v_new = (v - step * rg).normalized();
      phi_new = eval(v_new, &rg_new);
      if (phi_new <= phi - 1e-4 * step * gn2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vector sd = v_new - v;
    const Vector yd = rg_new - rg;
    const double sy = std::abs(sd.dot(yd));
    alpha = sy > 0.0 ? std::clamp(sd.squaredNorm() / sy, 1e-10, 1e6) : step * 2.0;
    v = v_new;
    rg = rg_new;
    phi = phi_new;
  }
  return {rayleigh(x, v) * rayleigh(w, v), v};
}

}  // namespace detail

/// Smallest value of lambda_min(t X + (t Y)^{-1}) - 2 over the grid, refined
/// by golden section. Nonnegative iff X ">=" Y.
struct PencilGap {
  double min_gap;
  double t_witness;
};

inline PencilGap pencil_gap_scan(const PDMatrix& x, const PDMatrix& y,
                                  const std::vector<double>& t_grid, double golden_tol = 1e-10,
                                  std::size_t max_refine = 8) {
  require_same_dim(x.dim(), y.dim(), "pencil_gap_scan");
  const Matrix w = y.apply([](double v) { return 1.0 / v; });
  const TScanResult r = detail::scan_pencil(x.matrix(), w, t_grid, golden_tol, max_refine);
  return {r.g_min - 2.0, r.t_star};
}

/// Direct minimization of the vector-state product over the unit sphere,
/// starting from the eigenvectors of X and Y and `random_starts` random vectors.
inline std::pair<double, Vector> q_sphere(const PDMatrix& x, const PDMatrix& y,
                                          const QuasiOrderOptions& opt = {}) {
  require_same_dim(x.dim(), y.dim(), "q_sphere");
  const Index n = x.dim();
  const Matrix w = y.apply([](double v) { return 1.0 / v; });
  std::vector<Vector> starts;
  for (Index i = 0; i < n; ++i) starts.emplace_back(x.eig().eigenvectors.col(i));
  for (Index i = 0; i < n; ++i) starts.emplace_back(y.eig().eigenvectors.col(i));
  Rng rng(opt.seed ^ static_cast<std::uint64_t>(n));
  for (std::size_t k = 0; k < opt.sphere_random_starts; ++k) {
    starts.push_back(sample_unit_vector(n, rng).vector());
  }
  double best = std::numeric_limits<double>::infinity();
  Vector best_v = starts.front();
  for (const Vector& s : starts) {
    const detail::SphereResult r =
        detail::sphere_descent(x.matrix(), w, s, opt.sphere_max_iter, opt.sphere_grad_tol);
    if (r.q < best) {
      best = r.q;
      best_v = r.xi;
    }
  }
  return {best, best_v};
}

inline QuasiOrderReport q_value(const PDMatrix& x, const PDMatrix& y,
                                const QuasiOrderOptions& opt = {}) {
  require_same_dim(x.dim(), y.dim(), "q_value");
  const Matrix w = y.apply([](double v) { return 1.0 / v; });
  std::size_t points = std::max<std::size_t>(opt.grid_points, 64);
  TScanResult scan = detail::scan_pencil(x.matrix(), w, make_t_grid(x, y, points),
                                         opt.golden_tol, opt.max_refine);
  double q = 0.25 * scan.g_min * scan.g_min;
  if (std::abs(q - 1.0) <= opt.boundary_band) {
    scan = detail::scan_pencil(x.matrix(), w, make_t_grid(x, y, 10 * points), opt.golden_tol,
                               opt.max_refine);
    q = 0.25 * scan.g_min * scan.g_min;
  }

  // Any lambda_min eigenvector at the optimal t attains q.
  const EigenDecomp e = sym_eig(symmetrize(scan.t_star * x.matrix() + w / scan.t_star));

  QuasiOrderReport rep;
  rep.q = q;
  rep.xi_star = UnitVector(e.eigenvectors.col(0));
  rep.t_star = scan.t_star;
  rep.holds = q >= 1.0 - opt.qo_tol;
  if (opt.sphere_check) {
    rep.q_sphere = q_sphere(x, y, opt).first;
    rep.method_agreement = std::abs(rep.q - rep.q_sphere);
  }
  return rep;
}

/// Scan-only q, used where the sphere cross-check is not wanted.
inline double q_scan(const PDMatrix& x, const PDMatrix& y, QuasiOrderOptions opt = {}) {
  opt.sphere_check = false;
  return q_value(x, y, opt).q;
}

struct MutualDominance {
  double q_xy;
  double q_yx;
  bool forced_equal;
};

inline MutualDominance mutual_dominance(const PDMatrix& x, const PDMatrix& y,
                                        const QuasiOrderOptions& opt = {}) {
  require_same_dim(x.dim(), y.dim(), "mutual_dominance");
  const double qxy = q_scan(x, y, opt);
  const double qyx = q_scan(y, x, opt);
  return {qxy, qyx, qxy >= 1.0 - opt.qo_tol && qyx >= 1.0 - opt.qo_tol};
}

struct SquaringResult {
  double q1;
  double q2;
  bool consistent;
};

/// X ">=" Y should imply X^2 ">=" Y^2.
inline SquaringResult squaring_check(const PDMatrix& x, const PDMatrix& y,
                                     const QuasiOrderOptions& opt = {}) {
  require_same_dim(x.dim(), y.dim(), "squaring_check");
  const double q1 = q_scan(x, y, opt);
  const double q2 = q_scan(spectral_fn(x, SpectralFn::power(2.0), 0.0),
                           spectral_fn(y, SpectralFn::power(2.0), 0.0), opt);
  return {q1, q2, !(q1 >= 1.0 - opt.qo_tol) || q2 >= 1.0 - opt.qo_tol};
}

/// q(X, Y) >= 1 - qo_tol; the caller supplies X >= Y in the Loewner order.
inline bool loewner_implies_quasi(const PDMatrix& x, const PDMatrix& y,
                                  const QuasiOrderOptions& opt = {}) {
  require_same_dim(x.dim(), y.dim(), "loewner_implies_quasi");
  return q_scan(x, y, opt) >= 1.0 - opt.qo_tol;
}

struct BlockCheck {
  bool block_psd;
  bool schur_psd;
  double block_min;
  double schur_min;
};

/// Positivity of [[A, B], [B, C]] against positivity of A - B C^{-1} B.
/// Both decisions use slack order_tol * max(|A|, |B|, |C|).
inline BlockCheck block_pd_check(const PDMatrix& a, const Matrix& b, const PDMatrix& c,
                                 double order_tol = kDefaultOrderTol) {
  require_same_dim(a.dim(), b.rows(), "block_pd_check");
  require_same_dim(b.rows(), b.cols(), "block_pd_check");
  require_same_dim(c.dim(), b.cols(), "block_pd_check");
  const Index n = a.dim();
  const Matrix bs = symmetrize(b);
  Matrix block(2 * n, 2 * n);
  block << a.matrix(), bs, bs, c.matrix();
  const Matrix c_inv = c.apply([](double v) { return 1.0 / v; });
  const Matrix schur = symmetrize(a.matrix() - bs * c_inv * bs);
  const double scale = std::max({a.norm(), op_norm(bs), c.norm()});
  const double tol = order_tol * scale;
  BlockCheck out;
  out.block_min = lambda_min(block);
  out.schur_min = lambda_min(schur);
  out.block_psd = out.block_min >= -tol;
  out.schur_psd = out.schur_min >= -tol;
  return out;
}

// ---------------------------------------------------------------------------
// Transitivity search

struct TransitivityConfig {
  std::vector<Index> dims{2};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double margin = 1e-4;
  EnsembleKind ensemble = EnsembleKind::wishart;
  double condition_cap = 100.0;
  unsigned workers = 1;
  /// Trials evaluated between witness checks; fixed so results do not depend
  /// on the worker count.
  std::size_t chunk = 4096;
  QuasiOrderOptions q_options{};
};

struct TransitivityWitness {
  std::size_t trial;
  Matrix x, y, w;
  double q_xy, q_yw, q_xw;
};

struct HistogramBin {
  std::string label;
  double lo;
  double hi;
  std::size_t count = 0;
};

struct TransitivityOutcome {
  std::optional<TransitivityWitness> witness;
  std::size_t trials_run = 0;
  double min_q_xw = std::numeric_limits<double>::infinity();
  /// Histogram of q(X, W) - 1 over all evaluated triples.
  std::vector<HistogramBin> histogram;
  std::size_t rejected_on_reverify = 0;
};

inline std::vector<HistogramBin> margin_histogram_bins() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"(-inf,-1e-1)", -inf, -1e-1},  {"[-1e-1,-1e-2)", -1e-1, -1e-2},
          {"[-1e-2,-1e-4)", -1e-2, -1e-4}, {"[-1e-4,1e-4)", -1e-4, 1e-4},
          {"[1e-4,1e-2)", 1e-4, 1e-2},    {"[1e-2,1e-1)", 1e-2, 1e-1},
          {"[1e-1,inf)", 1e-1, inf}};
}

namespace detail {

struct TripleSample {
  PDMatrix x, y, w;
  double q_xy, q_yw, q_xw;
};

// Y is drawn freely; X and W are rescaled draws placed at q(X,Y), q(Y,W) in
// [1 + 2 margin, 1.5 + 2 margin], using q(sX, Y) = s q(X, Y) and
// q(Y, sW) = q(Y, W) / s.
inline TripleSample sample_dominance_chain(const TransitivityConfig& cfg, Index dim, Rng& rng) {
  auto draw3 = [&]() -> std::array<PDMatrix, 3> {
    if (cfg.ensemble == EnsembleKind::commuting_pair) {
      const Matrix q = haar_orthogonal(dim, rng);
      return {PDMatrix::from_spectrum(q, log_uniform_spectrum(dim, cfg.condition_cap, rng)),
              PDMatrix::from_spectrum(q, log_uniform_spectrum(dim, cfg.condition_cap, rng)),
              PDMatrix::from_spectrum(q, log_uniform_spectrum(dim, cfg.condition_cap, rng))};
    }
    return {sample_pd(cfg.ensemble, dim, cfg.condition_cap, rng),
            sample_pd(cfg.ensemble, dim, cfg.condition_cap, rng),
            sample_pd(cfg.ensemble, dim, cfg.condition_cap, rng)};
  };
  auto [x0, y, w0] = draw3();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double target_xy = 1.0 + 2.0 * cfg.margin + 0.5 * std::pow(u(rng), 3.0);
  const double target_yw = 1.0 + 2.0 * cfg.margin + 0.5 * std::pow(u(rng), 3.0);
  QuasiOrderOptions qo = cfg.q_options;
  qo.sphere_check = false;
  const PDMatrix x(x0.matrix() * (target_xy / q_scan(x0, y, qo)));
  const PDMatrix w(w0.matrix() * (q_scan(y, w0, qo) / target_yw));
  const double qxy = q_scan(x, y, qo);
  const double qyw = q_scan(y, w, qo);
  const double qxw = q_scan(x, w, qo);
  return {x, y, w, qxy, qyw, qxw};
}

inline bool violates_transitivity(double qxy, double qyw, double qxw, double margin) {
  return qxy >= 1.0 + margin && qyw >= 1.0 + margin && qxw < 1.0 - margin;
}

}  // namespace detail

/// Re-evaluates a candidate witness at 10x grid density and the sphere oracle.
inline bool reverify_transitivity(const TransitivityWitness& wit, double margin,
                                  QuasiOrderOptions opt = {}) {
  opt.grid_points *= 10;
  opt.sphere_check = true;
  const PDMatrix x(wit.x), y(wit.y), w(wit.w);
  auto q_both = [&](const PDMatrix& a, const PDMatrix& b) {
    const QuasiOrderReport r = q_value(a, b, opt);
    return std::pair{std::min(r.q, r.q_sphere), std::max(r.q, r.q_sphere)};
  };
  const auto xy = q_both(x, y);
  const auto yw = q_both(y, w);
  const auto xw = q_both(x, w);
  // Dominance must hold by both routes, and failure by both routes.
  return xy.first >= 1.0 + margin && yw.first >= 1.0 + margin && xw.second < 1.0 - margin;
}

inline TransitivityOutcome transitivity_search(const TransitivityConfig& cfg) {
  if (cfg.dims.empty()) throw ConfigError("transitivity_search: empty dims");
  TransitivityOutcome out;
  out.histogram = margin_histogram_bins();
  for (std::size_t start = 0; start < cfg.trials && !out.witness; start += cfg.chunk) {
    const std::size_t count = std::min(cfg.chunk, cfg.trials - start);
    auto samples = parallel_map(count, cfg.workers, [&](std::size_t k) {
      const std::size_t i = start + k;
      Rng rng(derive_seed(cfg.seed, "transitivity", i));
      return detail::sample_dominance_chain(cfg, cfg.dims[i % cfg.dims.size()], rng);
    });
    for (std::size_t k = 0; k < count; ++k) {
      const auto& s = samples[k];
      ++out.trials_run;
      out.min_q_xw = std::min(out.min_q_xw, s.q_xw);
      const double m = s.q_xw - 1.0;
      for (auto& bin : out.histogram) {
        if (m >= bin.lo && m < bin.hi) {
          ++bin.count;
          break;
        }
      }
      if (!detail::violates_transitivity(s.q_xy, s.q_yw, s.q_xw, cfg.margin)) continue;
      TransitivityWitness wit{start + k, s.x.matrix(), s.y.matrix(), s.w.matrix(),
                              s.q_xy,    s.q_yw,       s.q_xw};
      if (reverify_transitivity(wit, cfg.margin, cfg.q_options)) {
        out.witness = std::move(wit);
        break;
      }
      ++out.rejected_on_reverify;
    }
  }
  return out;
}

}  // namespace ncag
