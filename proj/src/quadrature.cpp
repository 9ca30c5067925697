// Adaptive Gauss-Kronrod (G7/K15) with QUADPACK-style error estimates.

#include "mmd2d/quadrature.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

namespace mmd2d {
namespace {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  double floor;  // roundoff level of the error estimate
};

struct ByError {
  bool operator()(const Segment& x, const Segment& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;  // deterministic tie break
  }
};

Segment kronrod15(const Integrand& g, double a, double b) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kUflow = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double floor = resabs > kUflow / (50.0 * kEps) ? 50.0 * kEps * resabs : 0.0;
  err = std::max(floor, err);
  if (!std::isfinite(result)) err = std::numeric_limits<double>::infinity();
  return {a, b, result, err, floor};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& options,
                           std::span<const double> breakpoints) {
  QuadratureResult out;
  if (a == b) return out;
  if (b < a) {
    out = integrate(f, b, a, options, breakpoints);
    out.value = -out.value;
    return out;
  }

  int evaluations = 0;
  const bool infinite = std::isinf(b);
  const double scale = options.scale > 0.0 ? options.scale : 1.0;

  // Integrand in the working variable; for [a, inf) this is s in [0, 1).
  Integrand g;
  double lo = a;
  double hi = b;
  std::vector<double> cuts;
  if (infinite) {
    lo = 0.0;
    hi = 1.0;
    g = [&f, a, scale, &evaluations](double s) {
      ++evaluations;
      const double one_minus = 1.0 - s;
      // A node that rounds onto s = 1 is the point at infinity.
      if (one_minus <= 0.0) return 0.0;
      const double x = a + scale * s / one_minus;
      return f(x) * scale / (one_minus * one_minus);
    };
    for (double x : breakpoints) {
      if (x > a && std::isfinite(x)) cuts.push_back((x - a) / (x - a + scale));
    }
  } else {
    g = [&f, &evaluations](double x) {
      ++evaluations;
      return f(x);
    };
    for (double x : breakpoints) {
      if (x > a && x < b) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  double left = lo;
  for (double c : cuts) {
    if (c > left && c < hi) {
      heap.push(kronrod15(g, left, c));
      left = c;
    }
  }
  heap.push(kronrod15(g, left, hi));

  auto totals = [&heap]() {
    // Sum in a fixed order so the result does not depend on heap layout.
    std::vector<Segment> all;
    auto copy = heap;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    double value = 0.0;
    double error = 0.0;
    double floor = 0.0;
    for (const auto& s : all) {
      value += s.value;
      error += s.error;
      floor += s.floor;
    }
    return std::tuple{value, error, floor};
  };
  // A tolerance below the summed roundoff floor cannot be met by splitting;
  // accept once every segment is at its floor.
  auto done = [&options](double value, double error, double floor) {
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
    return error <= target || error <= floor * (1.0 + 1e-12);
  };

  auto [value, error, floor] = totals();
  bool converged = true;
  int since_resum = 0;
  for (;;) {
    if (done(value, error, floor) || !std::isfinite(error) || ++since_resum == 64) {
      // The running sums drift; confirm against a fresh summation.
      std::tie(value, error, floor) = totals();
      since_resum = 0;
      if (done(value, error, floor)) break;
    }
    if (static_cast<int>(heap.size()) >= options.max_intervals) {
      converged = false;
      break;
    }
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    // Interval too small to split further in floating point.
    if (!(mid > worst.a && mid < worst.b)) {
      converged = false;
      break;
    }
    heap.pop();
    const Segment s1 = kronrod15(g, worst.a, mid);
    const Segment s2 = kronrod15(g, mid, worst.b);
    heap.push(s1);
    heap.push(s2);
    value += s1.value + s2.value - worst.value;
    error += s1.error + s2.error - worst.error;
    floor += s1.floor + s2.floor - worst.floor;
  }
  const auto [v, e, ignored] = totals();
  (void)ignored;
  out.value = v;
  out.abs_error_estimate = e;
  out.evaluations = evaluations;
  out.converged = converged && std::isfinite(v);
  return out;
}

}  // namespace mmd2d
