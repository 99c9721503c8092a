#pragma once

#include <cmath>
#include <complex>

// Double-double arithmetic (~31 significant decimal digits) for series
// accumulation where terms grow to ~e^{|z|^2/2} while the sum stays O(1).
// Standard error-free transformations (Dekker/Knuth; two_prod via fma).
// Only the operations the series kernels need are provided.

namespace cpdc::detail {

struct dd {
  double hi = 0.0;
  double lo = 0.0;
};

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// Requires |a| >= |b| (or a == 0).
inline dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline dd dd_from(double a) { return {a, 0.0}; }

inline dd dd_add(dd a, dd b) {
  dd s = two_sum(a.hi, b.hi);
  dd t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd dd_add(dd a, double b) {
  dd s = two_sum(a.hi, b);
  s.lo += a.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd dd_neg(dd a) { return {-a.hi, -a.lo}; }

inline dd dd_sub(dd a, dd b) { return dd_add(a, dd_neg(b)); }

inline dd dd_mul(dd a, dd b) {
  dd p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline dd dd_mul(dd a, double b) {
  dd p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline dd dd_div(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = dd_sub(a, dd_mul(b, q1));
  double q2 = r.hi / b.hi;
  r = dd_sub(r, dd_mul(b, q2));
  double q3 = r.hi / b.hi;
  dd q = quick_two_sum(q1, q2);
  return dd_add(q, q3);
}

inline dd dd_div(dd a, double b) { return dd_div(a, dd_from(b)); }

// Complex double-double. Division is by conjugate; all magnitudes the
// series kernels produce are moderate, so no scaling guards are needed.
struct cdd {
  dd re, im;
};

inline cdd cdd_from(std::complex<double> z) {
  return {dd_from(z.real()), dd_from(z.imag())};
}

inline cdd cdd_from(dd re, dd im) { return {re, im}; }

inline std::complex<double> to_complex(cdd z) {
  return {z.re.hi + z.re.lo, z.im.hi + z.im.lo};
}

inline cdd cdd_add(cdd a, cdd b) {
  return {dd_add(a.re, b.re), dd_add(a.im, b.im)};
}

inline cdd cdd_sub(cdd a, cdd b) {
  return {dd_sub(a.re, b.re), dd_sub(a.im, b.im)};
}

inline cdd cdd_mul(cdd a, cdd b) {
  dd re = dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im));
  dd im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re));
  return {re, im};
}

inline cdd cdd_mul(cdd a, double b) { return {dd_mul(a.re, b), dd_mul(a.im, b)}; }

inline cdd cdd_div(cdd a, cdd b) {
  dd den = dd_add(dd_mul(b.re, b.re), dd_mul(b.im, b.im));
  dd re = dd_add(dd_mul(a.re, b.re), dd_mul(a.im, b.im));
  dd im = dd_sub(dd_mul(a.im, b.re), dd_mul(a.re, b.im));
  return {dd_div(re, den), dd_div(im, den)};
}

inline cdd cdd_div(cdd a, double b) { return {dd_div(a.re, b), dd_div(a.im, b)}; }

inline double cdd_abs_est(cdd a) { return std::hypot(a.re.hi, a.im.hi); }

}  // namespace cpdc::detail
