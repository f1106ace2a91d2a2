#pragma once

// Scalar special functions shared by the kernels and the exponential sums.
// Everything here is header-only and templated on the floating type.

#include <cmath>
#include <limits>
#include <type_traits>

namespace welldist::special {

/// Round to nearest, ties to even, without calling into libm so the loop
/// bodies that use it stay vectorizable. Valid for |x| < 2^(digits-2).
template <typename T>
inline T round_even(T x) {
  static_assert(std::is_floating_point_v<T>);
  constexpr T magic = T(1.5) * T(1ull << (std::numeric_limits<T>::digits - 2)) * T(2);
  return (x + magic) - magic;
}

template <>
inline double round_even<double>(double x) {
  // 1.5 * 2^52
  constexpr double magic = 6755399441055744.0;
  return (x + magic) - magic;
}

/// sin(2*pi*x) and cos(2*pi*x) for an argument given in turns.
/// The reduction x - round(x) is exact, so accuracy does not degrade with |x|
/// beyond the rounding already present in x itself. Odd in x bit-for-bit.
template <typename T>
inline void sincos_turns(T x, T& s, T& c) {
  const T r = x - round_even(x);               // [-1/2, 1/2]
  const T quadrant = round_even(T(4) * r);     // {-2,...,2}
  const T f = r - quadrant * T(0.25);          // [-1/8, 1/8]
  const T a = T(6.283185307179586476925286766559) * f;  // [-pi/4, pi/4]
  const T a2 = a * a;
  // Taylor polynomials; truncation error below 1e-19 on [-pi/4, pi/4].
  T ps = T(1.0 / 121645100408832000.0);        // 1/19!
  ps = ps * -a2 + T(1.0 / 355687428096000.0);  // 1/17!
  ps = ps * -a2 + T(1.0 / 1307674368000.0);
  ps = ps * -a2 + T(1.0 / 6227020800.0);
  ps = ps * -a2 + T(1.0 / 39916800.0);
  ps = ps * -a2 + T(1.0 / 362880.0);
  ps = ps * -a2 + T(1.0 / 5040.0);
  ps = ps * -a2 + T(1.0 / 120.0);
  ps = ps * -a2 + T(1.0 / 6.0);
  ps = ps * -a2 + T(1.0);
  const T sa = a * ps;
  T pc = T(1.0 / 2432902008176640000.0);       // 1/20!
  pc = pc * -a2 + T(1.0 / 6402373705728000.0);
  pc = pc * -a2 + T(1.0 / 20922789888000.0);
  pc = pc * -a2 + T(1.0 / 87178291200.0);
  pc = pc * -a2 + T(1.0 / 479001600.0);
  pc = pc * -a2 + T(1.0 / 3628800.0);
  pc = pc * -a2 + T(1.0 / 40320.0);
  pc = pc * -a2 + T(1.0 / 720.0);
  pc = pc * -a2 + T(1.0 / 24.0);
  pc = pc * -a2 + T(0.5);
  pc = pc * -a2 + T(1.0);
  const T ca = pc;
  // Rotate by k * pi/2, k in {-2,...,2}, with exact small-integer factors
  // instead of branches so the loop vectorizes on every target.
  const T k2 = quadrant * quadrant;
  const T odd = k2 * (T(4) - k2) * T(1.0 / 3.0);  // 1 for k = +-1, else 0
  const T even = (T(1) - odd) * (T(1) - T(0.5) * k2);  // +-1 for even k, else 0
  const T ok = odd * quadrant;
  s = even * sa + ok * ca;
  c = even * ca - ok * sa;
}

// ---------------------------------------------------------------------------
// Bessel functions of the first kind

/// Power series for (x/2)^(-nu) J_nu(x); entire in x, equals 1/Gamma(nu+1)
/// at the origin. Accumulated in long double to contain cancellation.
template <typename T>
inline T bessel_j_scaled_series(T nu, T x, long double inv_gamma) {
  using L = long double;
  const L h2 = L(x) * L(x) / L(4);
  L term = inv_gamma;
  L sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= -h2 / (L(m) * (L(m) + L(nu)));
    sum += term;
    if (std::fabs(term) <= std::numeric_limits<L>::epsilon() * std::fabs(sum) * L(1e-2) &&
        L(m) > L(x)) {
      break;
    }
  }
  return T(sum);
}

template <typename T>
inline T bessel_j_scaled_series(T nu, T x) {
  return bessel_j_scaled_series(nu, x, 1.0L / std::tgamma(static_cast<long double>(nu) + 1.0L));
}

/// Hankel large-argument expansion, summed up to its smallest term.
template <typename T>
inline T bessel_j_asymptotic(T nu, T x) {
  using L = long double;
  const L mu = L(4) * L(nu) * L(nu);
  const L xl = L(x);
  L p = 1;
  L q = 0;
  L a = 1;  // a_k(nu) / x^k
  L prev = std::numeric_limits<L>::infinity();
  for (int k = 1; k < 200; ++k) {
    const L odd = L(2 * k - 1);
    a *= (mu - odd * odd) / (L(8) * L(k) * xl);
    const L mag = std::fabs(a);
    if (mag == L(0)) break;
    if (mag > prev) break;
    prev = mag;
    // P collects even k with sign (-1)^(k/2); Q odd k with (-1)^((k-1)/2).
    const int r = k % 4;
    if (r == 0) p += a;
    else if (r == 2) p -= a;
    else if (r == 1) q += a;
    else q -= a;
    if (mag < std::numeric_limits<L>::epsilon() * L(1e-3)) break;
  }
  const L pi = 3.141592653589793238462643383279502884L;
  const L chi = xl - (L(nu) / L(2) + L(0.25)) * pi;
  return T(std::sqrt(L(2) / (pi * xl)) * (p * std::cos(chi) - q * std::sin(chi)));
}

/// J_nu(x) for x >= 0 with a series/asymptotic switch at `switch_at`.
template <typename T>
inline T bessel_j(T nu, T x, T switch_at = T(12)) {
  if (x <= switch_at) {
    if (x == T(0)) return nu == T(0) ? T(1) : (nu > T(0) ? T(0) : std::numeric_limits<T>::infinity());
    return T(std::pow(static_cast<long double>(x) / 2.0L, static_cast<long double>(nu)) *
             static_cast<long double>(bessel_j_scaled_series(nu, x)));
  }
  return bessel_j_asymptotic(nu, x);
}

/// (x/2)^(-nu) J_nu(x) for x >= 0.
template <typename T>
inline T bessel_j_scaled(T nu, T x, T switch_at = T(12)) {
  if (x <= switch_at) return bessel_j_scaled_series(nu, x);
  return T(static_cast<long double>(bessel_j_asymptotic(nu, x)) /
           std::pow(static_cast<long double>(x) / 2.0L, static_cast<long double>(nu)));
}

}  // namespace welldist::special
