#pragma once

// Truncated Taylor arithmetic. A Jet<T, N> holds c[k] = f^(k)(t0) / k!
// for k = 0..N and propagates them exactly through + - * / sqrt exp.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace kgvac {

template <class T, int N>
struct Jet {
  static_assert(N >= 0);
  std::array<T, N + 1> c{};

  static constexpr int order = N;

  constexpr Jet() = default;
  constexpr Jet(T value) { c[0] = value; }  // NOLINT: implicit constant

  static constexpr Jet variable(T t0) {
    Jet j(t0);
    if constexpr (N >= 1) j.c[1] = T(1);
    return j;
  }

  constexpr T value() const { return c[0]; }

  /// k-th derivative at the expansion point.
  constexpr T deriv(int k) const {
    T out = c[k];
    for (int i = 2; i <= k; ++i) out *= T(i);
    return out;
  }

  /// Jet of the time-derivative (one order lower).
  constexpr Jet<T, (N > 0 ? N - 1 : 0)> derivative() const {
    Jet<T, (N > 0 ? N - 1 : 0)> d;
    for (int k = 0; k < N; ++k) d.c[k] = T(k + 1) * c[k + 1];
    return d;
  }

  /// Jet of the antiderivative whose value at the expansion point is `v0`.
  constexpr Jet<T, N + 1> integral(T v0) const {
    Jet<T, N + 1> r;
    r.c[0] = v0;
    for (int k = 0; k <= N; ++k) r.c[k + 1] = c[k] / T(k + 1);
    return r;
  }

  template <int M>
  constexpr Jet<T, M> truncate() const {
    static_assert(M <= N);
    Jet<T, M> r;
    for (int k = 0; k <= M; ++k) r.c[k] = c[k];
    return r;
  }

  constexpr Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  constexpr Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  constexpr Jet& operator*=(T s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <class T, int N>
constexpr Jet<T, N> operator+(Jet<T, N> a, const Jet<T, N>& b) {
  return a += b;
}
template <class T, int N>
constexpr Jet<T, N> operator-(Jet<T, N> a, const Jet<T, N>& b) {
  return a -= b;
}
template <class T, int N>
constexpr Jet<T, N> operator-(Jet<T, N> a) {
  for (auto& v : a.c) v = -v;
  return a;
}
template <class T, int N>
constexpr Jet<T, N> operator+(Jet<T, N> a, T s) {
  a.c[0] += s;
  return a;
}
template <class T, int N>
constexpr Jet<T, N> operator+(T s, Jet<T, N> a) {
  a.c[0] += s;
  return a;
}
template <class T, int N>
constexpr Jet<T, N> operator-(Jet<T, N> a, T s) {
  a.c[0] -= s;
  return a;
}
template <class T, int N>
constexpr Jet<T, N> operator-(T s, const Jet<T, N>& a) {
  Jet<T, N> r = -a;
  r.c[0] += s;
  return r;
}
template <class T, int N>
constexpr Jet<T, N> operator*(Jet<T, N> a, T s) {
  return a *= s;
}
template <class T, int N>
constexpr Jet<T, N> operator*(T s, Jet<T, N> a) {
  return a *= s;
}
template <class T, int N>
constexpr Jet<T, N> operator/(Jet<T, N> a, T s) {
  for (auto& v : a.c) v /= s;
  return a;
}

template <class T, int N>
constexpr Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

template <class T, int N>
constexpr Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  for (int k = 0; k <= N; ++k) {
    T acc = a.c[k];
    for (int j = 0; j < k; ++j) acc -= r.c[j] * b.c[k - j];
    r.c[k] = acc / b.c[0];
  }
  return r;
}

template <class T, int N>
constexpr Jet<T, N> operator/(T s, const Jet<T, N>& b) {
  return Jet<T, N>(s) / b;
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& a) {
  using std::sqrt;
  Jet<T, N> r;
  r.c[0] = sqrt(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T acc = a.c[k];
    for (int j = 1; j < k; ++j) acc -= r.c[j] * r.c[k - j];
    r.c[k] = acc / (T(2) * r.c[0]);
  }
  return r;
}

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
  using std::exp;
  Jet<T, N> r;
  r.c[0] = exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T acc{};
    for (int j = 1; j <= k; ++j) acc += T(j) * a.c[j] * r.c[k - j];
    r.c[k] = acc / T(k);
  }
  return r;
}

/// Promote a real jet to a complex one.
template <int N>
Jet<std::complex<double>, N> complexify(const Jet<double, N>& a) {
  Jet<std::complex<double>, N> r;
  for (int k = 0; k <= N; ++k) r.c[k] = a.c[k];
  return r;
}

}  // namespace kgvac
