#pragma once

// Rectangular sampling domain in the z = u + iv plane, per-node fields and
// the discrete Wirtinger calculus used by every other module.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tsforge/io.hpp"

namespace tsforge {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a differential operator cannot form any stencil.
class StencilError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node {
  int i = 0;
  int j = 0;
  friend bool operator==(const Node&, const Node&) = default;
};

/// Node-centred rectangular grid with a per-node activity mask.
///
/// Node (i, j) sits at u = u_min + i*h_u, v = v_min + j*h_v. Storage is
/// row-major with rows of constant v.
class Grid {
 public:
  Grid() = default;

  Grid(double u_min, double u_max, double v_min, double v_max, int n_u, int n_v)
      : u_min_(u_min), u_max_(u_max), v_min_(v_min), v_max_(v_max), n_u_(n_u), n_v_(n_v) {
    if (!(std::isfinite(u_min) && std::isfinite(u_max) && std::isfinite(v_min) &&
          std::isfinite(v_max)))
      throw DomainError("grid bounds must be finite");
    if (!(u_min < u_max)) throw DomainError("grid requires u_min < u_max");
    if (!(v_min < v_max)) throw DomainError("grid requires v_min < v_max");
    if (n_u < 5 || n_v < 5) throw DomainError("grid requires at least 5 nodes per direction");
    mask_.assign(static_cast<std::size_t>(n_u) * static_cast<std::size_t>(n_v), 1);
  }

  /// Grid whose node counts are chosen so that the spacing is as close to
  /// `h` as possible while hitting both endpoints exactly.
  static Grid with_spacing(double u_min, double u_max, double v_min, double v_max, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive");
    const auto count = [h](double a, double b) {
      return static_cast<int>(std::lround((b - a) / h)) + 1;
    };
    return Grid(u_min, u_max, v_min, v_max, std::max(5, count(u_min, u_max)),
                std::max(5, count(v_min, v_max)));
  }

  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  double h_u() const { return (u_max_ - u_min_) / (n_u_ - 1); }
  double h_v() const { return (v_max_ - v_min_) / (n_v_ - 1); }
  double h() const { return std::max(h_u(), h_v()); }
  std::size_t size() const { return mask_.size(); }

  double u(int i) const { return i == n_u_ - 1 ? u_max_ : u_min_ + i * h_u(); }
  double v(int j) const { return j == n_v_ - 1 ? v_max_ : v_min_ + j * h_v(); }
  cplx z(int i, int j) const { return {u(i), v(j)}; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_u_) +
           static_cast<std::size_t>(i);
  }
  Node node(std::size_t k) const {
    return {static_cast<int>(k % static_cast<std::size_t>(n_u_)),
            static_cast<int>(k / static_cast<std::size_t>(n_u_))};
  }
  bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < n_u_ && j < n_v_; }
  bool active(int i, int j) const { return inside(i, j) && mask_[index(i, j)] != 0; }
  bool active(std::size_t k) const { return mask_[k] != 0; }
  void set_active(int i, int j, bool on) { mask_.at(index(i, j)) = on ? 1 : 0; }

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
  }

  /// Node closest to (u, v), clamped to the grid.
  Node nearest(double u, double v) const {
    const int i = static_cast<int>(std::lround((u - u_min_) / h_u()));
    const int j = static_cast<int>(std::lround((v - v_min_) / h_v()));
    return {std::clamp(i, 0, n_u_ - 1), std::clamp(j, 0, n_v_ - 1)};
  }

  bool same_shape(const Grid& o) const {
    return n_u_ == o.n_u_ && n_v_ == o.n_v_ && u_min_ == o.u_min_ && u_max_ == o.u_max_ &&
           v_min_ == o.v_min_ && v_max_ == o.v_max_;
  }

  /// Keeps only nodes whose whole (2k+1)x(2k+1) box lies inside the grid
  /// and is active.
  Grid eroded(int k) const {
    if (k <= 0) return *this;
    // Box erosion is separable: erode along u, then along v. Each line pass
    // keeps a node when its window [c - k, c + k] lies inside the line and
    // holds no inactive node, found from a prefix count.
    const auto pass = [k](std::vector<std::uint8_t>& m, int n_line, int n_other, auto at) {
      std::vector<int> bad(n_line + 1);
      std::vector<std::uint8_t> line(n_line);
      for (int o = 0; o < n_other; ++o) {
        for (int c = 0; c < n_line; ++c) {
          line[c] = m[at(c, o)];
          bad[c + 1] = bad[c] + (line[c] ? 0 : 1);
        }
        for (int c = 0; c < n_line; ++c) {
          const bool inside = c - k >= 0 && c + k < n_line;
          m[at(c, o)] = inside && bad[c + k + 1] - bad[c - k] == 0 ? 1 : 0;
        }
      }
    };
    Grid out = *this;
    const int nu = n_u_;
    pass(out.mask_, n_u_, n_v_, [nu](int c, int o) { return std::size_t(o) * nu + c; });
    pass(out.mask_, n_v_, n_u_, [nu](int c, int o) { return std::size_t(c) * nu + o; });
    return out;
  }

  /// Mask intersection; both grids must share the same geometry.
  Grid intersect(const Grid& o) const {
    if (!same_shape(o)) throw DomainError("grid geometry mismatch");
    Grid out = *this;
    for (std::size_t k = 0; k < mask_.size(); ++k) out.mask_[k] = mask_[k] & o.mask_[k];
    return out;
  }

  const std::vector<std::uint8_t>& mask() const { return mask_; }

 private:
  double u_min_ = 0.0, u_max_ = 1.0, v_min_ = 0.0, v_max_ = 1.0;
  int n_u_ = 0, n_v_ = 0;
  std::vector<std::uint8_t> mask_;
};

/// Value written into masked-out nodes. Operators never read it, so any
/// leak shows up as NaN downstream.
template <class T>
T poison() {
  if constexpr (std::is_same_v<T, cplx>)
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  else
    return std::numeric_limits<T>::quiet_NaN();
}

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Per-node samples on a grid. The field's own mask marks the nodes that
/// carry meaningful values; the rest hold `poison<T>()`.
template <class T>
class Field {
 public:
  using value_type = T;

  Field() = default;
  explicit Field(Grid grid, T fill = T{}) : grid_(std::move(grid)), values_(grid_.size(), fill) {
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (!grid_.active(k)) values_[k] = poison<T>();
  }

  template <class Fn>
  static Field sample(const Grid& grid, Fn&& fn) {
    Field out(grid);
    for (int j = 0; j < grid.n_v(); ++j)
      for (int i = 0; i < grid.n_u(); ++i)
        if (grid.active(i, j)) out.values_[grid.index(i, j)] = static_cast<T>(fn(grid.u(i), grid.v(j)));
    return out;
  }

  const Grid& grid() const { return grid_; }
  bool active(int i, int j) const { return grid_.active(i, j); }
  bool active(std::size_t k) const { return grid_.active(k); }

  T& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const T& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

  /// Shrinks the mask to `m` (which must be a subset geometry-wise) and
  /// poisons the dropped nodes.
  Field restricted(const Grid& m) const {
    Field out = *this;
    out.grid_ = grid_.intersect(m);
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (!out.grid_.active(k)) out.values_[k] = poison<T>();
    return out;
  }

  /// Deactivates a single node.
  void deactivate(std::size_t k) {
    const Node n = grid_.node(k);
    grid_.set_active(n.i, n.j, false);
    values_[k] = poison<T>();
  }

  bool all_finite() const {
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (grid_.active(k) && !is_finite(values_[k])) return false;
    return true;
  }

 private:
  Grid grid_;
  std::vector<T> values_;
};

using ComplexField = Field<cplx>;
using RealField = Field<double>;

/// Applies `fn` node-wise over the intersection of the operands' masks.
template <class Fn, class A, class... Rest>
auto zip_with(Fn&& fn, const Field<A>& a, const Field<Rest>&... rest) {
  using R = std::decay_t<decltype(fn(a[0], rest[0]...))>;
  Grid g = a.grid();
  ((g = g.intersect(rest.grid())), ...);
  Field<R> out(g);
  for (std::size_t k = 0; k < out.size(); ++k)
    if (g.active(k)) out[k] = fn(a[k], rest[k]...);
  return out;
}

template <class Fn, class A>
auto transform(const Field<A>& a, Fn&& fn) {
  return zip_with(std::forward<Fn>(fn), a);
}

inline ComplexField to_complex(const RealField& f) {
  return transform(f, [](double x) { return cplx{x, 0.0}; });
}
inline RealField real_part(const ComplexField& f) {
  return transform(f, [](const cplx& z) { return z.real(); });
}
inline RealField imag_part(const ComplexField& f) {
  return transform(f, [](const cplx& z) { return z.imag(); });
}
inline RealField modulus(const ComplexField& f) {
  return transform(f, [](const cplx& z) { return std::abs(z); });
}
inline ComplexField conj(const ComplexField& f) {
  return transform(f, [](const cplx& z) { return std::conj(z); });
}

/// Largest |value| over active nodes (0 for an empty field).
template <class T>
double max_abs(const Field<T>& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.active(k)) m = std::max(m, static_cast<double>(std::abs(f[k])));
  return m;
}

template <class T>
double min_abs(const Field<T>& f) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.active(k)) m = std::min(m, static_cast<double>(std::abs(f[k])));
  return m;
}

namespace detail {

// Second-order first derivative at position k of a line of n samples.
template <class T, class Get, class Ok>
std::optional<T> first_derivative(int k, int n, double h, Get&& get, Ok&& ok) {
  const auto on = [&](int m) { return m >= 0 && m < n && ok(m); };
  if (on(k - 1) && on(k + 1)) return (get(k + 1) - get(k - 1)) / (2.0 * h);
  if (on(k + 1) && on(k + 2)) return (-3.0 * get(k) + 4.0 * get(k + 1) - get(k + 2)) / (2.0 * h);
  if (on(k - 1) && on(k - 2)) return (3.0 * get(k) - 4.0 * get(k - 1) + get(k - 2)) / (2.0 * h);
  return std::nullopt;
}

// Second-order second derivative; one-sided variant needs four nodes.
template <class T, class Get, class Ok>
std::optional<T> second_derivative(int k, int n, double h, Get&& get, Ok&& ok) {
  const auto on = [&](int m) { return m >= 0 && m < n && ok(m); };
  const double h2 = h * h;
  if (on(k - 1) && on(k + 1)) return (get(k + 1) - 2.0 * get(k) + get(k - 1)) / h2;
  if (on(k + 1) && on(k + 2) && on(k + 3))
    return (2.0 * get(k) - 5.0 * get(k + 1) + 4.0 * get(k + 2) - get(k + 3)) / h2;
  if (on(k - 1) && on(k - 2) && on(k - 3))
    return (2.0 * get(k) - 5.0 * get(k - 1) + 4.0 * get(k - 2) - get(k - 3)) / h2;
  return std::nullopt;
}

enum class Axis { u, v };

template <class T, bool Second>
Field<T> partial(const Field<T>& f, Axis axis) {
  const Grid& g = f.grid();
  if (g.active_count() == 0) throw StencilError("differential operator applied to empty field");
  Grid out_mask = g;
  Field<T> out(g);
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i) {
      if (!g.active(i, j)) continue;
      std::optional<T> d;
      if (axis == Axis::u) {
        auto get = [&](int m) { return f(m, j); };
        auto ok = [&](int m) { return g.active(m, j); };
        d = Second ? second_derivative<T>(i, g.n_u(), g.h_u(), get, ok)
                   : first_derivative<T>(i, g.n_u(), g.h_u(), get, ok);
      } else {
        auto get = [&](int m) { return f(i, m); };
        auto ok = [&](int m) { return g.active(i, m); };
        d = Second ? second_derivative<T>(j, g.n_v(), g.h_v(), get, ok)
                   : first_derivative<T>(j, g.n_v(), g.h_v(), get, ok);
      }
      if (d) {
        out(i, j) = *d;
      } else {
        out_mask.set_active(i, j, false);
      }
    }
  if (out_mask.active_count() == 0)
    throw StencilError("active region too thin for a second-order stencil");
  return out.restricted(out_mask);
}

}  // namespace detail

template <class T>
Field<T> partial_u(const Field<T>& f) { return detail::partial<T, false>(f, detail::Axis::u); }
template <class T>
Field<T> partial_v(const Field<T>& f) { return detail::partial<T, false>(f, detail::Axis::v); }
template <class T>
Field<T> partial_uu(const Field<T>& f) { return detail::partial<T, true>(f, detail::Axis::u); }
template <class T>
Field<T> partial_vv(const Field<T>& f) { return detail::partial<T, true>(f, detail::Axis::v); }

/// ∂_z = ½(∂_u − i∂_v).
inline ComplexField wirtinger_dz(const ComplexField& f) {
  return zip_with([](const cplx& a, const cplx& b) { return 0.5 * (a - I * b); }, partial_u(f),
                  partial_v(f));
}

/// ∂_z̄ = ½(∂_u + i∂_v).
inline ComplexField wirtinger_dzbar(const ComplexField& f) {
  return zip_with([](const cplx& a, const cplx& b) { return 0.5 * (a + I * b); }, partial_u(f),
                  partial_v(f));
}

/// ∂_z∂_z̄ = ¼(∂_uu + ∂_vv).
inline ComplexField mixed_dz_dzbar(const ComplexField& f) {
  return zip_with([](const cplx& a, const cplx& b) { return 0.25 * (a + b); }, partial_uu(f),
                  partial_vv(f));
}

inline RealField quarter_laplacian(const RealField& f) {
  return zip_with([](double a, double b) { return 0.25 * (a + b); }, partial_uu(f), partial_vv(f));
}

/// Writes `index,u,v,re,im` rows for every active node.
inline void write_field_csv(const ComplexField& f, const std::string& path) {
  std::ostringstream out;
  out << "index,u,v,re,im\n" << std::setprecision(17);
  const Grid& g = f.grid();
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i)
      if (g.active(i, j))
        out << g.index(i, j) << ',' << g.u(i) << ',' << g.v(j) << ',' << f(i, j).real() << ','
            << f(i, j).imag() << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace tsforge
