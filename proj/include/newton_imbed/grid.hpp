#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace newton_imbed {

enum class DomainKind { box, ball };

const char* to_string(DomainKind kind) noexcept;

using Point = std::array<double, 3>;

/// Box [0, L]^n or ball B(center, R). Balls are always discretized through
/// the radially symmetric reduction.
struct DomainSpec {
  DomainKind kind = DomainKind::box;
  int n = 1;
  double extent = 1.0;
  Point center{};

  static DomainSpec box(int n, double side);
  static DomainSpec ball(int n, double radius, Point center = {});

  bool operator==(const DomainSpec&) const = default;
};

/// Uniform node set with homogeneous Dirichlet boundary. Boundary nodes are
/// implicit zeros and never stored.
///
/// Box: `res` interior nodes per axis at x = (i + 1) h, h = L / (res + 1).
/// Ball: `res` radial nodes at r = i h, i = 0 .. res - 1, h = R / res, so that
/// the first boundary node sits at r = R and the origin is an unknown.
class Grid {
 public:
  Grid(DomainSpec domain, int res);

  const DomainSpec& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.n; }
  int res() const noexcept { return res_; }
  double spacing() const noexcept { return h_; }
  bool radial() const noexcept { return domain_.kind == DomainKind::ball; }
  std::size_t size() const noexcept { return size_; }

  /// Box: per-axis index of a flat (row-major, last axis fastest) node index.
  std::array<int, 3> multi_index(std::size_t flat) const;
  /// Box: physical coordinates of a node. Ball: {r, 0, 0}.
  Point node(std::size_t flat) const;
  /// Ball: radius of node i.
  double radius(std::size_t i) const noexcept { return static_cast<double>(i) * h_; }

  /// Quadrature weight of a node: h^n on boxes; on balls the shell measure
  /// omega_{n-1} r^{n-1} h, with the origin carrying the measure that makes
  /// the discrete Laplacian self-adjoint (h for n = 1, pi h^2 / 4 for n = 2,
  /// zero for n = 3).
  double weight(std::size_t flat) const noexcept;

  bool operator==(const Grid&) const = default;

 private:
  DomainSpec domain_;
  int res_;
  double h_;
  std::size_t size_;
};

/// Surface area of the unit sphere in R^n (2, 2 pi, 4 pi for n = 1, 2, 3).
double unit_sphere_area(int n);

/// Scalar values on the interior nodes of a grid.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<double> values);

  static Field sample(const Grid& grid, const std::function<double(const Point&)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_zero() const noexcept;
  bool all_finite() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double scale);

  bool operator==(const Field&) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double scale, Field u);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b);

// Finite-difference calculus ----------------------------------------------

/// Second-order centered Laplacian with zero boundary values. On balls this is
/// u'' + (n - 1) u' / r, replaced at the origin by its limit n u''(0).
Field laplacian(const Field& u);

/// Quadrature-weighted inner product (the same weights as the norms).
double inner(const Field& u, const Field& v);

/// Discrete L^p norm, p in [1, inf]. Pass infinity for the max norm.
double norm_lp(const Field& u, double p);

/// sqrt(|u|_2^2 + sum_i |D_i u|_2^2) with forward differences over every link,
/// including the links to the boundary.
double norm_h1(const Field& u);

/// norm_h1 plus every second centered difference D_ij of the zero extension.
/// On balls the Hessian of a radial function is used: u''^2 + (n-1) (u'/r)^2.
double norm_h2(const Field& u);

// Field dumps --------------------------------------------------------------

/// Header line `n res h kind`, then row-major values with 17 significant digits.
void write_field(const Field& u, const std::string& path);
Field read_field(const std::string& path);

}  // namespace newton_imbed
