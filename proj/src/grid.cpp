#include "newton_imbed/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "newton_imbed/error.hpp"

namespace newton_imbed {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Value of the zero extension at a shifted multi-index.
class BoxView {
 public:
  explicit BoxView(const Field& u) : u_(u), res_(u.grid().res()), n_(u.grid().dim()) {
    stride_ = {1, 1, 1};
    for (int d = n_ - 2; d >= 0; --d) stride_[d] = stride_[d + 1] * static_cast<std::size_t>(res_);
  }

  double at(std::array<int, 3> idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < n_; ++d) {
      if (idx[d] < 0 || idx[d] >= res_) return 0.0;
      flat += static_cast<std::size_t>(idx[d]) * stride_[d];
    }
    return u_[flat];
  }

 private:
  const Field& u_;
  int res_;
  int n_;
  std::array<std::size_t, 3> stride_{};
};

}  // namespace

const char* to_string(DomainKind kind) noexcept {
  return kind == DomainKind::box ? "box" : "ball";
}

DomainSpec DomainSpec::box(int n, double side) {
  return DomainSpec{DomainKind::box, n, side, {}};
}

DomainSpec DomainSpec::ball(int n, double radius, Point center) {
  return DomainSpec{DomainKind::ball, n, radius, center};
}

double unit_sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: break;
  }
  // General formula 2 pi^{n/2} / Gamma(n/2), used by the radial analysis code.
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

Grid::Grid(DomainSpec domain, int res) : domain_(domain), res_(res) {
  require(domain.n >= 1 && domain.n <= 3, "grid dimension must be 1, 2 or 3");
  require(std::isfinite(domain.extent) && domain.extent > 0.0, "domain extent must be positive");
  require(res >= 3, "grid resolution must be at least 3");
  if (radial()) {
    h_ = domain.extent / res;
    size_ = static_cast<std::size_t>(res);
  } else {
    h_ = domain.extent / (res + 1);
    size_ = ipow(static_cast<std::size_t>(res), domain.n);
  }
}

std::array<int, 3> Grid::multi_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  if (radial()) {
    idx[0] = static_cast<int>(flat);
    return idx;
  }
  for (int d = dim() - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % static_cast<std::size_t>(res_));
    flat /= static_cast<std::size_t>(res_);
  }
  return idx;
}

Point Grid::node(std::size_t flat) const {
  Point x{0.0, 0.0, 0.0};
  if (radial()) {
    x[0] = radius(flat);
    return x;
  }
  const auto idx = multi_index(flat);
  for (int d = 0; d < dim(); ++d) x[d] = (idx[d] + 1) * h_;
  return x;
}

double Grid::weight(std::size_t flat) const noexcept {
  const int n = dim();
  if (!radial()) return std::pow(h_, n);
  if (flat == 0) {
    switch (n) {
      case 1: return h_;
      case 2: return 0.25 * std::numbers::pi * h_ * h_;
      default: return 0.0;
    }
  }
  return unit_sphere_area(n) * std::pow(radius(flat), n - 1) * h_;
}

// Field ----------------------------------------------------------------------

Field::Field(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "field length does not match its grid");
}

Field Field::sample(const Grid& grid, const std::function<double(const Point&)>& fn) {
  Field u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = fn(grid.node(i));
  return u;
}

bool Field::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double scale, Field u) { return u *= scale; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void require_same_grid(const Field& a, const Field& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
}

// Calculus -------------------------------------------------------------------

Field laplacian(const Field& u) {
  const Grid& g = u.grid();
  const double h2 = g.spacing() * g.spacing();
  Field out(g);
  if (g.radial()) {
    const int n = g.dim();
    const std::size_t m = g.size();
    auto val = [&](std::size_t i) { return i < m ? u[i] : 0.0; };
    out[0] = n * 2.0 * (val(1) - u[0]) / h2;
    for (std::size_t i = 1; i < m; ++i) {
      const double c = (n - 1) / (2.0 * static_cast<double>(i));
      out[i] = ((1.0 + c) * val(i + 1) - 2.0 * u[i] + (1.0 - c) * u[i - 1]) / h2;
    }
    return out;
  }
  const BoxView view(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto idx = g.multi_index(i);
    double acc = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      auto plus = idx;
      auto minus = idx;
      ++plus[d];
      --minus[d];
      acc += view.at(plus) - 2.0 * u[i] + view.at(minus);
    }
    out[i] = acc / h2;
  }
  return out;
}

double inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  const Grid& g = u.grid();
  double acc = 0.0;
  if (g.radial()) {
    for (std::size_t i = 0; i < u.size(); ++i) acc += g.weight(i) * u[i] * v[i];
    return acc;
  }
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc * g.weight(0);
}

double norm_lp(const Field& u, double p) {
  require(p >= 1.0, "norm_lp requires p >= 1");
  const Grid& g = u.grid();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double v : u.values()) mx = std::max(mx, std::abs(v));
    return mx;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += g.weight(i) * std::pow(std::abs(u[i]), p);
  return std::pow(acc, 1.0 / p);
}

namespace {

double radial_gradient_sq(const Field& u) {
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.spacing();
  const double omega = unit_sphere_area(n);
  const std::size_t m = u.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double next = i + 1 < m ? u[i + 1] : 0.0;
    const double d = (next - u[i]) / h;
    const double mid = (static_cast<double>(i) + 0.5) * h;
    acc += omega * std::pow(mid, n - 1) * h * d * d;
  }
  return acc;
}

double box_gradient_sq(const Field& u) {
  const Grid& g = u.grid();
  const BoxView view(u);
  const double h = g.spacing();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto idx = g.multi_index(i);
    for (int d = 0; d < g.dim(); ++d) {
      auto plus = idx;
      ++plus[d];
      const double diff = (view.at(plus) - u[i]) / h;
      acc += diff * diff;
      // The link from the lower boundary node into the first interior node.
      if (idx[d] == 0) acc += (u[i] / h) * (u[i] / h);
    }
  }
  return acc * g.weight(0);
}

double radial_hessian_sq(const Field& u) {
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.spacing();
  const std::size_t m = u.size();
  auto val = [&](std::size_t i) { return i < m ? u[i] : 0.0; };
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double urr = 0.0;
    double ur_over_r = 0.0;
    if (i == 0) {
      urr = 2.0 * (val(1) - u[0]) / (h * h);
      ur_over_r = urr;
    } else {
      urr = (val(i + 1) - 2.0 * u[i] + u[i - 1]) / (h * h);
      ur_over_r = (val(i + 1) - u[i - 1]) / (2.0 * h) / g.radius(i);
    }
    acc += g.weight(i) * (urr * urr + (n - 1) * ur_over_r * ur_over_r);
  }
  return acc;
}

double box_hessian_sq(const Field& u) {
  const Grid& g = u.grid();
  const BoxView view(u);
  const double h2 = g.spacing() * g.spacing();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto idx = g.multi_index(i);
    for (int a = 0; a < g.dim(); ++a) {
      for (int b = 0; b < g.dim(); ++b) {
        double d = 0.0;
        if (a == b) {
          auto p = idx;
          auto q = idx;
          ++p[a];
          --q[a];
          d = (view.at(p) - 2.0 * u[i] + view.at(q)) / h2;
        } else {
          auto pp = idx, pm = idx, mp = idx, mm = idx;
          ++pp[a], ++pp[b];
          ++pm[a], --pm[b];
          --mp[a], ++mp[b];
          --mm[a], --mm[b];
          d = (view.at(pp) - view.at(pm) - view.at(mp) + view.at(mm)) / (4.0 * h2);
        }
        acc += d * d;
      }
    }
  }
  return acc * g.weight(0);
}

}  // namespace

double norm_h1(const Field& u) {
  const double l2 = norm_lp(u, 2.0);
  const double grad = u.grid().radial() ? radial_gradient_sq(u) : box_gradient_sq(u);
  return std::sqrt(l2 * l2 + grad);
}

double norm_h2(const Field& u) {
  const double h1 = norm_h1(u);
  const double hess = u.grid().radial() ? radial_hessian_sq(u) : box_hessian_sq(u);
  return std::sqrt(h1 * h1 + hess);
}

// I/O ------------------------------------------------------------------------

void write_field(const Field& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  const Grid& g = u.grid();
  out << g.dim() << ' ' << g.res() << ' ' << std::setprecision(17) << g.spacing() << ' '
      << to_string(g.domain().kind) << '\n';
  const std::size_t line = static_cast<std::size_t>(g.res());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out << u[i] << ((i + 1) % line == 0 ? '\n' : ' ');
  }
  if (!out) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

Field read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "' for reading");
  int n = 0;
  int res = 0;
  double h = 0.0;
  std::string kind;
  if (!(in >> n >> res >> h >> kind)) fail(ErrorCode::io_error, "malformed field header in '" + path + "'");
  const bool ball = kind == "ball";
  if (!ball && kind != "box") fail(ErrorCode::io_error, "unknown domain kind '" + kind + "' in '" + path + "'");
  const double extent = ball ? h * res : h * (res + 1);
  const Grid grid(ball ? DomainSpec::ball(n, extent) : DomainSpec::box(n, extent), res);
  std::vector<double> values(grid.size());
  for (double& v : values) {
    if (!(in >> v)) fail(ErrorCode::io_error, "truncated field data in '" + path + "'");
  }
  return Field(grid, std::move(values));
}

}  // namespace newton_imbed
