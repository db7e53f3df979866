#include "vche/operators.hpp"

#include <array>
#include <cmath>

#include "kernels.hpp"
#include "vche/errors.hpp"

namespace vche {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
}

template <class Symbol>
SpectralField scaled(const SpectralField& u, Symbol symbol) {
  SpectralField out = u;
  const Grid& g = u.grid();
  for (int c = 0; c < kDim; ++c) {
    auto v = out.comp(c);
    for (std::size_t m = 0; m < g.modes(); ++m) v[m] *= symbol(g.k2(m));
  }
  return out;
}

// Grid values of all first derivatives of v: d[i][j] = d_i v_j.
std::array<std::array<std::vector<double>, kDim>, kDim> gradient_values(const SpectralField& v) {
  const Grid& g = v.grid();
  std::array<std::array<std::vector<double>, kDim>, kDim> d;
  std::vector<Complex> tmp(g.modes());
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (std::size_t m = 0; m < g.modes(); ++m) {
        const double k = i == 0 ? g.dkx(m) : g.dky(m);
        tmp[m] = kI * k * v.comp(j)[m];
      }
      d[i][j].resize(g.points());
      g.inverse(tmp, d[i][j]);
    }
  }
  return d;
}

double weighted_sum(const SpectralField& u, double power) {
  const Grid& g = u.grid();
  double sum = 0.0;
  for (int c = 0; c < kDim; ++c) {
    for (std::size_t m = 0; m < g.modes(); ++m) {
      sum += g.weight(m) * std::pow(g.k2(m), power) * std::norm(u.comp(c)[m]);
    }
  }
  return g.domain_area() * sum;
}

}  // namespace

void OperatorParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be > 0");
}

SpectralField leray_project(const SpectralField& v) {
  SpectralField out = v;
  const Grid& g = v.grid();
  auto a = out.comp(0);
  auto b = out.comp(1);
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const double k2 = g.k2(m);
    if (k2 == 0.0) {
      a[m] = 0.0;
      b[m] = 0.0;
      continue;
    }
    const Complex div = (g.kx(m) * a[m] + g.ky(m) * b[m]) / k2;
    a[m] -= g.kx(m) * div;
    b[m] -= g.ky(m) * div;
  }
  return out;
}

SpectralField dealias(const SpectralField& v) {
  SpectralField out = v;
  const Grid& g = v.grid();
  for (int c = 0; c < kDim; ++c) {
    auto a = out.comp(c);
    for (std::size_t m = 0; m < g.modes(); ++m) {
      if (!g.retained(m)) a[m] = 0.0;
    }
  }
  return out;
}

SpectralField apply_A(const SpectralField& u) {
  return scaled(u, [](double k2) { return k2; });
}

SpectralField apply_helmholtz(const SpectralField& u, double alpha) {
  require_alpha(alpha);
  const double a2 = alpha * alpha;
  return scaled(u, [a2](double k2) { return 1.0 + a2 * k2; });
}

SpectralField solve_helmholtz(const SpectralField& m, double alpha) {
  require_alpha(alpha);
  const double a2 = alpha * alpha;
  return scaled(m, [a2](double k2) { return 1.0 / (1.0 + a2 * k2); });
}

double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
  require_same_grid(u.grid(), v.grid(), "trilinear_b");
  require_same_grid(u.grid(), w.grid(), "trilinear_b");
  const PhysicalField uu = to_physical(dealias(u));
  const PhysicalField ww = to_physical(dealias(w));
  const auto d = gradient_values(dealias(v));
  const Grid& g = u.grid();
  double sum = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) sum += uu.comp(i)[p] * d[i][j][p] * ww.comp(j)[p];
    }
  }
  return g.cell_area() * sum;
}

double trilinear_btilde(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
  return trilinear_b(u, v, w) - trilinear_b(w, v, u);
}

SpectralField btilde_apply(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u.grid(), v.grid(), "btilde_apply");
  const SpectralField ud = dealias(u);
  const SpectralField vd = dealias(v);
  const Grid& g = u.grid();
  detail::PointState s;
  s.u1.resize(g.points());
  s.u2.resize(g.points());
  s.omega.resize(g.points());
  g.inverse(ud.comp(0), s.u1);
  g.inverse(ud.comp(1), s.u2);
  detail::curl_values(vd, s.omega);
  return detail::convection(s, u.grid_ptr());
}

SpectralField btilde_prime(const SpectralField& u_hat, const SpectralField& direction, double alpha) {
  require_same_grid(u_hat.grid(), direction.grid(), "btilde_prime");
  require_alpha(alpha);
  const auto s = detail::point_state(dealias(u_hat), alpha);
  return detail::convection_prime(s, dealias(direction), alpha);
}

SpectralField btilde_second(const SpectralField& u1, const SpectralField& u2, double alpha) {
  // the second derivative of a quadratic map is the symmetrized first derivative
  return btilde_prime(u1, u2, alpha);
}

SpectralField bhat_apply(const SpectralField& u_hat, const SpectralField& lambda, double alpha) {
  require_same_grid(u_hat.grid(), lambda.grid(), "bhat_apply");
  require_alpha(alpha);
  const auto s = detail::point_state(dealias(u_hat), alpha);
  return detail::convection_adjoint(s, dealias(lambda), alpha);
}

FieldNorms norms(const SpectralField& u) {
  FieldNorms n;
  n.l2 = std::sqrt(weighted_sum(u, 0.0));
  n.h1 = std::sqrt(weighted_sum(u, 1.0));
  n.h2 = std::sqrt(weighted_sum(u, 2.0));
  n.h3 = std::sqrt(weighted_sum(u, 3.0));
  return n;
}

}  // namespace vche
