#include "kernels.hpp"

namespace vche::detail {

namespace {

constexpr Complex kI{0.0, 1.0};

std::vector<Complex> curl_coeffs(const SpectralField& v, double alpha) {
  const Grid& g = v.grid();
  std::vector<Complex> w(g.modes());
  const double a2 = alpha * alpha;
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const double eta = 1.0 + a2 * g.k2(m);
    w[m] = eta * kI * (g.dkx(m) * v.comp(1)[m] - g.dky(m) * v.comp(0)[m]);
  }
  return w;
}

}  // namespace

void project_dealias(SpectralField& v) {
  const Grid& g = v.grid();
  auto a = v.comp(0);
  auto b = v.comp(1);
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const double k2 = g.k2(m);
    if (!g.retained(m) || k2 == 0.0) {
      a[m] = 0.0;
      b[m] = 0.0;
      continue;
    }
    const double kx = g.kx(m);
    const double ky = g.ky(m);
    const Complex div = (kx * a[m] + ky * b[m]) / k2;
    a[m] -= kx * div;
    b[m] -= ky * div;
  }
}

void curl_values(const SpectralField& v, std::span<double> out) {
  helmholtz_curl_values(v, 0.0, out);
}

void helmholtz_curl_values(const SpectralField& v, double alpha, std::span<double> out) {
  const auto w = curl_coeffs(v, alpha);
  v.grid().inverse(w, out);
}

SpectralField project_grid_vector(const GridPtr& grid, std::span<const double> p1,
                                  std::span<const double> p2) {
  SpectralField out(grid);
  grid->forward(p1, out.comp(0));
  grid->forward(p2, out.comp(1));
  project_dealias(out);
  return out;
}

PointState point_state(const SpectralField& u, double alpha) {
  const Grid& g = u.grid();
  PointState s;
  s.u1.resize(g.points());
  s.u2.resize(g.points());
  s.omega.resize(g.points());
  g.inverse(u.comp(0), s.u1);
  g.inverse(u.comp(1), s.u2);
  helmholtz_curl_values(u, alpha, s.omega);
  return s;
}

SpectralField convection(const PointState& s, const GridPtr& grid) {
  const std::size_t np = grid->points();
  std::vector<double> p1(np), p2(np);
  for (std::size_t p = 0; p < np; ++p) {
    p1[p] = -s.u2[p] * s.omega[p];
    p2[p] = s.u1[p] * s.omega[p];
  }
  return project_grid_vector(grid, p1, p2);
}

SpectralField convection_prime(const PointState& s, const SpectralField& z, double alpha) {
  const Grid& g = z.grid();
  const PointState t = point_state(z, alpha);
  const std::size_t np = g.points();
  std::vector<double> p1(np), p2(np);
  for (std::size_t p = 0; p < np; ++p) {
    p1[p] = -t.u2[p] * s.omega[p] - s.u2[p] * t.omega[p];
    p2[p] = t.u1[p] * s.omega[p] + s.u1[p] * t.omega[p];
  }
  return project_grid_vector(z.grid_ptr(), p1, p2);
}

SpectralField convection_adjoint(const PointState& s, const SpectralField& lambda, double alpha) {
  const Grid& g = lambda.grid();
  const std::size_t np = g.points();
  std::vector<double> l1(np), l2(np);
  g.inverse(lambda.comp(0), l1);
  g.inverse(lambda.comp(1), l2);

  // w -> <B~(w, H u), lambda>
  std::vector<double> p1(np), p2(np), psi(np);
  for (std::size_t p = 0; p < np; ++p) {
    p1[p] = l2[p] * s.omega[p];
    p2[p] = -l1[p] * s.omega[p];
    psi[p] = s.u1[p] * l2[p] - s.u2[p] * l1[p];
  }
  SpectralField out = project_grid_vector(lambda.grid_ptr(), p1, p2);

  // w -> <B~(u, H w), lambda> = <curl(H w), psi> = <w, H perp-grad psi>
  std::vector<Complex> psi_hat(g.modes());
  g.forward(psi, psi_hat);
  const double a2 = alpha * alpha;
  auto o1 = out.comp(0);
  auto o2 = out.comp(1);
  for (std::size_t m = 0; m < g.modes(); ++m) {
    if (!g.retained(m)) continue;
    const double eta = 1.0 + a2 * g.k2(m);
    o1[m] += eta * kI * g.dky(m) * psi_hat[m];
    o2[m] -= eta * kI * g.dkx(m) * psi_hat[m];
  }
  return out;
}

CnFactors cn_factors(const Grid& grid, double nu, double alpha, double dt) {
  CnFactors f;
  f.c.resize(grid.modes());
  f.d.resize(grid.modes());
  const double a2 = alpha * alpha;
  for (std::size_t m = 0; m < grid.modes(); ++m) {
    const double half = 0.5 * dt * nu * grid.k2(m);
    f.c[m] = (1.0 - half) / (1.0 + half);
    f.d[m] = dt / ((1.0 + half) * (1.0 + a2 * grid.k2(m)));
  }
  return f;
}

void cn_update(const CnFactors& f, SpectralField& x, const SpectralField& y) {
  for (int c = 0; c < kDim; ++c) {
    auto a = x.comp(c);
    auto b = y.comp(c);
    for (std::size_t m = 0; m < a.size(); ++m) a[m] = f.c[m] * a[m] + f.d[m] * b[m];
  }
}

}  // namespace vche::detail
