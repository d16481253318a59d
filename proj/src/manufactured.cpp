#include "thmrom/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace thmrom {

namespace {

constexpr double kPi = std::numbers::pi;

// Bubble B = x y (1-x) (1-y) and its derivatives.
struct Bubble {
  double b, bx, by, bxx, byy, bxy;
};

Bubble bubble(double x, double y) {
  return {x * y * (1 - x) * (1 - y),
          y * (1 - y) * (1 - 2 * x),
          x * (1 - x) * (1 - 2 * y),
          -2 * y * (1 - y),
          -2 * x * (1 - x),
          (1 - 2 * x) * (1 - 2 * y)};
}

// Oscillatory factor of one displacement component with partials in x, y,
// t and the mixed space-time partials needed for (div u)_t.
struct Factor {
  double a, ax, ay, axx, ayy, axy, at, axt, ayt;
};

// a1 = sin(kx) cos(ky), a2 = cos(kx) sin(ky), k = pi t.
std::array<Factor, 2> factors(double x, double y, double t) {
  const double k = kPi * t;
  const double s = std::sin(k * x), c = std::cos(k * x);
  const double S = std::sin(k * y), C = std::cos(k * y);
  const double k2 = k * k;
  // d/dt of k c C and of -k s S.
  const double dt_kcC = kPi * c * C - k * kPi * (x * s * C + y * c * S);
  const double dt_ksS = -kPi * s * S - k * kPi * (x * c * S + y * s * C);
  Factor a1{s * C,     k * c * C, -k * s * S, -k2 * s * C, -k2 * s * C, -k2 * c * S,
            kPi * (x * c * C - y * s * S), dt_kcC, dt_ksS};
  Factor a2{c * S,      -k * s * S, k * c * C, -k2 * c * S, -k2 * c * S, -k2 * s * C,
            kPi * (-x * s * S + y * c * C), dt_ksS, dt_kcC};
  return {a1, a2};
}

}  // namespace

ManufacturedCase::ManufacturedCase(PhysicalParams params, double K, double D)
    : params_(params), K_(K), D_(D) {}

ManufacturedCase ManufacturedCase::standard() {
  PhysicalParams p;
  p.lambda = 1e2;
  p.mu = 1e2;
  p.c0 = 1.0;
  p.alpha = 1.0;
  p.alpha_T = 1e-3;
  p.alpha_m = 1e-5;
  p.C_d = 1.0;
  p.theta0 = 1.0;
  p.L = 1.0;
  return ManufacturedCase(p, 1e-5, 1e-5);
}

ExactValues ManufacturedCase::exact(double x, double y, double t) const {
  const Bubble B = bubble(x, y);
  const auto a = factors(x, y, t);
  const double sg = t + x - y;
  return {{a[0].a * B.b, a[1].a * B.b}, std::cos(sg) * B.b, std::sin(sg) * B.b};
}

ExactGradients ManufacturedCase::exact_gradients(double x, double y, double t) const {
  const Bubble B = bubble(x, y);
  const auto a = factors(x, y, t);
  const double cs = std::cos(t + x - y), sn = std::sin(t + x - y);
  ExactGradients g;
  for (int i = 0; i < 2; ++i)
    g.u[i] = {a[i].ax * B.b + a[i].a * B.bx, a[i].ay * B.b + a[i].a * B.by};
  g.p = {-sn * B.b + cs * B.bx, sn * B.b + cs * B.by};
  g.theta = {cs * B.b + sn * B.bx, -cs * B.b + sn * B.by};
  return g;
}

ForcingValues ManufacturedCase::forcing(double x, double y, double t) const {
  const PhysicalParams& P = params_;
  const double kdr = P.K_dr();
  const Bubble B = bubble(x, y);
  const auto a = factors(x, y, t);
  const Factor& a1 = a[0];
  const Factor& a2 = a[1];
  const double lapB = B.bxx + B.byy;

  // Laplacian of a_i B by the product rule.
  std::array<double, 2> lap_u;
  for (int i = 0; i < 2; ++i)
    lap_u[i] = (a[i].axx + a[i].ayy) * B.b + 2 * (a[i].ax * B.bx + a[i].ay * B.by) + a[i].a * lapB;

  // div u = a1x B + a1 Bx + a2y B + a2 By.
  const double ddiv_dx = a1.axx * B.b + 2 * a1.ax * B.bx + a1.a * B.bxx + a2.axy * B.b +
                         a2.ay * B.bx + a2.ax * B.by + a2.a * B.bxy;
  const double ddiv_dy = a1.axy * B.b + a1.ax * B.by + a1.ay * B.bx + a1.a * B.bxy +
                         a2.ayy * B.b + 2 * a2.ay * B.by + a2.a * B.byy;
  const double ddiv_dt = a1.axt * B.b + a1.at * B.bx + a2.ayt * B.b + a2.at * B.by;

  const double cs = std::cos(t + x - y), sn = std::sin(t + x - y);
  const Vec2 grad_p = {-sn * B.b + cs * B.bx, sn * B.b + cs * B.by};
  const Vec2 grad_th = {cs * B.b + sn * B.bx, -cs * B.b + sn * B.by};
  const double p_t = -sn * B.b;
  const double th_t = cs * B.b;
  const double lap_p = -2 * cs * B.b + 2 * sn * (B.by - B.bx) + cs * lapB;
  const double lap_th = -2 * sn * B.b + 2 * cs * (B.bx - B.by) + sn * lapB;

  ForcingValues out;
  const double grad_div[2] = {ddiv_dx, ddiv_dy};
  for (int i = 0; i < 2; ++i)
    out.f[i] = -P.mu * lap_u[i] - (P.lambda + P.mu) * grad_div[i] + P.alpha * grad_p[i] +
               3 * P.alpha_T * kdr * grad_th[i];
  out.g = P.c0 * p_t + P.alpha * ddiv_dt - 3 * P.alpha_m * th_t - K_ * lap_p;
  out.eta = P.C_d * th_t + 3 * P.alpha_T * kdr * P.theta0 * ddiv_dt -
            3 * P.alpha_m * P.theta0 * p_t - D_ * lap_th;
  return out;
}

Forcing ManufacturedCase::forcing_functions() const {
  Forcing f;
  f.f = [c = *this](double x, double y, double t) { return c.forcing(x, y, t).f; };
  f.g = [c = *this](double x, double y, double t) { return c.forcing(x, y, t).g; };
  f.eta = [c = *this](double x, double y, double t) { return c.forcing(x, y, t).eta; };
  return f;
}

Forcing ManufacturedCase::exact_functions() const {
  Forcing f;
  f.f = [c = *this](double x, double y, double t) { return c.exact(x, y, t).u; };
  f.g = [c = *this](double x, double y, double t) { return c.exact(x, y, t).p; };
  f.eta = [c = *this](double x, double y, double t) { return c.exact(x, y, t).theta; };
  return f;
}

}  // namespace thmrom
