#pragma once
#include "hartree/core.hpp"

#include <functional>
#include <vector>

// Concrete potential family K(r, x'') with a strict maximum K = 1 on the
// circle r = r0, x'' = x0'': a radially quadratic cap 1 - a s^2 for
// s = |(r,x'') - (r0,x0'')| <= rho_t, then a C^2 quintic transition on
// [rho_t, 2 rho_t] leveling off at the constant floor 1 - a rho_t^2.

namespace hartree::pot {

struct PotentialModel {
  int N = 0;
  double r0 = 1.0;
  std::vector<double> x0_pp; // in R^{N-2}
  double a = 0.0;            // curvature of the cap; a = 0 means K == 1
  double rho_t = 1.0;        // end of the pure quadratic branch
  double floor = 1.0;        // plateau value 1 - a rho_t^2
  bool is_one() const { return a == 0.0; }
  std::vector<double> center_w() const {
    std::vector<double> w{r0};
    w.insert(w.end(), x0_pp.begin(), x0_pp.end());
    return w;
  }
};

// Validates a > 0, rho_t > 0 and a rho_t^2 < 1, and additionally checks
// numerically that the transition (which undershoots the floor slightly
// before leveling) never reaches zero.
PotentialModel make_quadratic_model(int N, double r0,
                                    std::vector<double> x0_pp, double a,
                                    double rho_t);

// K == 1 (used for the invariance and pure-interaction runs).
PotentialModel make_constant_one(int N, double r0, std::vector<double> x0_pp);

// Default curvature a = 1/(2(N-1)), normalizing the flat (N-1)-dimensional
// Laplacian of K at the center to -1.
double default_curvature(int N);

struct PotentialValue {
  double value = 0;
  double grad_r = 0;               // dK/dr
  std::vector<double> grad_xpp;    // dK/dx''_k
  double partial_laplacian = 0;    // flat Laplacian in the N-1 coords (r, x'')
};

PotentialValue potential_eval(const PotentialModel &K, const Vec &x);
double potential_value(const PotentialModel &K, const Vec &x);

// 1 - K(x) evaluated without cancellation: a s^2 on the cap,
// a (rho_t^2 (1-q) + s^2 q) on the transition, a rho_t^2 on the plateau.
double one_minus_value(const PotentialModel &K, const Vec &x);

// Gradient of K with respect to the full x in R^N (chain rule through r).
Vec potential_grad_x(const PotentialModel &K, const Vec &x);

// Flat-coordinate access for the reduced solver: w = (r, x'') in R^{N-1}.
double value_w(const PotentialModel &K, const std::vector<double> &w);
std::vector<double> grad_w(const PotentialModel &K,
                           const std::vector<double> &w);
// Hessian in w, row-major (N-1) x (N-1)
std::vector<double> hessian_w(const PotentialModel &K,
                              const std::vector<double> &w);

// Sign of det(Hessian of K at (r0, x0'')); (-1)^{N-1} for the quadratic model.
int degree_sign(const PotentialModel &K);

// Finite-difference verification of the structural assumptions for an
// externally supplied K(w), w in R^{N-1}: critical point at w0, negative
// flat Laplacian there, positivity on the 10*delta ball.
struct AssumptionReport {
  bool critical_point = false;
  bool negative_laplacian = false;
  bool positive_on_ball = false;
  double grad_norm = 0;
  double laplacian = 0;
  double min_on_ball = 0;
  bool all() const {
    return critical_point && negative_laplacian && positive_on_ball;
  }
};
AssumptionReport
verify_assumptions(const std::function<double(const std::vector<double> &)> &K,
                   const std::vector<double> &w0, double delta);

} // namespace hartree::pot
