#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergoloop/dynamics.hpp"

namespace ergoloop {

using GradientFunction = std::function<Eigen::Vector2d(double t, const Eigen::Vector2d& y)>;
using JacobianFunction = std::function<Eigen::Matrix2d(double t, const Eigen::Vector2d& y)>;

/// y -> h(t) y and its inverse, with Jacobians when they are known.
struct LoopMaps {
  PointAction forward;
  PointAction inverse;
  JacobianFunction forward_jacobian;
  JacobianFunction inverse_jacobian;
};

/// Time-dependent generator H(t, y) with zero mean on every fiber.
struct NormalizedHamiltonian {
  FieldFunction value;
  GradientFunction gradient;           ///< empty: central differences
  std::optional<LoopMaps> flow;        ///< closed-form flow when known
  std::optional<TrigMonomial> monomial;
  std::string label;

  double operator()(double t, const Eigen::Vector2d& y) const { return value(t, y); }
  Eigen::Vector2d grad(double t, const Eigen::Vector2d& y) const;
  ScalarField sample(const TorusGrid& grid) const { return ergoloop::sample(value, grid, Domain::kProduct); }

  static NormalizedHamiltonian zero();
  static NormalizedHamiltonian from_monomial(const TrigMonomial& m);
};

/// Autonomous shear G(y) = cos(2 pi y1); its flow moves y2 by 2 pi t sin(2 pi y1).
NormalizedHamiltonian shear_hamiltonian();
/// Autonomous shear cos(2 pi y2); its flow moves y1 by -2 pi t sin(2 pi y2).
NormalizedHamiltonian cross_shear_hamiltonian();
/// s'(t) cos(2 pi y1) with s(t) = sin^2(pi t): the shear flow run to time s(t).
NormalizedHamiltonian reparametrized_shear();
/// s'(t) G(y) for an autonomous G; the flow is G's flow run to time s(t) when
/// G has a closed form.
NormalizedHamiltonian reparametrized(const NormalizedHamiltonian& G);
/// s'(t) G(y) for an autonomous G given by value and gradient; no closed-form flow.
NormalizedHamiltonian reparametrized(const FieldFunction& G, const GradientFunction& dG, std::string label);

/// Largest |fiber mean| over the time nodes of the grid.
double fiber_mean_defect(const NormalizedHamiltonian& H, const TorusGrid& grid);

/// X_H = (dH/dy2, -dH/dy1). Throws "invalid Hamiltonian" on non-finite input.
Eigen::Vector2d hamiltonian_vector_field(const NormalizedHamiltonian& H, double t, const Eigen::Vector2d& y);

/// Classical RK4 with uniform steps of length about 1/step_count from t0 to t1.
Eigen::Vector2d integrate_flow(const NormalizedHamiltonian& H, const Eigen::Vector2d& y, double t0, double t1,
                               int step_count);

/// Time-t map of the flow of H, integrated numerically.
CellMap flow_of_hamiltonian(const NormalizedHamiltonian& H, double t, int step_count);

/// The closed-form flow when present, otherwise RK4 at step_count.
LoopMaps loop_maps(const NormalizedHamiltonian& H, int step_count);

/// Largest torus distance between h(1) y and y over the grid nodes.
double closure_defect(const NormalizedHamiltonian& H, const TorusGrid& grid, int step_count);

/// integral over t of max_y |H(t, y)|, refined sup on each time node.
double loop_length(const NormalizedHamiltonian& H, const TorusGrid& grid);

/// Generator of t -> h2(t) h1(t): H2(t, y) + H1(t, h2(t)^{-1} y).
NormalizedHamiltonian compose_loops(const NormalizedHamiltonian& H2, const NormalizedHamiltonian& H1,
                                    int step_count = 2048);

/// Generator of t -> h(t)^{-1}: -H(t, h(t) y).
NormalizedHamiltonian invert_loop(const NormalizedHamiltonian& H, int step_count = 2048);

/// (1/k) length(F_k) for each k; upper bounds for the per-iterate norm.
std::vector<double> asymptotic_norm_estimate(const NormalizedHamiltonian& H, const SkewProduct& T,
                                             const std::vector<int>& ks, const TorusGrid& grid);

}  // namespace ergoloop
