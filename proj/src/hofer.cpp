#include "ergoloop/hofer.hpp"

#include "ergoloop/parallel.hpp"
#include "ergoloop/shortening.hpp"

namespace ergoloop {

namespace {

constexpr double kFdStep = 1e-6;

Eigen::Vector2d central_gradient(const FieldFunction& f, double t, const Eigen::Vector2d& y) {
  const Eigen::Vector2d e1(kFdStep, 0.0), e2(0.0, kFdStep);
  return {(f(t, y + e1) - f(t, y - e1)) / (2 * kFdStep), (f(t, y + e2) - f(t, y - e2)) / (2 * kFdStep)};
}

Eigen::Matrix2d central_jacobian(const PointAction& f, double t, const Eigen::Vector2d& y) {
  Eigen::Matrix2d J;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(k) = kFdStep;
    const Eigen::Vector2d p = f(t, y + e), m = f(t, y - e);
    J(0, k) = circle_delta(m(0), p(0)) / (2 * kFdStep);
    J(1, k) = circle_delta(m(1), p(1)) / (2 * kFdStep);
  }
  return J;
}

Eigen::Matrix2d jacobian_of(const JacobianFunction& J, const PointAction& f, double t, const Eigen::Vector2d& y) {
  return J ? J(t, y) : central_jacobian(f, t, y);
}

double s_of(double t) {
  const double s = std::sin(std::numbers::pi * t);
  return s * s;
}
double ds_of(double t) { return std::numbers::pi * std::sin(kTwoPi * t); }

}  // namespace

Eigen::Vector2d NormalizedHamiltonian::grad(double t, const Eigen::Vector2d& y) const {
  return gradient ? gradient(t, y) : central_gradient(value, t, y);
}

NormalizedHamiltonian NormalizedHamiltonian::zero() {
  NormalizedHamiltonian H;
  H.value = [](double, const Eigen::Vector2d&) { return 0.0; };
  H.gradient = [](double, const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  auto id = [](double, const Eigen::Vector2d& y) { return y; };
  auto eye = [](double, const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity().eval(); };
  H.flow = LoopMaps{id, id, eye, eye};
  H.monomial = TrigMonomial{0.0, 0, 0, 0, 0.0};
  H.label = "zero";
  return H;
}

NormalizedHamiltonian NormalizedHamiltonian::from_monomial(const TrigMonomial& m) {
  NormalizedHamiltonian H;
  H.value = [m](double t, const Eigen::Vector2d& y) { return m(t, y); };
  H.gradient = [m](double t, const Eigen::Vector2d& y) { return m.gradient(t, y); };
  H.monomial = m;
  H.label = "monomial";
  return H;
}

NormalizedHamiltonian shear_hamiltonian() {
  NormalizedHamiltonian H = NormalizedHamiltonian::from_monomial(TrigMonomial{1.0, 0, 1, 0, 0.0});
  H.label = "shear cos(2 pi y1)";
  H.flow = LoopMaps{
      [](double t, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y(0), y(1) + kTwoPi * t * std::sin(kTwoPi * y(0)));
      },
      [](double t, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y(0), y(1) - kTwoPi * t * std::sin(kTwoPi * y(0)));
      },
      [](double t, const Eigen::Vector2d& y) {
        Eigen::Matrix2d J;
        J << 1, 0, kTwoPi * kTwoPi * t * std::cos(kTwoPi * y(0)), 1;
        return J;
      },
      [](double t, const Eigen::Vector2d& y) {
        Eigen::Matrix2d J;
        J << 1, 0, -kTwoPi * kTwoPi * t * std::cos(kTwoPi * y(0)), 1;
        return J;
      }};
  return H;
}

NormalizedHamiltonian cross_shear_hamiltonian() {
  NormalizedHamiltonian H = NormalizedHamiltonian::from_monomial(TrigMonomial{1.0, 0, 0, 1, 0.0});
  H.label = "shear cos(2 pi y2)";
  H.flow = LoopMaps{
      [](double t, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y(0) - kTwoPi * t * std::sin(kTwoPi * y(1)), y(1));
      },
      [](double t, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y(0) + kTwoPi * t * std::sin(kTwoPi * y(1)), y(1));
      },
      [](double t, const Eigen::Vector2d& y) {
        Eigen::Matrix2d J;
        J << 1, -kTwoPi * kTwoPi * t * std::cos(kTwoPi * y(1)), 0, 1;
        return J;
      },
      [](double t, const Eigen::Vector2d& y) {
        Eigen::Matrix2d J;
        J << 1, kTwoPi * kTwoPi * t * std::cos(kTwoPi * y(1)), 0, 1;
        return J;
      }};
  return H;
}

NormalizedHamiltonian reparametrized(const NormalizedHamiltonian& G) {
  NormalizedHamiltonian H;
  H.value = [G](double t, const Eigen::Vector2d& y) { return ds_of(t) * G(0.0, y); };
  H.gradient = [G](double t, const Eigen::Vector2d& y) { return (ds_of(t) * G.grad(0.0, y)).eval(); };
  if (G.flow) {
    const LoopMaps g = *G.flow;
    H.flow = LoopMaps{[g](double t, const Eigen::Vector2d& y) { return g.forward(s_of(t), y); },
                      [g](double t, const Eigen::Vector2d& y) { return g.inverse(s_of(t), y); },
                      g.forward_jacobian ? JacobianFunction([g](double t, const Eigen::Vector2d& y) {
                        return g.forward_jacobian(s_of(t), y);
                      })
                                         : JacobianFunction(),
                      g.inverse_jacobian ? JacobianFunction([g](double t, const Eigen::Vector2d& y) {
                        return g.inverse_jacobian(s_of(t), y);
                      })
                                         : JacobianFunction()};
  }
  H.label = "reparametrized " + G.label;
  return H;
}

NormalizedHamiltonian reparametrized_shear() {
  NormalizedHamiltonian H = reparametrized(shear_hamiltonian());
  H.label = "reparametrized shear";
  return H;
}

NormalizedHamiltonian reparametrized(const FieldFunction& G, const GradientFunction& dG, std::string label) {
  NormalizedHamiltonian H;
  H.value = [G](double t, const Eigen::Vector2d& y) { return ds_of(t) * G(0.0, y); };
  H.gradient = [dG](double t, const Eigen::Vector2d& y) { return (ds_of(t) * dG(0.0, y)).eval(); };
  H.label = std::move(label);
  return H;
}

double fiber_mean_defect(const NormalizedHamiltonian& H, const TorusGrid& grid) {
  return fiber_means(H.sample(grid)).abs().maxCoeff();
}

Eigen::Vector2d hamiltonian_vector_field(const NormalizedHamiltonian& H, double t, const Eigen::Vector2d& y) {
  const Eigen::Vector2d g = H.grad(t, y);
  if (!g.allFinite()) throw PreconditionError("invalid Hamiltonian");
  return {g(1), -g(0)};
}

Eigen::Vector2d integrate_flow(const NormalizedHamiltonian& H, const Eigen::Vector2d& y, double t0, double t1,
                               int step_count) {
  if (step_count < 1) throw PreconditionError("step_count must be >= 1");
  const int n = std::max(1, static_cast<int>(std::lround(std::abs(t1 - t0) * step_count)));
  if (t1 == t0) return wrap(y);
  const double dt = (t1 - t0) / n;
  Eigen::Vector2d x = y;
  double t = t0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d k1 = hamiltonian_vector_field(H, t, x);
    const Eigen::Vector2d k2 = hamiltonian_vector_field(H, t + dt / 2, x + dt / 2 * k1);
    const Eigen::Vector2d k3 = hamiltonian_vector_field(H, t + dt / 2, x + dt / 2 * k2);
    const Eigen::Vector2d k4 = hamiltonian_vector_field(H, t + dt, x + dt * k3);
    x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t = t0 + (i + 1) * dt;
  }
  return wrap(x);
}

CellMap flow_of_hamiltonian(const NormalizedHamiltonian& H, double t, int step_count) {
  return CellMap(SmoothMap{[H, t, step_count](const Eigen::Vector2d& y) { return integrate_flow(H, y, 0.0, t, step_count); },
                           [H, t, step_count](const Eigen::Vector2d& y) { return integrate_flow(H, y, t, 0.0, step_count); }});
}

LoopMaps loop_maps(const NormalizedHamiltonian& H, int step_count) {
  if (H.flow) return *H.flow;
  return LoopMaps{[H, step_count](double t, const Eigen::Vector2d& y) { return integrate_flow(H, y, 0.0, t, step_count); },
                  [H, step_count](double t, const Eigen::Vector2d& y) { return integrate_flow(H, y, t, 0.0, step_count); },
                  {},
                  {}};
}

double closure_defect(const NormalizedHamiltonian& H, const TorusGrid& grid, int step_count) {
  Eigen::ArrayXd d(grid.fiber_size());
  parallel_for(grid.fiber_size(), [&](std::int64_t c) {
    const Eigen::Vector2d y = grid.node(static_cast<int>(c));
    d(c) = torus_distance(integrate_flow(H, y, 0.0, 1.0, step_count), y);
  });
  return d.maxCoeff();
}

double loop_length(const NormalizedHamiltonian& H, const TorusGrid& grid) {
  Eigen::ArrayXd sup(grid.res_t());
  parallel_for(grid.res_t(), [&](std::int64_t k) { sup(k) = refined_fiber_sup(H.value, grid, grid.time(static_cast<int>(k))); });
  return sup.sum() / grid.res_t();
}

NormalizedHamiltonian compose_loops(const NormalizedHamiltonian& H2, const NormalizedHamiltonian& H1, int step_count) {
  const LoopMaps h2 = loop_maps(H2, step_count);
  NormalizedHamiltonian out;
  out.value = [H2, H1, h2](double t, const Eigen::Vector2d& y) { return H2(t, y) + H1(t, h2.inverse(t, y)); };
  out.gradient = [H2, H1, h2](double t, const Eigen::Vector2d& y) {
    const Eigen::Vector2d z = h2.inverse(t, y);
    const Eigen::Matrix2d J = jacobian_of(h2.inverse_jacobian, h2.inverse, t, y);
    return (H2.grad(t, y) + J.transpose() * H1.grad(t, z)).eval();
  };
  if (H2.flow && H1.flow) {
    const LoopMaps a = *H2.flow, b = *H1.flow;
    out.flow = LoopMaps{
        [a, b](double t, const Eigen::Vector2d& y) { return a.forward(t, b.forward(t, y)); },
        [a, b](double t, const Eigen::Vector2d& y) { return b.inverse(t, a.inverse(t, y)); },
        [a, b](double t, const Eigen::Vector2d& y) {
          return (jacobian_of(a.forward_jacobian, a.forward, t, b.forward(t, y)) *
                  jacobian_of(b.forward_jacobian, b.forward, t, y))
              .eval();
        },
        [a, b](double t, const Eigen::Vector2d& y) {
          return (jacobian_of(b.inverse_jacobian, b.inverse, t, a.inverse(t, y)) *
                  jacobian_of(a.inverse_jacobian, a.inverse, t, y))
              .eval();
        }};
  }
  out.label = "(" + H2.label + ") # (" + H1.label + ")";
  return out;
}

NormalizedHamiltonian invert_loop(const NormalizedHamiltonian& H, int step_count) {
  const LoopMaps h = loop_maps(H, step_count);
  NormalizedHamiltonian out;
  out.value = [H, h](double t, const Eigen::Vector2d& y) { return -H(t, h.forward(t, y)); };
  out.gradient = [H, h](double t, const Eigen::Vector2d& y) {
    const Eigen::Matrix2d J = jacobian_of(h.forward_jacobian, h.forward, t, y);
    return (-(J.transpose() * H.grad(t, h.forward(t, y)))).eval();
  };
  if (H.flow) out.flow = LoopMaps{h.inverse, h.forward, h.inverse_jacobian, h.forward_jacobian};
  out.label = "inverse(" + H.label + ")";
  return out;
}

std::vector<double> asymptotic_norm_estimate(const NormalizedHamiltonian& H, const SkewProduct& T,
                                             const std::vector<int>& ks, const TorusGrid& grid) {
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw PreconditionError("ks must be increasing");
  std::vector<double> out;
  for (int k : ks) out.push_back(loop_length(birkhoff_hamiltonian(H, T, k), grid) / k);
  return out;
}

}  // namespace ergoloop
