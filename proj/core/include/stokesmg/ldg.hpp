#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stokesmg/block_matrix.hpp"
#include "stokesmg/layout.hpp"
#include "stokesmg/mesh.hpp"

namespace stokesmg {

/// Viscosity-upwind weight for the numerical fluxes across an interface:
/// u-hat is biased to the more viscous side, sigma-hat to the less viscous.
double upwind_lambda(double mu_minus, double mu_plus);

/// Velocity penalty parameters.  Boundary penalisation is degree-dependent,
/// interphase penalisation uses the smaller of the two viscosities, and
/// intraphase penalisation is disabled on uniform grids.
struct PenaltyConfig {
  double c_degree(int p) const { return p <= 1 ? 1.0 : 16.0; }
  double tau_boundary(int p, double mu_minus, double h) const {
    return c_degree(p) * mu_minus / h;
  }
  double tau_interphase(double mu_minus, double mu_plus, double h) const {
    return 16.0 * std::min(mu_minus, mu_plus) / h;
  }
  double tau_intraphase = 0.0;
};

struct FluxConfig {
  PenaltyConfig penalty;
};

/// Source data callables.  Face data receive the physical point plus the
/// face frame; jump data are relative to the face normal +e_axis
/// (value = trace on the minus side minus trace on the plus side).
struct SourceData {
  using VecFn = std::function<Eigen::Vector3d(const std::array<double, 3>&)>;
  using ScalarFn = std::function<double(const std::array<double, 3>&)>;
  using BoundaryVecFn = std::function<Eigen::Vector3d(
      const std::array<double, 3>&, int axis, int sign)>;
  using JumpVecFn =
      std::function<Eigen::Vector3d(const std::array<double, 3>&, int axis)>;

  VecFn f_vec;              // momentum source
  ScalarFn f_div;           // divergence source
  BoundaryVecFn g_dirichlet; // velocity Dirichlet data on boundary faces
  JumpVecFn g_jump;          // velocity jump across interphase faces
  BoundaryVecFn h_stress;    // boundary traction data (stress BCs)
  JumpVecFn h_jump;          // traction jump across interphase faces
};

/// Assembled mixed-degree LDG Stokes operator on one mesh level.
struct StokesOperator {
  MeshLevel level;
  DofLayout layout;
  int gamma = 0;               // 0 standard form, 1 stress form
  double delta = 0.0;          // time-step weight; 0 => steady
  std::vector<double> mu;      // per element
  std::vector<double> rho;     // per element

  BlockCsr A;                  // element-blocked saddle-point operator
  std::array<BlockCsr, 3> G;   // scalar discrete gradient (coefficient form)
  std::array<BlockCsr, 3> Gt;  // transposes, kept for RHS lifting transport

  bool unsteady() const { return delta > 0.0; }
  Eigen::Index num_dofs() const { return A.rows(); }

  /// Debug dump of A in triplet text form.
  void dump_triplets(std::ostream& os) const { A.dump_triplets(os); }
};

/// Per-phase coefficient table.
struct PhaseCoefficients {
  std::vector<double> mu{1.0};
  std::vector<double> rho{0.0};
  double of_mu(int phase) const { return mu[phase < int(mu.size()) ? phase : 0]; }
  double of_rho(int phase) const {
    return rho[phase < int(rho.size()) ? phase : 0];
  }
};

/// Scalar discrete gradient operators G_a = Gbroken_a + L_a in coefficient
/// form (blocks N x N over elements), following the one-sided intraphase
/// flux u-hat = u^- and the viscosity-upwinded interphase flux.
std::array<BlockCsr, 3> assemble_gradient(const MeshLevel& level, int p,
                                          const std::vector<double>& mu_elem);

/// Mixed-degree gradient Gtilde_a = P_down G_a (blocks p^d x (p+1)^d).
BlockCsr assemble_mixed_gradient(const BlockCsr& G, int p, int d);

StokesOperator assemble_stokes(const MeshLevel& level, int p, int gamma,
                               const PhaseCoefficients& coeff,
                               double delta = 0.0,
                               const FluxConfig& flux = {});

Vec assemble_rhs(const StokesOperator& op, const SourceData& sources);

} // namespace stokesmg
