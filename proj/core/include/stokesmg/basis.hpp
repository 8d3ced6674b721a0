#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "stokesmg/layout.hpp"

namespace stokesmg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Gauss-Legendre rule on [0,1].
struct GaussRule {
  Vec x;
  Vec w;
};

GaussRule gauss_rule(int npts);

/// Values of the orthonormal shifted Legendre polynomials P~_0..P~_p at the
/// given points of [0,1]; row k holds P~_k.  The basis satisfies
/// \int_0^1 P~_j P~_k = delta_jk with P~_0 = 1.
Mat legendre_values(int p, const Vec& pts);
Mat legendre_derivs(int p, const Vec& pts);

/// One-dimensional building blocks for degree p.
struct Basis1d {
  int p;
  Vec at0, at1;            // endpoint values P~_k(0), P~_k(1)
  Mat deriv;               // D[j][k] = \int_0^1 P~_j P~'_k
  std::array<Mat, 2> child; // child[s][j][k] = \int_0^1 P~_j(x) P~_k((x+s)/2)
};

const Basis1d& basis1d(int p);

/// Tensor-product modal basis Q_p on the reference element [0,1]^d.
/// Mode index k enumerates multi-indices with axis 0 fastest; k = 0 is the
/// constant mode.
class ModalBasis {
public:
  ModalBasis(int p, int d);

  int degree() const { return p_; }
  int dim() const { return d_; }
  int size() const { return n_; }

  int mode_component(int k, int axis) const { return modes_[k][axis]; }

  /// Reference broken-gradient matrix K_a[j][k] = \int phi_j d_a phi_k.
  const Mat& ref_grad(int axis) const { return grad_[axis]; }

  /// Trace outer-product matrix for a face orthogonal to `axis`:
  /// F[j][k] = phi_j|row_side * phi_k|col_side integrated over the reference
  /// face (area 1).  side: 0 = face at x_a = 0, 1 = face at x_a = 1.
  Mat face_coupling(int axis, int row_side, int col_side) const;

  /// Trace values of all modes on a face quadrature grid.  Returns an
  /// n x q^(d-1) matrix; quadrature follows the tensor rule over the
  /// in-face axes in increasing axis order.
  Mat face_values(int axis, int side, const GaussRule& rule) const;

  /// Values of all modes at the tensor quadrature grid (n x q^d).
  Mat volume_values(const GaussRule& rule) const;

  /// Child reparametrisation: coefficients of the parent polynomial
  /// expressed on child `q` (bitmask of upper/lower halves per axis).
  Mat child_transform(int child_mask) const;

  /// Indices of the Q_{p-1} modes inside Q_p (empty when p = 0).
  const std::vector<int>& low_modes() const { return low_modes_; }

  /// Evaluate all modes at a reference point.
  Vec eval(const Vec& xi) const;

private:
  int p_, d_, n_;
  std::vector<std::array<int, 3>> modes_;
  std::array<Mat, 3> grad_;
  std::vector<int> low_modes_;
};

const ModalBasis& modal_basis(int p, int d);

/// Element-level matrices of the discretisation, at reference or physical
/// scale.  M is diagonal (orthonormal modal basis), so it is representable
/// by a single scalar per space.
struct ElementMatrices {
  int p, d;
  double mass = 1.0;      // M = mass * I on Q_p
  double mass_bar = 1.0;  // Mbar = mass_bar * I on Q_{p-1}
  double mass_mu = 1.0;   // M_mu = mass_mu * I
  double mass_rho = 1.0;  // M_rho = mass_rho * I
  std::array<Mat, 3> g_broken; // weak broken-gradient blocks
  Mat p_down; // Q_p -> Q_{p-1} L2 projection (mode truncation)
  Mat p_up;   // Q_{p-1} -> Q_p injection

  Mat broken_grad_coeff(int axis) const { return g_broken[axis] / mass; }
};

ElementMatrices reference_matrices(int p, int d);
ElementMatrices scale_to_element(const ElementMatrices& ref, double h,
                                 double mu_e, double rho_e);

} // namespace stokesmg
