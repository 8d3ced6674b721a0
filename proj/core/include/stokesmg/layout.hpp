#pragma once

#include <cmath>

namespace stokesmg {

/// Per-element degree-of-freedom layout for the coupled velocity/pressure
/// state: [u | v | (w) | p], velocity components in Q_p, pressure in Q_{p-1}.
struct DofLayout {
  int dim = 2;
  int degree = 1;
  int n_vel = 0;   // (p+1)^d modes per velocity component
  int n_pre = 0;   // p^d pressure modes
  int block = 0;   // d*n_vel + n_pre

  DofLayout() = default;
  DofLayout(int d, int p) : dim(d), degree(p) {
    n_vel = 1;
    n_pre = 1;
    for (int a = 0; a < d; ++a) {
      n_vel *= p + 1;
      n_pre *= p;
    }
    block = d * n_vel + n_pre;
  }

  int vel_offset(int comp) const { return comp * n_vel; }
  int pre_offset() const { return dim * n_vel; }
};

} // namespace stokesmg
