#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace stokesmg {

enum class BcKind { periodic, dirichlet, stress };
enum class FaceKind { intraphase, interphase, boundary_dirichlet, boundary_stress };

/// A mesh face.  Interior faces (intraphase/interphase) carry the normal
/// +e_axis with `minus` the element on the negative side; boundary faces
/// have plus = -1 and `sign` the outward normal direction along `axis`.
struct Face {
  int minus = -1;
  int plus = -1;
  int axis = 0;
  int sign = +1;
  FaceKind kind = FaceKind::intraphase;
};

/// One uniform Cartesian level of the hierarchy on (0,1)^d.
struct MeshLevel {
  int dim = 2;
  int cells_per_dim = 1;
  double h = 1.0;
  BcKind bc = BcKind::periodic;
  std::vector<int> phase;  // per element
  std::vector<Face> faces;

  int num_elements() const {
    int n = 1;
    for (int a = 0; a < dim; ++a) n *= cells_per_dim;
    return n;
  }

  std::array<int, 3> coords(int e) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      c[a] = e % cells_per_dim;
      e /= cells_per_dim;
    }
    return c;
  }

  int index(const std::array<int, 3>& c) const {
    int e = 0;
    for (int a = dim - 1; a >= 0; --a) e = e * cells_per_dim + c[a];
    return e;
  }

  /// Lower-left corner of element e.
  std::array<double, 3> origin(int e) const {
    auto c = coords(e);
    return {c[0] * h, c[1] * h, c[2] * h};
  }

  std::array<double, 3> center(int e) const {
    auto o = origin(e);
    for (int a = 0; a < dim; ++a) o[a] += 0.5 * h;
    return o;
  }

  int num_interphase_faces() const;
  int num_boundary_faces() const;
  double face_area() const;
};

using PhaseSpec = std::function<int(const std::array<double, 3>&)>;

MeshLevel build_mesh(int dim, int cells_per_dim, BcKind bc,
                     const PhaseSpec& phase_spec = {});

/// Phase spec for an interior box phase (phase 0 inside, 1 outside).
/// Throws if the box walls are not aligned with element faces.
PhaseSpec box_phase_spec(int dim, int cells_per_dim, double lo, double hi);

struct MeshHierarchy {
  std::vector<MeshLevel> levels; // finest first
};

MeshHierarchy build_hierarchy(const MeshLevel& finest);

/// Greedy first-fit colouring of the element connectivity graph given by
/// `neighbors(e)` (off-diagonal block sparsity of the operator).  Elements
/// are processed in index order; adjacent elements never share a colour.
std::vector<int> color_elements(
    int num_elements, const std::function<std::vector<int>(int)>& neighbors);

} // namespace stokesmg
