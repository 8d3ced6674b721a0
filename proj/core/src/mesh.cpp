#include "stokesmg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stokesmg {

int MeshLevel::num_interphase_faces() const {
  int n = 0;
  for (const auto& f : faces)
    if (f.kind == FaceKind::interphase) ++n;
  return n;
}

int MeshLevel::num_boundary_faces() const {
  int n = 0;
  for (const auto& f : faces)
    if (f.kind == FaceKind::boundary_dirichlet || f.kind == FaceKind::boundary_stress)
      ++n;
  return n;
}

double MeshLevel::face_area() const {
  return std::pow(h, dim - 1);
}

MeshLevel build_mesh(int dim, int cells_per_dim, BcKind bc,
                     const PhaseSpec& phase_spec) {
  if (dim < 2 || dim > 3) throw std::invalid_argument("build_mesh: dim must be 2 or 3");
  if (cells_per_dim < 1) throw std::invalid_argument("build_mesh: cells_per_dim < 1");

  MeshLevel m;
  m.dim = dim;
  m.cells_per_dim = cells_per_dim;
  m.h = 1.0 / cells_per_dim;
  m.bc = bc;

  const int ne = m.num_elements();
  m.phase.assign(ne, 0);
  if (phase_spec)
    for (int e = 0; e < ne; ++e) m.phase[e] = phase_spec(m.center(e));

  const int n = cells_per_dim;
  for (int a = 0; a < dim; ++a) {
    for (int e = 0; e < ne; ++e) {
      auto c = m.coords(e);
      if (c[a] + 1 < n || bc == BcKind::periodic) {
        Face f;
        f.minus = e;
        auto cp = c;
        cp[a] = (c[a] + 1) % n;
        f.plus = m.index(cp);
        f.axis = a;
        f.sign = +1;
        f.kind = (m.phase[f.minus] == m.phase[f.plus]) ? FaceKind::intraphase
                                                       : FaceKind::interphase;
        m.faces.push_back(f);
      }
    }
    if (bc != BcKind::periodic) {
      FaceKind bk = bc == BcKind::dirichlet ? FaceKind::boundary_dirichlet
                                            : FaceKind::boundary_stress;
      for (int e = 0; e < ne; ++e) {
        auto c = m.coords(e);
        if (c[a] == 0) {
          Face f;
          f.minus = e;
          f.axis = a;
          f.sign = -1;
          f.kind = bk;
          m.faces.push_back(f);
        }
        if (c[a] == n - 1) {
          Face f;
          f.minus = e;
          f.axis = a;
          f.sign = +1;
          f.kind = bk;
          m.faces.push_back(f);
        }
      }
    }
  }
  return m;
}

PhaseSpec box_phase_spec(int dim, int cells_per_dim, double lo, double hi) {
  const double h = 1.0 / cells_per_dim;
  auto aligned = [&](double x) {
    double r = x / h;
    return std::abs(r - std::round(r)) < 1e-12;
  };
  if (!aligned(lo) || !aligned(hi))
    throw std::invalid_argument(
        "box_phase_spec: phase boundary must align with element faces");
  return [=](const std::array<double, 3>& c) {
    for (int a = 0; a < dim; ++a)
      if (c[a] < lo || c[a] > hi) return 1;
    return 0;
  };
}

MeshHierarchy build_hierarchy(const MeshLevel& finest) {
  int n = finest.cells_per_dim;
  if ((n & (n - 1)) != 0)
    throw std::invalid_argument("build_hierarchy: cells_per_dim must be a power of two");

  MeshHierarchy hier;
  hier.levels.push_back(finest);
  while (hier.levels.back().cells_per_dim > 1) {
    const MeshLevel& fine = hier.levels.back();
    const int nc = fine.cells_per_dim / 2;
    const int d = fine.dim;

    // Coarse phase: majority over the 2^d children, ties to the lower id.
    std::vector<int> phase(std::pow(nc, d) + 0.5);
    MeshLevel probe; // index helpers for the coarse grid
    probe.dim = d;
    probe.cells_per_dim = nc;
    const int children = 1 << d;
    for (int ec = 0; ec < int(phase.size()); ++ec) {
      auto cc = probe.coords(ec);
      std::vector<int> counts;
      for (int q = 0; q < children; ++q) {
        std::array<int, 3> cf{0, 0, 0};
        for (int a = 0; a < d; ++a) cf[a] = 2 * cc[a] + ((q >> a) & 1);
        int ph = fine.phase[fine.index(cf)];
        if (ph >= int(counts.size())) counts.resize(ph + 1, 0);
        counts[ph]++;
      }
      int best = 0;
      for (int ph = 1; ph < int(counts.size()); ++ph)
        if (counts[ph] > counts[best]) best = ph;
      phase[ec] = best;
    }

    MeshLevel coarse = build_mesh(d, nc, fine.bc,
                                  [&](const std::array<double, 3>& c) {
                                    std::array<int, 3> ci{0, 0, 0};
                                    for (int a = 0; a < d; ++a)
                                      ci[a] = std::min(int(c[a] * nc), nc - 1);
                                    return phase[probe.index(ci)];
                                  });
    hier.levels.push_back(std::move(coarse));
  }
  return hier;
}

std::vector<int> color_elements(
    int num_elements, const std::function<std::vector<int>(int)>& neighbors) {
  std::vector<int> color(num_elements, -1);
  std::vector<char> used;
  for (int e = 0; e < num_elements; ++e) {
    used.assign(used.size(), 0);
    for (int nb : neighbors(e)) {
      if (nb == e) continue;
      int c = color[nb];
      if (c >= 0) {
        if (c >= int(used.size())) used.resize(c + 1, 0);
        used[c] = 1;
      }
    }
    int c = 0;
    while (c < int(used.size()) && used[c]) ++c;
    if (c >= int(used.size())) used.resize(c + 1, 0);
    color[e] = c;
  }
  return color;
}

} // namespace stokesmg
