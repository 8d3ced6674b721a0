#include "stokesmg/ldg.hpp"

#include <cmath>
#include <stdexcept>

namespace stokesmg {

double upwind_lambda(double mu_minus, double mu_plus) {
  if (mu_minus <= 0.0 || mu_plus <= 0.0)
    throw std::invalid_argument("upwind_lambda: viscosities must be positive");
  if (mu_minus < mu_plus) return 0.0;
  if (mu_minus > mu_plus) return 1.0;
  return 0.5;
}

namespace {

// Faces grouped by the element that owns weak-form rows through them.
struct FaceUse {
  int face;
  bool as_minus; // rows taken with the minus-side trace
};

std::vector<std::vector<FaceUse>> faces_by_row(const MeshLevel& level) {
  std::vector<std::vector<FaceUse>> out(level.num_elements());
  for (int fi = 0; fi < int(level.faces.size()); ++fi) {
    const Face& f = level.faces[fi];
    switch (f.kind) {
      case FaceKind::intraphase:
        out[f.plus].push_back({fi, false});
        break;
      case FaceKind::interphase:
        out[f.minus].push_back({fi, true});
        out[f.plus].push_back({fi, false});
        break;
      case FaceKind::boundary_dirichlet:
        out[f.minus].push_back({fi, true});
        break;
      case FaceKind::boundary_stress:
        break;
    }
  }
  return out;
}

// Effective lambda of a face for flux assembly; interior faces use the
// viscosity-upwind rule, boundaries are handled by their own branches.
double face_lambda(const Face& f, const std::vector<double>& mu) {
  double mm = mu[f.minus];
  double mp = mu[f.plus];
  if (mm < mp) return 0.0;
  if (mm > mp) return 1.0;
  return 0.5;
}

} // namespace

std::array<BlockCsr, 3> assemble_gradient(const MeshLevel& level, int p,
                                          const std::vector<double>& mu_elem) {
  const ModalBasis& vb = modal_basis(p, level.dim);
  const int d = level.dim;
  const int N = vb.size();
  const int ne = level.num_elements();
  const double h = level.h;

  // Reference face couplings FC[axis][row_side][col_side].
  Mat fc[3][2][2];
  for (int a = 0; a < d; ++a)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) fc[a][r][c] = vb.face_coupling(a, r, c);

  auto rows = faces_by_row(level);

  std::array<BlockCsr, 3> G;
  for (int a = 0; a < d; ++a) {
    G[a] = BlockCsr::from_rows(ne, ne, N, N, [&](int e, std::map<int, Mat>& acc) {
      auto add = [&](int j, const Mat& m) {
        auto it = acc.find(j);
        if (it == acc.end())
          acc.emplace(j, m);
        else
          it->second += m;
      };
      add(e, vb.ref_grad(a) / h);
      for (const FaceUse& fu : rows[e]) {
        const Face& f = level.faces[fu.face];
        if (f.axis != a) continue;
        switch (f.kind) {
          case FaceKind::intraphase:
            // int_F (u+ - u-) w+ . n with n = +e_a
            add(f.plus, fc[a][0][0] / h);
            add(f.minus, -fc[a][0][1] / h);
            break;
          case FaceKind::interphase: {
            double lam = face_lambda(f, mu_elem);
            if (fu.as_minus) {
              add(f.plus, (1.0 - lam) * fc[a][1][0] / h);
              add(f.minus, -(1.0 - lam) * fc[a][1][1] / h);
            } else {
              add(f.plus, lam * fc[a][0][0] / h);
              add(f.minus, -lam * fc[a][0][1] / h);
            }
            break;
          }
          case FaceKind::boundary_dirichlet: {
            int s = f.sign > 0 ? 1 : 0;
            add(f.minus, -double(f.sign) * fc[a][s][s] / h);
            break;
          }
          case FaceKind::boundary_stress:
            break;
        }
      }
    });
  }
  return G;
}

BlockCsr assemble_mixed_gradient(const BlockCsr& G, int p, int d) {
  const ModalBasis& vb = modal_basis(p, d);
  return select_block_rows(G, vb.low_modes(), 1.0);
}

namespace {

BlockCsr assemble_penalty(const MeshLevel& level, int p,
                          const std::vector<double>& mu_elem,
                          const PenaltyConfig& pen) {
  const ModalBasis& vb = modal_basis(p, level.dim);
  const int N = vb.size();
  const int ne = level.num_elements();
  const double h = level.h;
  const double area = std::pow(h, level.dim - 1);

  Mat fc[3][2][2];
  for (int a = 0; a < level.dim; ++a)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) fc[a][r][c] = vb.face_coupling(a, r, c);

  auto rows = faces_by_row(level);
  return BlockCsr::from_rows(ne, ne, N, N, [&](int e, std::map<int, Mat>& acc) {
    auto add = [&](int j, const Mat& m) {
      auto it = acc.find(j);
      if (it == acc.end())
        acc.emplace(j, m);
      else
        it->second += m;
    };
    for (const FaceUse& fu : rows[e]) {
      const Face& f = level.faces[fu.face];
      int a = f.axis;
      switch (f.kind) {
        case FaceKind::boundary_dirichlet: {
          double tau = pen.tau_boundary(p, mu_elem[f.minus], h);
          int s = f.sign > 0 ? 1 : 0;
          add(f.minus, tau * area * fc[a][s][s]);
          break;
        }
        case FaceKind::interphase: {
          double tau = pen.tau_interphase(mu_elem[f.minus], mu_elem[f.plus], h);
          if (fu.as_minus) {
            add(f.minus, tau * area * fc[a][1][1]);
            add(f.plus, -tau * area * fc[a][1][0]);
          } else {
            add(f.minus, -tau * area * fc[a][0][1]);
            add(f.plus, tau * area * fc[a][0][0]);
          }
          break;
        }
        case FaceKind::intraphase:
          if (pen.tau_intraphase != 0.0) {
            double tau = pen.tau_intraphase;
            if (fu.as_minus) {
              add(f.minus, tau * area * fc[a][1][1]);
              add(f.plus, -tau * area * fc[a][1][0]);
            } else {
              add(f.minus, -tau * area * fc[a][0][1]);
              add(f.plus, tau * area * fc[a][0][0]);
            }
          }
          break;
        case FaceKind::boundary_stress:
          break;
      }
    }
  });
}

// C rows: row i = sum_e At(i,e) * w_e * B(e,:), streamed and interned.
BlockCsr product_rows(const BlockCsr& At, const std::vector<double>& w,
                      const BlockCsr& B) {
  return BlockCsr::from_rows(
      At.block_rows(), B.block_cols(), At.brows(), B.bcols(),
      [&](int i, std::map<int, Mat>& acc) {
        const auto& aptr = At.row_ptr();
        const auto& bptr = B.row_ptr();
        for (int sa = aptr[i]; sa < aptr[i + 1]; ++sa) {
          int e = At.col_idx()[sa];
          double we = w[e];
          if (we == 0.0) continue;
          Mat left = At.block_at(sa) * we;
          for (int sb = bptr[e]; sb < bptr[e + 1]; ++sb) {
            int j = B.col_idx()[sb];
            Mat contrib = left * B.block_at(sb);
            auto it = acc.find(j);
            if (it == acc.end())
              acc.emplace(j, std::move(contrib));
            else
              it->second += contrib;
          }
        }
      });
}

BlockCsr select_cols_scaled(const BlockCsr& A, const std::vector<int>& keep,
                            double scale) {
  return BlockCsr::from_rows(
      A.block_rows(), A.block_cols(), A.brows(), int(keep.size()),
      [&](int i, std::map<int, Mat>& acc) {
        const auto& ptr = A.row_ptr();
        for (int s = ptr[i]; s < ptr[i + 1]; ++s) {
          const Mat& b = A.block_at(s);
          Mat sel(A.brows(), keep.size());
          for (int c = 0; c < int(keep.size()); ++c) sel.col(c) = b.col(keep[c]);
          acc.emplace(A.col_idx()[s], sel * scale);
        }
      });
}

} // namespace

StokesOperator assemble_stokes(const MeshLevel& level, int p, int gamma,
                               const PhaseCoefficients& coeff, double delta,
                               const FluxConfig& flux) {
  if (p < 1) throw std::invalid_argument("assemble_stokes: p >= 1 required");
  if (gamma != 0 && gamma != 1)
    throw std::invalid_argument("assemble_stokes: gamma must be 0 or 1");
  const int d = level.dim;
  const int ne = level.num_elements();
  const double h = level.h;
  const double vol = std::pow(h, d);

  StokesOperator op;
  op.level = level;
  op.layout = DofLayout(d, p);
  op.gamma = gamma;
  op.delta = delta;
  op.mu.resize(ne);
  op.rho.resize(ne);
  for (int e = 0; e < ne; ++e) {
    op.mu[e] = coeff.of_mu(level.phase[e]);
    op.rho[e] = coeff.of_rho(level.phase[e]);
  }
  if (delta > 0.0)
    for (int e = 0; e < ne; ++e)
      if (op.rho[e] < 0)
        throw std::invalid_argument("assemble_stokes: negative density");

  auto G = assemble_gradient(level, p, op.mu);
  std::array<BlockCsr, 3> Gt;
  for (int a = 0; a < d; ++a) Gt[a] = G[a].transposed();

  std::vector<double> w_mu(ne);
  for (int e = 0; e < ne; ++e) w_mu[e] = op.mu[e] * vol;

  BlockCsr Epen = assemble_penalty(level, p, op.mu, flux.penalty);

  // Viscous diagonal-component block: sum_a G_a^T M_mu G_a + penalty.
  const ModalBasis& vb = modal_basis(p, d);
  const int N = vb.size();
  BlockCsr Avv = BlockCsr::from_rows(ne, ne, N, N, [&](int i, std::map<int, Mat>& acc) {
    for (int a = 0; a < d; ++a) {
      const auto& aptr = Gt[a].row_ptr();
      const auto& bptr = G[a].row_ptr();
      for (int sa = aptr[i]; sa < aptr[i + 1]; ++sa) {
        int e = Gt[a].col_idx()[sa];
        Mat left = Gt[a].block_at(sa) * w_mu[e];
        for (int sb = bptr[e]; sb < bptr[e + 1]; ++sb) {
          int j = G[a].col_idx()[sb];
          Mat contrib = left * G[a].block_at(sb);
          auto it = acc.find(j);
          if (it == acc.end())
            acc.emplace(j, std::move(contrib));
          else
            it->second += contrib;
        }
      }
    }
    const auto& eptr = Epen.row_ptr();
    for (int s = eptr[i]; s < eptr[i + 1]; ++s) {
      int j = Epen.col_idx()[s];
      auto it = acc.find(j);
      if (it == acc.end())
        acc.emplace(j, Epen.block_at(s));
      else
        it->second += Epen.block_at(s);
    }
  });

  // Stress-form cross blocks S[i][j] = G_j^T M_mu G_i.
  std::array<std::array<BlockCsr, 3>, 3> S;
  if (gamma == 1)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) S[i][j] = product_rows(Gt[j], w_mu, G[i]);

  // Pressure coupling: D_a = Mbar Gtilde_a = h^d P_down G_a and its adjoint.
  const auto& low = vb.low_modes();
  std::array<BlockCsr, 3> Dlow, DlowT;
  for (int a = 0; a < d; ++a) {
    Dlow[a] = select_block_rows(G[a], low, vol);
    DlowT[a] = select_cols_scaled(Gt[a], low, vol);
  }

  const DofLayout& L = op.layout;
  const int n = L.block;
  op.A = BlockCsr::from_rows(ne, ne, n, n, [&](int e, std::map<int, Mat>& acc) {
    auto block = [&](int j) -> Mat& {
      auto it = acc.find(j);
      if (it == acc.end()) it = acc.emplace(j, Mat::Zero(n, n)).first;
      return it->second;
    };
    const auto& vptr = Avv.row_ptr();
    for (int s = vptr[e]; s < vptr[e + 1]; ++s) {
      int j = Avv.col_idx()[s];
      Mat& B = block(j);
      for (int c = 0; c < d; ++c)
        B.block(L.vel_offset(c), L.vel_offset(c), L.n_vel, L.n_vel) +=
            Avv.block_at(s);
    }
    if (gamma == 1)
      for (int ci = 0; ci < d; ++ci)
        for (int cj = 0; cj < d; ++cj) {
          const BlockCsr& Sij = S[ci][cj];
          const auto& sptr = Sij.row_ptr();
          for (int s = sptr[e]; s < sptr[e + 1]; ++s)
            block(Sij.col_idx()[s])
                .block(L.vel_offset(ci), L.vel_offset(cj), L.n_vel, L.n_vel) +=
                Sij.block_at(s);
        }
    for (int a = 0; a < d; ++a) {
      const auto& dptr = Dlow[a].row_ptr();
      for (int s = dptr[e]; s < dptr[e + 1]; ++s)
        block(Dlow[a].col_idx()[s])
            .block(L.pre_offset(), L.vel_offset(a), L.n_pre, L.n_vel) -=
            Dlow[a].block_at(s);
      const auto& tptr = DlowT[a].row_ptr();
      for (int s = tptr[e]; s < tptr[e + 1]; ++s)
        block(DlowT[a].col_idx()[s])
            .block(L.vel_offset(a), L.pre_offset(), L.n_vel, L.n_pre) -=
            DlowT[a].block_at(s);
    }
    if (delta > 0.0) {
      Mat& B = block(e);
      double shift = op.rho[e] * vol / delta;
      for (int c = 0; c < d; ++c)
        B.block(L.vel_offset(c), L.vel_offset(c), L.n_vel, L.n_vel) +=
            shift * Mat::Identity(L.n_vel, L.n_vel);
    }
  });

  op.G = std::move(G);
  op.Gt = std::move(Gt);
  return op;
}

Vec assemble_rhs(const StokesOperator& op, const SourceData& sources) {
  const MeshLevel& level = op.level;
  const DofLayout& L = op.layout;
  const int d = level.dim;
  const int p = L.degree;
  const int ne = level.num_elements();
  const double h = level.h;
  const double vol = std::pow(h, d);
  const double area = std::pow(h, d - 1);
  const ModalBasis& vb = modal_basis(p, d);
  const ModalBasis& pb = modal_basis(p - 1, d);
  const PenaltyConfig pen{};

  Vec b = Vec::Zero(op.num_dofs());

  auto vel_seg = [&](int e, int c) {
    return b.segment(Eigen::Index(e) * L.block + L.vel_offset(c), L.n_vel);
  };
  auto pre_seg = [&](int e) {
    return b.segment(Eigen::Index(e) * L.block + L.pre_offset(), L.n_pre);
  };

  // Volume sources.
  if (sources.f_vec || sources.f_div) {
    GaussRule rule = gauss_rule(p + 2);
    Mat bv = vb.volume_values(rule);
    Mat bp = pb.volume_values(rule);
    const int q1 = int(rule.x.size());
    int nq = 1;
    for (int a = 0; a < d; ++a) nq *= q1;
    std::vector<std::array<double, 3>> xi(nq);
    Vec wq(nq);
    for (int pt = 0; pt < nq; ++pt) {
      int rem = pt;
      double w = 1.0;
      for (int a = 0; a < d; ++a) {
        int ia = rem % q1;
        rem /= q1;
        xi[pt][a] = rule.x[ia];
        w *= rule.w[ia];
      }
      wq[pt] = w;
    }
    for (int e = 0; e < ne; ++e) {
      auto o = level.origin(e);
      Mat fvals = Mat::Zero(nq, d);
      Vec dvals = Vec::Zero(nq);
      for (int pt = 0; pt < nq; ++pt) {
        std::array<double, 3> x = o;
        for (int a = 0; a < d; ++a) x[a] += h * xi[pt][a];
        if (sources.f_vec) {
          Eigen::Vector3d f = sources.f_vec(x);
          for (int c = 0; c < d; ++c) fvals(pt, c) = wq[pt] * f[c];
        }
        if (sources.f_div) dvals[pt] = wq[pt] * sources.f_div(x);
      }
      for (int c = 0; c < d; ++c) vel_seg(e, c) += vol * (bv * fvals.col(c));
      pre_seg(e) += vol * (bp * dvals);
    }
  }

  // Face sources: penalties, Neumann liftings, and the Dirichlet-like
  // moment vectors transported by G^T below.
  const bool any_face = bool(sources.g_dirichlet) || bool(sources.g_jump) ||
                        bool(sources.h_stress) || bool(sources.h_jump);
  std::array<std::array<Vec, 3>, 3> Jg; // moment vectors [comp][axis]
  if (any_face) {
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        Jg[c][a] = Vec::Zero(Eigen::Index(ne) * L.n_vel);

    GaussRule rule = gauss_rule(p + 2);
    const int q1 = int(rule.x.size());
    int nq = 1;
    for (int a = 0; a < d - 1; ++a) nq *= q1;
    Mat tv[3][2], tp[3][2];
    for (int a = 0; a < d; ++a)
      for (int s = 0; s < 2; ++s) {
        tv[a][s] = vb.face_values(a, s, rule);
        tp[a][s] = pb.face_values(a, s, rule);
      }
    Vec wq(nq);
    std::vector<std::array<int, 3>> fidx(nq);
    for (int pt = 0; pt < nq; ++pt) {
      int rem = pt;
      double w = 1.0;
      fidx[pt] = {0, 0, 0};
      for (int a = 0; a < d - 1; ++a) {
        fidx[pt][a] = rem % q1;
        rem /= q1;
        w *= rule.w[fidx[pt][a]];
      }
      wq[pt] = w;
    }

    for (const Face& f : level.faces) {
      if (f.kind == FaceKind::intraphase) continue;
      const int a = f.axis;
      auto o = level.origin(f.minus);
      const int s_minus = (f.kind == FaceKind::interphase || f.sign > 0) ? 1 : 0;
      // Physical quadrature points on the face.
      std::vector<std::array<double, 3>> x(nq);
      for (int pt = 0; pt < nq; ++pt) {
        x[pt] = o;
        x[pt][a] += s_minus * h;
        int slot = 0;
        for (int ax = 0; ax < d; ++ax) {
          if (ax == a) continue;
          x[pt][ax] += h * rule.x[fidx[pt][slot]];
          ++slot;
        }
      }
      auto moments = [&](const Mat& traces, const Mat& vals, int comp) {
        return Vec(area * (traces * (wq.asDiagonal() * vals.col(comp))));
      };

      if (f.kind == FaceKind::boundary_dirichlet) {
        if (!sources.g_dirichlet) continue;
        Mat gv = Mat::Zero(nq, d);
        for (int pt = 0; pt < nq; ++pt) {
          Eigen::Vector3d g = sources.g_dirichlet(x[pt], a, f.sign);
          for (int c = 0; c < d; ++c) gv(pt, c) = g[c];
        }
        double tau = pen.tau_boundary(p, op.mu[f.minus], h);
        for (int c = 0; c < d; ++c) {
          Vec m = moments(tv[a][s_minus], gv, c);
          vel_seg(f.minus, c) += tau * m;
          Jg[c][a].segment(Eigen::Index(f.minus) * L.n_vel, L.n_vel) +=
              double(f.sign) * m;
        }
        pre_seg(f.minus) += double(f.sign) * moments(tp[a][s_minus], gv, a);
      } else if (f.kind == FaceKind::boundary_stress) {
        if (!sources.h_stress) continue;
        Mat hv = Mat::Zero(nq, d);
        for (int pt = 0; pt < nq; ++pt) {
          Eigen::Vector3d hd = sources.h_stress(x[pt], a, f.sign);
          for (int c = 0; c < d; ++c) hv(pt, c) = hd[c];
        }
        for (int c = 0; c < d; ++c)
          vel_seg(f.minus, c) += moments(tv[a][s_minus], hv, c);
      } else { // interphase
        double lam = upwind_lambda(op.mu[f.minus], op.mu[f.plus]);
        double tau = pen.tau_interphase(op.mu[f.minus], op.mu[f.plus], h);
        if (sources.g_jump) {
          Mat gv = Mat::Zero(nq, d);
          for (int pt = 0; pt < nq; ++pt) {
            Eigen::Vector3d g = sources.g_jump(x[pt], a);
            for (int c = 0; c < d; ++c) gv(pt, c) = g[c];
          }
          for (int c = 0; c < d; ++c) {
            Vec m1 = moments(tv[a][1], gv, c);
            Vec m0 = moments(tv[a][0], gv, c);
            vel_seg(f.minus, c) += tau * m1;
            vel_seg(f.plus, c) -= tau * m0;
            Jg[c][a].segment(Eigen::Index(f.minus) * L.n_vel, L.n_vel) +=
                (1.0 - lam) * m1;
            Jg[c][a].segment(Eigen::Index(f.plus) * L.n_vel, L.n_vel) += lam * m0;
          }
          pre_seg(f.minus) += (1.0 - lam) * moments(tp[a][1], gv, a);
          pre_seg(f.plus) += lam * moments(tp[a][0], gv, a);
        }
        if (sources.h_jump) {
          Mat hv = Mat::Zero(nq, d);
          for (int pt = 0; pt < nq; ++pt) {
            Eigen::Vector3d hd = sources.h_jump(x[pt], a);
            for (int c = 0; c < d; ++c) hv(pt, c) = hd[c];
          }
          for (int c = 0; c < d; ++c) {
            vel_seg(f.minus, c) += lam * moments(tv[a][1], hv, c);
            vel_seg(f.plus, c) += (1.0 - lam) * moments(tv[a][0], hv, c);
          }
        }
      }
    }

    // Transport the Dirichlet-like moments: b_u,i -= sum_a G_a^T mu (J_ia + g J_ai).
    for (int c = 0; c < d; ++c) {
      for (int a = 0; a < d; ++a) {
        Vec t = Jg[c][a];
        if (op.gamma == 1) t += Jg[a][c];
        for (int e = 0; e < ne; ++e)
          t.segment(Eigen::Index(e) * L.n_vel, L.n_vel) *= op.mu[e];
        Vec contrib(Eigen::Index(ne) * L.n_vel);
        op.Gt[a].matvec(t, contrib);
        for (int e = 0; e < ne; ++e)
          vel_seg(e, c) -= contrib.segment(Eigen::Index(e) * L.n_vel, L.n_vel);
      }
    }
  }
  return b;
}

} // namespace stokesmg
