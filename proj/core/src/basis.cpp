#include "stokesmg/basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace stokesmg {

namespace {

// Standard Legendre P_k and derivative on [-1,1] via the three-term
// recurrence.
void legendre_pair(int n, double t, std::vector<double>& val,
                   std::vector<double>& der) {
  val.assign(n + 1, 0.0);
  der.assign(n + 1, 0.0);
  val[0] = 1.0;
  if (n == 0) return;
  val[1] = t;
  der[1] = 1.0;
  for (int k = 1; k < n; ++k) {
    val[k + 1] = ((2 * k + 1) * t * val[k] - k * val[k - 1]) / (k + 1);
    der[k + 1] = der[k - 1] + (2 * k + 1) * val[k];
  }
}

} // namespace

GaussRule gauss_rule(int npts) {
  if (npts < 1) throw std::invalid_argument("gauss_rule: npts < 1");
  GaussRule r;
  r.x.resize(npts);
  r.w.resize(npts);
  std::vector<double> val, der;
  for (int i = 0; i < npts; ++i) {
    // Chebyshev initial guess, Newton refinement on P_n(t) = 0.
    double t = -std::cos(M_PI * (i + 0.75) / (npts + 0.5));
    for (int it = 0; it < 60; ++it) {
      legendre_pair(npts, t, val, der);
      double dt = val[npts] / der[npts];
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    legendre_pair(npts, t, val, der);
    double w = 2.0 / ((1.0 - t * t) * der[npts] * der[npts]);
    r.x[i] = 0.5 * (t + 1.0); // map [-1,1] -> [0,1]
    r.w[i] = 0.5 * w;
  }
  return r;
}

Mat legendre_values(int p, const Vec& pts) {
  Mat out(p + 1, pts.size());
  std::vector<double> val, der;
  for (int j = 0; j < pts.size(); ++j) {
    legendre_pair(p, 2.0 * pts[j] - 1.0, val, der);
    for (int k = 0; k <= p; ++k)
      out(k, j) = std::sqrt(2.0 * k + 1.0) * val[k];
  }
  return out;
}

Mat legendre_derivs(int p, const Vec& pts) {
  Mat out(p + 1, pts.size());
  std::vector<double> val, der;
  for (int j = 0; j < pts.size(); ++j) {
    legendre_pair(p, 2.0 * pts[j] - 1.0, val, der);
    for (int k = 0; k <= p; ++k)
      out(k, j) = 2.0 * std::sqrt(2.0 * k + 1.0) * der[k];
  }
  return out;
}

const Basis1d& basis1d(int p) {
  static std::map<int, Basis1d> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;

  Basis1d b;
  b.p = p;
  Vec ends(2);
  ends << 0.0, 1.0;
  Mat ev = legendre_values(p, ends);
  b.at0 = ev.col(0);
  b.at1 = ev.col(1);

  GaussRule q = gauss_rule(p + 2);
  Mat v = legendre_values(p, q.x);
  Mat dv = legendre_derivs(p, q.x);
  b.deriv = v * q.w.asDiagonal() * dv.transpose();

  for (int s = 0; s < 2; ++s) {
    Vec mapped = (q.x.array() + double(s)).matrix() * 0.5;
    Mat vc = legendre_values(p, mapped);
    b.child[s] = v * q.w.asDiagonal() * vc.transpose();
  }
  return cache.emplace(p, std::move(b)).first->second;
}

ModalBasis::ModalBasis(int p, int d) : p_(p), d_(d) {
  if (d < 1 || d > 3) throw std::invalid_argument("ModalBasis: dim must be 1..3");
  n_ = 1;
  for (int a = 0; a < d; ++a) n_ *= p + 1;
  modes_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    int rem = k;
    for (int a = 0; a < 3; ++a) {
      if (a < d) {
        modes_[k][a] = rem % (p + 1);
        rem /= (p + 1);
      } else {
        modes_[k][a] = 0;
      }
    }
  }
  const Basis1d& b1 = basis1d(p);
  for (int a = 0; a < d; ++a) {
    Mat K = Mat::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        double prod = 1.0;
        for (int ax = 0; ax < d; ++ax) {
          if (ax == a)
            prod *= b1.deriv(modes_[j][ax], modes_[k][ax]);
          else
            prod *= (modes_[j][ax] == modes_[k][ax]) ? 1.0 : 0.0;
        }
        K(j, k) = prod;
      }
    grad_[a] = std::move(K);
  }
  if (p >= 1) {
    for (int k = 0; k < n_; ++k) {
      bool low = true;
      for (int a = 0; a < d; ++a)
        if (modes_[k][a] > p - 1) low = false;
      if (low) low_modes_.push_back(k);
    }
  }
}

Mat ModalBasis::face_coupling(int axis, int row_side, int col_side) const {
  const Basis1d& b1 = basis1d(p_);
  const Vec& vr = row_side == 0 ? b1.at0 : b1.at1;
  const Vec& vc = col_side == 0 ? b1.at0 : b1.at1;
  Mat F = Mat::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) {
      double prod = 1.0;
      for (int ax = 0; ax < d_; ++ax) {
        if (ax == axis)
          prod *= vr[modes_[j][ax]] * vc[modes_[k][ax]];
        else
          prod *= (modes_[j][ax] == modes_[k][ax]) ? 1.0 : 0.0;
      }
      F(j, k) = prod;
    }
  return F;
}

Mat ModalBasis::face_values(int axis, int side, const GaussRule& rule) const {
  const Basis1d& b1 = basis1d(p_);
  const Vec& ev = side == 0 ? b1.at0 : b1.at1;
  Mat v1 = legendre_values(p_, rule.x);
  int q = int(rule.x.size());
  int nq = 1;
  for (int a = 0; a < d_ - 1; ++a) nq *= q;
  Mat out(n_, nq);
  for (int pt = 0; pt < nq; ++pt) {
    int rem = pt;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < d_; ++a) {
      if (a == axis) continue;
      idx[a] = rem % q;
      rem /= q;
    }
    for (int k = 0; k < n_; ++k) {
      double prod = 1.0;
      for (int a = 0; a < d_; ++a)
        prod *= (a == axis) ? ev[modes_[k][a]] : v1(modes_[k][a], idx[a]);
      out(k, pt) = prod;
    }
  }
  return out;
}

Mat ModalBasis::volume_values(const GaussRule& rule) const {
  Mat v1 = legendre_values(p_, rule.x);
  int q = int(rule.x.size());
  int nq = 1;
  for (int a = 0; a < d_; ++a) nq *= q;
  Mat out(n_, nq);
  for (int pt = 0; pt < nq; ++pt) {
    int rem = pt;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < d_; ++a) {
      idx[a] = rem % q;
      rem /= q;
    }
    for (int k = 0; k < n_; ++k) {
      double prod = 1.0;
      for (int a = 0; a < d_; ++a) prod *= v1(modes_[k][a], idx[a]);
      out(k, pt) = prod;
    }
  }
  return out;
}

Mat ModalBasis::child_transform(int child_mask) const {
  const Basis1d& b1 = basis1d(p_);
  Mat T = Mat::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) {
      double prod = 1.0;
      for (int a = 0; a < d_; ++a) {
        int s = (child_mask >> a) & 1;
        prod *= b1.child[s](modes_[j][a], modes_[k][a]);
      }
      T(j, k) = prod;
    }
  return T;
}

Vec ModalBasis::eval(const Vec& xi) const {
  Mat v1(p_ + 1, d_);
  for (int a = 0; a < d_; ++a) {
    Vec pt(1);
    pt << xi[a];
    v1.col(a) = legendre_values(p_, pt);
  }
  Vec out(n_);
  for (int k = 0; k < n_; ++k) {
    double prod = 1.0;
    for (int a = 0; a < d_; ++a) prod *= v1(modes_[k][a], a);
    out[k] = prod;
  }
  return out;
}

const ModalBasis& modal_basis(int p, int d) {
  static std::map<std::pair<int, int>, ModalBasis> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(p, d);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, ModalBasis(p, d)).first->second;
}

ElementMatrices reference_matrices(int p, int d) {
  if (p < 1)
    throw std::invalid_argument(
        "reference_matrices: p >= 1 required (pressure degree is p-1)");
  const ModalBasis& vb = modal_basis(p, d);
  const ModalBasis& pb = modal_basis(p - 1, d);
  ElementMatrices em;
  em.p = p;
  em.d = d;
  em.mass = em.mass_bar = em.mass_mu = em.mass_rho = 1.0;
  for (int a = 0; a < d; ++a) em.g_broken[a] = vb.ref_grad(a);
  const auto& low = vb.low_modes();
  em.p_down = Mat::Zero(pb.size(), vb.size());
  for (int i = 0; i < int(low.size()); ++i) em.p_down(i, low[i]) = 1.0;
  em.p_up = em.p_down.transpose();
  return em;
}

ElementMatrices scale_to_element(const ElementMatrices& ref, double h,
                                 double mu_e, double rho_e) {
  if (h <= 0) throw std::invalid_argument("scale_to_element: h <= 0");
  if (mu_e < 0 || rho_e < 0)
    throw std::invalid_argument("scale_to_element: negative coefficient");
  ElementMatrices em = ref;
  double vol = std::pow(h, ref.d);
  em.mass = ref.mass * vol;
  em.mass_bar = ref.mass_bar * vol;
  em.mass_mu = ref.mass_mu * vol * mu_e;
  em.mass_rho = ref.mass_rho * vol * rho_e;
  double gscale = std::pow(h, ref.d - 1);
  for (int a = 0; a < ref.d; ++a) em.g_broken[a] = ref.g_broken[a] * gscale;
  return em;
}

} // namespace stokesmg
