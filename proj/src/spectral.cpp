#include "gsdn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gsdn {

namespace {

double offdiag_frob(const Tensor& a) {
  const int n = a.rows();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

}  // namespace

SpectralBasis eig_sym(const Tensor& matrix, SpectralSource source) {
  const int n = matrix.rows();
  if (n < 1 || matrix.cols() != n) throw std::invalid_argument("eig_sym: matrix must be square, N >= 1");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(matrix(i, j) - matrix(j, i)) > 1e-10)
        throw std::invalid_argument("eig_sym: input not symmetric within 1e-10");

  Tensor a = matrix;
  Tensor v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  const double fro = frob_norm(matrix);
  const double stop = 1e-12 * fro;
  bool converged = (offdiag_frob(a) <= stop) || fro == 0.0;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
          }
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    converged = offdiag_frob(a) <= stop;
  }
  if (!converged) {
    throw std::runtime_error("eig_sym: no convergence after 100 sweeps, off-diagonal residual " +
                             std::to_string(offdiag_frob(a)));
  }

  SpectralBasis basis;
  basis.source = source;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return evals[x] > evals[y]; });

  basis.eigenvalues.resize(n);
  basis.eigenvectors = Tensor(n, n);
  for (int k = 0; k < n; ++k) {
    const int src = order[k];
    basis.eigenvalues[k] = evals[src];
    int arg = 0;
    double best = 0.0;
    for (int r = 0; r < n; ++r) {
      const double m = std::fabs(v(r, src));
      if (m > best) {
        best = m;
        arg = r;
      }
    }
    const double flip = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int r = 0; r < n; ++r) basis.eigenvectors(r, k) = flip * v(r, src);
  }
  return basis;
}

VertexCoords vertex_coordinates(const SpectralBasis& basis, int p) {
  const int n = basis.eigenvectors.rows();
  if (p < 1 || p > n) throw std::invalid_argument("vertex_coordinates: p out of range");
  VertexCoords vc;
  vc.p = p;
  vc.coords = Tensor(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) vc.coords(i, j) = basis.eigenvectors(i, j);
  return vc;
}

Tensor gft(const SpectralBasis& basis, const Tensor& x) {
  if (x.rows() != basis.eigenvectors.rows()) throw std::invalid_argument("gft: row-count mismatch");
  return matmul(transpose(basis.eigenvectors), x);
}

Tensor igft(const SpectralBasis& basis, const Tensor& xhat) {
  if (xhat.rows() != basis.eigenvectors.rows()) throw std::invalid_argument("igft: row-count mismatch");
  return matmul(basis.eigenvectors, xhat);
}

std::vector<double> design_rank_preserving_filter(const std::vector<double>& eigenvalues, int filter_length) {
  std::vector<double> distinct;
  for (double ev : eigenvalues) {
    if (std::fabs(ev) < 1e-9)
      throw std::invalid_argument("design_rank_preserving_filter: rank preservation requires a nonzero spectrum");
    bool found = false;
    for (double d : distinct) found |= std::fabs(d - ev) < 1e-9;
    if (!found) distinct.push_back(ev);
  }
  const int q = static_cast<int>(distinct.size());
  if (filter_length < q)
    throw std::invalid_argument("design_rank_preserving_filter: filter length below distinct eigenvalue count");

  // Rows M[k, l] = lambda_k^(l+1); minimum-norm solution h = M^T (M M^T)^{-1} 1.
  Tensor m(q, filter_length);
  for (int k = 0; k < q; ++k) {
    double pw = 1.0;
    for (int l = 0; l < filter_length; ++l) {
      pw *= distinct[k];
      m(k, l) = pw;
    }
  }
  Tensor gram = matmul(m, transpose(m));
  Tensor ones(q, 1);
  for (int k = 0; k < q; ++k) ones(k, 0) = 1.0;
  Tensor y = lu_solve(gram, ones);
  Tensor h = matmul(transpose(m), y);

  Tensor check = matmul(m, h);
  for (int k = 0; k < q; ++k)
    if (std::fabs(check(k, 0) - 1.0) > 1e-8)
      throw std::runtime_error("design_rank_preserving_filter: least-squares residual above 1e-8");
  std::vector<double> coeffs(filter_length);
  for (int l = 0; l < filter_length; ++l) coeffs[l] = h(l, 0);
  return coeffs;
}

}  // namespace gsdn
