#include "lpbm/stencil.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace lpbm {

struct StencilCache {
  FitOptions options;
  std::once_flag once;
  std::unique_ptr<TangentStencil> stencil;
};

std::shared_ptr<StencilCache> make_stencil_cache() { return std::make_shared<StencilCache>(); }

void set_fit_options(SphereGrid &grid, FitOptions options) {
  grid.stencil_cache = std::make_shared<StencilCache>();
  grid.stencil_cache->options = options;
}

const TangentStencil &tangent_stencil(const SphereGrid &grid) {
  if (!grid.stencil_cache) throw std::logic_error("tangent_stencil: grid not finalized");
  auto &cache = *grid.stencil_cache;
  std::call_once(cache.once, [&] {
    cache.stencil = std::make_unique<TangentStencil>(build_tangent_stencil(grid, cache.options));
  });
  return *cache.stencil;
}

namespace {

FitOptions resolve(const SphereGrid &grid, FitOptions opt, int tangent_dim) {
  // Sextic fits on 32 neighbours keep the k <= 4 spectrum within ~2e-4 at
  // frequency 16; coarse grids cannot host that many points inside a chart.
  if (opt.degree == 0) {
    if (tangent_dim == 1)
      opt.degree = 4;
    else
      opt.degree = grid.size() >= 600 ? 6 : grid.size() >= 300 ? 4 : 2;
  }
  if (opt.neighbors == 0) {
    if (tangent_dim == 1)
      opt.neighbors = 2 * opt.degree;
    else
      opt.neighbors = opt.degree == 6 ? 32 : opt.degree == 4 ? 24 : 12;
  }
  return opt;
}

// Exponent pairs of the fitted monomials (constant term excluded).
std::vector<std::array<int, 2>> monomials(int tangent_dim, int degree) {
  std::vector<std::array<int, 2>> out;
  for (int total = 1; total <= degree; ++total)
    if (tangent_dim == 1)
      out.push_back({total, 0});
    else
      for (int a = total; a >= 0; --a) out.push_back({a, total - a});
  return out;
}

struct LocalFit {
  std::vector<int> neighbors;
  Eigen::MatrixXd grad;    // d x k
  Eigen::MatrixXd hessian; // d*d x k
};

Eigen::VectorXd chart_point(const Eigen::Ref<const Eigen::VectorXd> &x, const Eigen::VectorXd &axis,
                            const Eigen::MatrixXd &tangent) {
  return tangent.transpose() * x / x.dot(axis);
}

LocalFit fit_at(const SphereGrid &grid, const Eigen::VectorXd &axis, const Eigen::MatrixXd &tangent, int i,
                const FitOptions &opt) {
  const int d = static_cast<int>(tangent.cols());
  const Eigen::VectorXd xi = grid.node(i);
  std::vector<std::pair<double, int>> cand;
  cand.reserve(grid.size());
  for (int m = 0; m < grid.size(); ++m) {
    if (m == i || grid.node(m).dot(axis) < 0.05) continue;
    cand.emplace_back((grid.node(m) - xi).squaredNorm(), m);
  }
  const int k = opt.neighbors;
  if (static_cast<int>(cand.size()) < k) throw std::domain_error("chart fit: not enough neighbors in chart");
  std::partial_sort(cand.begin(), cand.begin() + k, cand.end());

  const auto mono = monomials(d, opt.degree);
  const int nm = static_cast<int>(mono.size());
  if (k < nm) throw std::domain_error("chart fit: fewer neighbors than monomials");
  const Eigen::VectorXd zi = chart_point(xi, axis, tangent);
  Eigen::MatrixXd s(d, k);
  LocalFit fit;
  for (int c = 0; c < k; ++c) {
    fit.neighbors.push_back(cand[c].second);
    s.col(c) = chart_point(grid.node(cand[c].second), axis, tangent) - zi;
  }
  const double scale = s.colwise().norm().maxCoeff();
  s /= scale;
  Eigen::MatrixXd a(k, nm);
  for (int c = 0; c < k; ++c)
    for (int t = 0; t < nm; ++t)
      a(c, t) = std::pow(s(0, c), mono[t][0]) * (d == 2 ? std::pow(s(1, c), mono[t][1]) : 1.0);
  const Eigen::MatrixXd pinv = a.completeOrthogonalDecomposition().pseudoInverse();

  auto row_of = [&](int e0, int e1) {
    for (int t = 0; t < nm; ++t)
      if (mono[t][0] == e0 && mono[t][1] == e1) return t;
    throw std::logic_error("monomial missing");
  };
  fit.grad.resize(d, k);
  fit.hessian.resize(d * d, k);
  if (d == 1) {
    fit.grad.row(0) = pinv.row(row_of(1, 0)) / scale;
    fit.hessian.row(0) = 2.0 * pinv.row(row_of(2, 0)) / (scale * scale);
  } else {
    fit.grad.row(0) = pinv.row(row_of(1, 0)) / scale;
    fit.grad.row(1) = pinv.row(row_of(0, 1)) / scale;
    const double s2 = scale * scale;
    fit.hessian.row(0) = 2.0 * pinv.row(row_of(2, 0)) / s2;
    fit.hessian.row(1) = pinv.row(row_of(1, 1)) / s2;
    fit.hessian.row(2) = fit.hessian.row(1);
    fit.hessian.row(3) = 2.0 * pinv.row(row_of(0, 2)) / s2;
  }
  return fit;
}

void chart_frame(int ambient_dim, int chart, Eigen::VectorXd &axis, Eigen::MatrixXd &tangent) {
  const int k = chart / 2;
  axis = Eigen::VectorXd::Zero(ambient_dim);
  axis[k] = (chart % 2) ? 1.0 : -1.0;
  tangent = Eigen::MatrixXd::Zero(ambient_dim, ambient_dim - 1);
  for (int c = 0, col = 0; c < ambient_dim; ++c)
    if (c != k) tangent(c, col++) = 1.0;
}

Eigen::MatrixXd tangent_frame(const Eigen::VectorXd &x, const Eigen::MatrixXd &tangent) {
  const Eigen::Index n = x.size();
  const Eigen::MatrixXd projected = (Eigen::MatrixXd::Identity(n, n) - x * x.transpose()) * tangent;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(projected);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n - 1);
}

Eigen::MatrixXd as_matrix(const Eigen::Ref<const Eigen::VectorXd> &col_major, int d) {
  return Eigen::Map<const Eigen::MatrixXd>(col_major.data(), d, d);
}

} // namespace

int chart_count(int ambient_dim) { return 2 * ambient_dim; }

int owning_chart(const Eigen::Ref<const Eigen::VectorXd> &x) {
  Eigen::Index k;
  x.cwiseAbs().maxCoeff(&k);
  return 2 * static_cast<int>(k) + (x[k] > 0 ? 1 : 0);
}

ChartStencil build_chart(const SphereGrid &grid, int chart, FitOptions options, double min_cos) {
  if (chart < 0 || chart >= chart_count(grid.ambient_dim)) throw std::out_of_range("build_chart: chart out of range");
  ChartStencil cs;
  cs.chart = chart;
  chart_frame(grid.ambient_dim, chart, cs.axis, cs.tangent);
  const FitOptions opt = resolve(grid, options, grid.ambient_dim - 1);
  for (int i = 0; i < grid.size(); ++i)
    if (grid.node(i).dot(cs.axis) >= min_cos) cs.nodes.push_back(i);
  cs.z.resize(grid.ambient_dim - 1, cs.nodes.size());
  for (std::size_t c = 0; c < cs.nodes.size(); ++c) {
    const int i = cs.nodes[c];
    cs.z.col(c) = chart_point(grid.node(i), cs.axis, cs.tangent);
    LocalFit f = fit_at(grid, cs.axis, cs.tangent, i, opt);
    cs.fits.push_back({std::move(f.neighbors), std::move(f.grad), std::move(f.hessian)});
  }
  return cs;
}

ChartSamples chart_transfer(const Eigen::Ref<const Eigen::VectorXd> &h, const ChartStencil &chart) {
  const int d = static_cast<int>(chart.tangent.cols());
  ChartSamples out;
  out.nodes = chart.nodes;
  out.z = chart.z;
  const Eigen::Index m = static_cast<Eigen::Index>(chart.nodes.size());
  out.u.resize(m);
  out.du.resize(d, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const int i = chart.nodes[c];
    if (!(h[i] > 0)) throw std::domain_error("chart_transfer: support values must be positive");
    const auto &fit = chart.fits[c];
    Eigen::VectorXd diff(fit.neighbors.size());
    for (std::size_t t = 0; t < fit.neighbors.size(); ++t) diff[t] = h[fit.neighbors[t]] - h[i];
    const Eigen::VectorXd z = chart.z.col(c);
    const double rho = std::sqrt(1.0 + z.squaredNorm());
    const Eigen::VectorXd drho = z / rho;
    const Eigen::MatrixXd d2rho =
        Eigen::MatrixXd::Identity(d, d) / rho - z * z.transpose() / (rho * rho * rho);
    const Eigen::VectorXd dh = fit.grad * diff;
    const Eigen::MatrixXd d2h = as_matrix(fit.hessian * diff, d);
    out.u[c] = rho * h[i];
    out.du.col(c) = h[i] * drho + rho * dh;
    out.d2u.push_back(h[i] * d2rho + drho * dh.transpose() + dh * drho.transpose() + rho * d2h);
  }
  return out;
}

Eigen::MatrixXd spectral_second_derivative(int n) {
  const double step = 2.0 * std::numbers::pi / n;
  Eigen::MatrixXd d2(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d2(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * step * step) - 1.0 / 6.0;
      } else {
        const double s = std::sin((i - j) * step / 2.0);
        d2(i, j) = -(((i - j) % 2 == 0) ? 1.0 : -1.0) / (2.0 * s * s);
      }
    }
  return d2;
}

TangentStencil build_tangent_stencil(const SphereGrid &grid, FitOptions options) {
  const int n = grid.ambient_dim;
  const int d = n - 1;
  const auto &reps = grid.representatives();
  const auto &pair = grid.pair_of();
  const Eigen::Index pairs = grid.pair_count();
  TangentStencil st;
  st.tangent_dim = d;

  if (n == 2) {
    if (grid.size() % 2 != 0) throw std::invalid_argument("tangent stencil: odd circle grid");
    const Eigen::MatrixXd d2 = spectral_second_derivative(static_cast<int>(grid.size()));
    Eigen::MatrixXd folded = Eigen::MatrixXd::Zero(pairs, pairs);
    for (Eigen::Index j = 0; j < pairs; ++j) {
      for (Eigen::Index m = 0; m < grid.size(); ++m) folded(j, pair[m]) += d2(reps[j], m);
      folded(j, j) += 1.0;
    }
    st.components.push_back(folded.sparseView(0.0, 0.0));
    st.owner_chart.assign(pairs, -1);
    return st;
  }

  st.fit = resolve(grid, options, d);
  std::vector<Eigen::Triplet<double>> trip[3];
  st.owner_chart.resize(pairs);
  for (Eigen::Index j = 0; j < pairs; ++j) {
    const int i = reps[j];
    const Eigen::VectorXd x = grid.node(i);
    const int chart = owning_chart(x);
    st.owner_chart[j] = chart;
    Eigen::VectorXd axis;
    Eigen::MatrixXd tangent;
    chart_frame(n, chart, axis, tangent);
    const LocalFit fit = fit_at(grid, axis, tangent, i, st.fit);

    const Eigen::VectorXd z = chart_point(x, axis, tangent);
    const double rho = std::sqrt(1.0 + z.squaredNorm());
    const Eigen::VectorXd drho = z / rho;
    const Eigen::MatrixXd d2rho =
        Eigen::MatrixXd::Identity(d, d) / rho - z * z.transpose() / (rho * rho * rho);
    const Eigen::MatrixXd frame = tangent_frame(x, tangent);
    const Eigen::MatrixXd g = (frame.transpose() * tangent).inverse();

    // W = rho G^T D^2u G with D^2u linear in the node values.
    Eigen::MatrixXd self = rho * g.transpose() * d2rho * g;
    auto emit = [&](int node, const Eigen::MatrixXd &c) {
      const int col = pair[node];
      trip[0].emplace_back(j, col, c(0, 0));
      trip[1].emplace_back(j, col, c(0, 1));
      trip[2].emplace_back(j, col, c(1, 1));
    };
    for (std::size_t t = 0; t < fit.neighbors.size(); ++t) {
      const Eigen::VectorXd gm = fit.grad.col(t);
      const Eigen::MatrixXd hm = as_matrix(fit.hessian.col(t), d);
      const Eigen::MatrixXd c =
          rho * g.transpose() * (drho * gm.transpose() + gm * drho.transpose() + rho * hm) * g;
      self -= c;
      emit(fit.neighbors[t], c);
    }
    emit(i, self);
  }
  for (auto &t : trip) {
    SparseRowMatrix m(pairs, pairs);
    m.setFromTriplets(t.begin(), t.end());
    st.components.push_back(std::move(m));
  }
  return st;
}

double TangentField::det(Eigen::Index j) const {
  if (tangent_dim == 1) return entries(j, 0);
  return entries(j, 0) * entries(j, 2) - entries(j, 1) * entries(j, 1);
}

double TangentField::min_eigenvalue(Eigen::Index j) const {
  if (tangent_dim == 1) return entries(j, 0);
  const double mean = 0.5 * (entries(j, 0) + entries(j, 2));
  const double half = 0.5 * (entries(j, 0) - entries(j, 2));
  return mean - std::hypot(half, entries(j, 1));
}

Eigen::RowVectorXd TangentField::cofactor(Eigen::Index j) const {
  if (tangent_dim == 1) return Eigen::RowVectorXd::Ones(1);
  Eigen::RowVectorXd c(3);
  c << entries(j, 2), -2.0 * entries(j, 1), entries(j, 0);
  return c;
}

Eigen::MatrixXd TangentField::matrix(Eigen::Index j) const {
  if (tangent_dim == 1) return Eigen::MatrixXd::Constant(1, 1, entries(j, 0));
  Eigen::MatrixXd w(2, 2);
  w << entries(j, 0), entries(j, 1), entries(j, 1), entries(j, 2);
  return w;
}

TangentField evaluate(const TangentStencil &stencil, const Eigen::Ref<const Eigen::VectorXd> &pair_values) {
  TangentField tf;
  tf.tangent_dim = stencil.tangent_dim;
  tf.entries.resize(pair_values.size(), static_cast<Eigen::Index>(stencil.components.size()));
  for (std::size_t c = 0; c < stencil.components.size(); ++c) tf.entries.col(c) = stencil.components[c] * pair_values;
  return tf;
}

SparseRowMatrix contract(const TangentStencil &stencil, const Eigen::Ref<const Eigen::MatrixXd> &weights) {
  SparseRowMatrix out(stencil.components[0].rows(), stencil.components[0].cols());
  for (std::size_t c = 0; c < stencil.components.size(); ++c) {
    const Eigen::VectorXd w = weights.col(c);
    out += SparseRowMatrix(w.asDiagonal() * stencil.components[c]);
  }
  return out;
}

} // namespace lpbm
