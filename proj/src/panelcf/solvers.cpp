// Iterative solvers: coordinate descent (lasso / elastic net), accelerated
// projected gradient on the simplex, alternating ridge for the HPP form.

#include "panelcf/estimators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace panelcf {

namespace {

struct Regression {
  Matrix x;  // design
  Vector y;  // target
};

Regression regression_for(const Blocks& blocks, Direction d) {
  check_blocks(blocks);
  if (d == Direction::Hz) return {blocks.y0, blocks.y_t};
  return {blocks.y0.transpose(), blocks.y_n};
}

void set_weights(FitResult& r, const Blocks& blocks, Direction d, Vector w) {
  if (d == Direction::Hz) {
    r.point_hz = blocks.y_n.dot(w);
    r.alpha_hat = std::move(w);
  } else {
    r.point_vt = blocks.y_t.dot(w);
    r.beta_hat = std::move(w);
  }
}

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Homotopy path for min w'Gw - 2c'w + 2 mu ||w||_1 (G already carries l2),
// followed from mu = ||c||_inf down to the target. Empty if a step breaks down.
std::optional<Vector> lasso_homotopy(const Matrix& g, const Vector& c, double target) {
  const Index p = c.size();
  Vector w = Vector::Zero(p);
  Vector r = c;  // c - G w
  double mu = p > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
  if (mu <= target) return w;
  std::vector<Index> act;
  std::vector<bool> in(static_cast<std::size_t>(p), false);
  Index j0 = 0;
  c.cwiseAbs().maxCoeff(&j0);
  act.push_back(j0);
  in[static_cast<std::size_t>(j0)] = true;
  const Index max_steps = 50 * (p + 1);
  Index dropped = -1;  // may not re-enter on the very next step
  for (Index step = 0; step < max_steps; ++step) {
    const Index k = static_cast<Index>(act.size());
    Matrix ga(k, k);
    Vector s(k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) ga(a, b) = g(act[a], act[b]);
      s(a) = r(act[a]) >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::LDLT<Matrix> ldlt(ga);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    const Vector d = ldlt.solve(s);  // dw_A per unit decrease of mu
    if (!d.allFinite() || (ga * d - s).norm() > 1e-8 * (1.0 + s.norm())) return std::nullopt;
    Vector dir = Vector::Zero(p);
    for (Index a = 0; a < k; ++a) dir(act[a]) = d(a);
    const Vector gd = g * dir;

    double delta = mu - target;
    Index enter = -1, leave = -1;
    for (Index j = 0; j < p; ++j) {
      if (in[static_cast<std::size_t>(j)] || j == dropped) continue;
      for (double t : {(mu - r(j)) / (1.0 - gd(j)), (mu + r(j)) / (1.0 + gd(j))}) {
        if (t > 1e-14 * mu && t < delta) {
          delta = t;
          enter = j;
          leave = -1;
        }
      }
    }
    for (Index a = 0; a < k; ++a) {
      const Index j = act[a];
      if (d(a) == 0.0) continue;
      const double t = -w(j) / d(a);
      if (t > 0.0 && t < delta) {
        delta = t;
        leave = j;
        enter = -1;
      }
    }
    w += delta * dir;
    r -= delta * gd;
    mu -= delta;
    if (enter < 0 && leave < 0) return w;
    dropped = leave;
    if (enter >= 0) {
      act.push_back(enter);
      in[static_cast<std::size_t>(enter)] = true;
    } else {
      w(leave) = 0.0;
      act.erase(std::find(act.begin(), act.end(), leave));
      in[static_cast<std::size_t>(leave)] = false;
      if (act.empty()) return std::nullopt;
    }
  }
  return std::nullopt;
}

// min ||y - X w||^2 + l1 ||w||_1 + l2 ||w||^2 by cyclic coordinate descent.
// Sweeps start from the homotopy solution when one is available, and every
// few sweeps the sign pattern is frozen and the support problem solved exactly;
// collinear designs otherwise crawl.
Vector coordinate_descent(const Regression& reg, double l1, double l2, const SolverConfig& cfg,
                          std::vector<double>& trace, Index& iters) {
  const Index p = reg.x.cols();
  const Matrix g = reg.x.transpose() * reg.x;
  const Vector c = reg.x.transpose() * reg.y;
  Vector w = Vector::Zero(p);
  Vector grad = c;  // X'(y - Xw)
  auto objective = [&](const Vector& v) {
    return (reg.y - reg.x * v).squaredNorm() + l1 * v.lpNorm<1>() + l2 * v.squaredNorm();
  };
  auto sweep = [&]() {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double denom = g(j, j) + l2;
      double next = 0.0;
      if (denom > 0.0) next = soft(grad(j) + g(j, j) * w(j), 0.5 * l1) / denom;
      const double delta = next - w(j);
      if (delta != 0.0) {
        grad -= g.col(j) * delta;
        w(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  };
  auto converged = [&](double change) { return change < cfg.tol * std::max(1.0, w.lpNorm<Eigen::Infinity>()); };

  // Exact minimiser with the current signs held fixed, if it keeps them.
  auto polish = [&]() -> std::optional<Vector> {
    std::vector<Index> act;
    for (Index j = 0; j < p; ++j)
      if (w(j) != 0.0) act.push_back(j);
    if (act.empty()) return std::nullopt;
    const Index k = static_cast<Index>(act.size());
    Matrix ga(k, k);
    Vector rhs(k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) ga(a, b) = g(act[a], act[b]);
      ga(a, a) += l2;
      rhs(a) = c(act[a]) - 0.5 * l1 * (w(act[a]) > 0.0 ? 1.0 : -1.0);
    }
    const Vector z = ga.completeOrthogonalDecomposition().solve(rhs);
    if (!z.allFinite() || (ga * z - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return std::nullopt;
    Vector out = Vector::Zero(p);
    for (Index a = 0; a < k; ++a) {
      if ((z(a) > 0.0) != (w(act[a]) > 0.0)) return std::nullopt;
      out(act[a]) = z(a);
    }
    return out;
  };

  double fx = objective(w);
  trace.push_back(fx);
  if (l1 > 0.0) {
    const Matrix gl = g + l2 * Matrix::Identity(p, p);
    if (auto z = lasso_homotopy(gl, c, 0.5 * l1); z && z->allFinite()) {
      const double fz = objective(*z);
      if (fz <= fx) {
        w = std::move(*z);
        grad = c - g * w;
        fx = fz;
        trace.push_back(fx);
      }
    }
  }
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    const double change = sweep();
    fx = objective(w);
    trace.push_back(fx);
    iters = it;
    if (converged(change)) return w;
    if (it % 10 == 0) {
      if (auto z = polish()) {
        const double fz = objective(*z);
        if (fz <= fx) {
          w = std::move(*z);
          grad = c - g * w;
          trace.back() = fz;
          fx = fz;
        }
      }
    }
  }
  fail(ErrorCode::NotConverged,
       "coordinate descent did not converge in " + std::to_string(cfg.max_iters) + " sweeps");
}

}  // namespace

Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "cannot project onto an empty simplex");
  Vector u = v;
  std::sort(u.data(), u.data() + n, std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u(j);
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u(j) - t > 0.0) tau = t;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

FitResult fit_lasso(const Blocks& blocks, Direction direction, double lambda1, const SolverConfig& cfg) {
  validate(cfg);
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) {
    fail(ErrorCode::NonPositiveLambda, "lasso lambda1 must be positive and finite");
  }
  const Regression reg = regression_for(blocks, direction);
  FitResult r;
  r.method = Lasso{lambda1, direction};
  Vector w = coordinate_descent(reg, lambda1, 0.0, cfg, r.objective_trace, r.iterations);
  set_weights(r, blocks, direction, std::move(w));
  return r;
}

FitResult fit_elastic_net(const Blocks& blocks, Direction direction, double lambda1, double lambda2,
                          const SolverConfig& cfg) {
  validate(cfg);
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    fail(ErrorCode::NonPositiveLambda, "elastic net penalties must be nonnegative and finite");
  }
  if (lambda1 == 0.0 && lambda2 == 0.0) {
    fail(ErrorCode::NonPositiveLambda, "elastic net needs lambda1 > 0 or lambda2 > 0");
  }
  const Regression reg = regression_for(blocks, direction);
  FitResult r;
  r.method = ElasticNet{lambda1, lambda2, direction};
  Vector w = coordinate_descent(reg, lambda1, lambda2, cfg, r.objective_trace, r.iterations);
  set_weights(r, blocks, direction, std::move(w));
  return r;
}

FitResult fit_simplex(const Blocks& blocks, Direction direction, double lambda, const SolverConfig& cfg) {
  validate(cfg);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::NonPositiveLambda, "simplex lambda must be nonnegative and finite");
  }
  const Regression reg = regression_for(blocks, direction);
  const Index p = reg.x.cols();
  const double tol = std::max(cfg.tol, 1e-9);
  const Matrix g = reg.x.transpose() * reg.x;
  const Vector c = reg.x.transpose() * reg.y;

  double lip = 0.0;
  if (p > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    lip = 2.0 * (std::max(es.eigenvalues().maxCoeff(), 0.0) + lambda);
  }
  if (!(lip > 0.0)) lip = 1.0;  // zero objective: every feasible point is optimal

  auto objective = [&](const Vector& w) {
    return (reg.y - reg.x * w).squaredNorm() + lambda * w.squaredNorm();
  };
  auto gradient = [&](const Vector& w) -> Vector { return 2.0 * (g * w - c + lambda * w); };
  auto kkt = [&](const Vector& w) {
    return (w - project_simplex(w - gradient(w) / lip)).lpNorm<Eigen::Infinity>();
  };

  // Equality-constrained solve on a guessed support, dropping negatives.
  auto polish = [&](const Vector& w) -> std::optional<Vector> {
    const Vector step = project_simplex(w - gradient(w) / lip);
    std::vector<Index> support;
    for (Index j = 0; j < p; ++j) {
      if (step(j) > 0.0 || w(j) > 1e-12) support.push_back(j);
    }
    while (!support.empty()) {
      const auto m = static_cast<Index>(support.size());
      Matrix kkt_mat = Matrix::Zero(m + 1, m + 1);
      Vector rhs(m + 1);
      for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b < m; ++b) kkt_mat(a, b) = 2.0 * g(support[a], support[b]);
        kkt_mat(a, a) += 2.0 * lambda;
        kkt_mat(a, m) = 1.0;
        kkt_mat(m, a) = 1.0;
        rhs(a) = 2.0 * c(support[a]);
      }
      rhs(m) = 1.0;
      const Vector sol = kkt_mat.completeOrthogonalDecomposition().solve(rhs);
      std::vector<Index> keep;
      for (Index a = 0; a < m; ++a) {
        if (sol(a) > 0.0) keep.push_back(support[a]);
      }
      if (static_cast<Index>(keep.size()) == m) {
        Vector out = Vector::Zero(p);
        for (Index a = 0; a < m; ++a) out(support[a]) = sol(a);
        if (!out.allFinite()) return std::nullopt;
        return out;
      }
      support = std::move(keep);
    }
    return std::nullopt;
  };

  FitResult r;
  r.method = Simplex{lambda, direction};
  Vector x = Vector::Constant(p, 1.0 / static_cast<double>(p));
  double fx = objective(x);
  r.objective_trace.push_back(fx);
  if (kkt(x) < tol) {
    set_weights(r, blocks, direction, std::move(x));
    return r;
  }

  Vector y = x;
  double t = 1.0;
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    const Vector z = project_simplex(y - gradient(y) / lip);
    const double fz = objective(z);
    const Vector x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    r.iterations = it;

    if (it % 20 == 0 || it == 1) {
      if (auto pw = polish(x)) {
        const double fp = objective(*pw);
        if (fp <= fx + 1e-12 * (1.0 + std::abs(fx)) && kkt(*pw) < tol) {
          r.objective_trace.push_back(fp);
          set_weights(r, blocks, direction, std::move(*pw));
          return r;
        }
      }
    }
    r.objective_trace.push_back(fx);
    if (kkt(x) < tol) {
      set_weights(r, blocks, direction, std::move(x));
      return r;
    }
  }
  fail(ErrorCode::NotConverged,
       "simplex solver did not reach KKT residual " + std::to_string(tol) + " in " +
           std::to_string(cfg.max_iters) + " iterations");
}

HppResult hpp_alternating_ridge(const Blocks& blocks, Direction direction, int K, double lambda,
                                const SolverConfig& cfg) {
  validate(cfg);
  if (K < 1) fail(ErrorCode::InvalidArgument, "K must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::NonPositiveLambda, "HPP lambda must be positive and finite");
  }
  const Regression reg = regression_for(blocks, direction);
  const Index p = reg.x.cols();
  const Matrix g = reg.x.transpose() * reg.x;
  const Vector c = reg.x.transpose() * reg.y;
  const double pen = lambda / K;

  HppResult out;
  out.factors.assign(static_cast<std::size_t>(K), Vector::Ones(p));
  auto product_except = [&](int skip) {
    Vector d = Vector::Ones(p);
    for (int k = 0; k < K; ++k) {
      if (k != skip) d = d.cwiseProduct(out.factors[k]);
    }
    return d;
  };
  auto objective = [&]() {
    const Vector w = product_except(-1);
    double f = (reg.y - reg.x * w).squaredNorm();
    for (const auto& fk : out.factors) f += pen * fk.squaredNorm();
    return f;
  };

  double prev = objective();
  out.objective_trace.push_back(prev);
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    for (int k = 0; k < K; ++k) {
      const Vector d = product_except(k);
      Matrix m = d.asDiagonal() * g * d.asDiagonal();
      m.diagonal().array() += pen;
      out.factors[k] = m.ldlt().solve(d.cwiseProduct(c));
    }
    const double cur = objective();
    out.objective_trace.push_back(cur);
    out.iterations = it;
    if (std::abs(prev - cur) <= cfg.tol * std::abs(prev)) {
      out.weights = product_except(-1);
      return out;
    }
    prev = cur;
  }
  fail(ErrorCode::NotConverged,
       "alternating ridge did not converge in " + std::to_string(cfg.max_iters) + " sweeps");
}

}  // namespace panelcf
