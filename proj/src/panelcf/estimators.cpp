#include "panelcf/estimators.hpp"

#include <cmath>
#include <sstream>

namespace panelcf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_cache(const Blocks& blocks, const SpectralCache& cache) {
  check_blocks(blocks);
  if (cache.rows != blocks.y0.rows() || cache.cols != blocks.y0.cols()) {
    fail(ErrorCode::DimensionMismatch, "spectral cache shape does not match y0");
  }
}

// Spectral filter f(s): a = V diag(f) U' y_T, b = U diag(f) V' y_N.
FitResult spectral_fit(const Blocks& blocks, const SpectralCache& c, const Vector& f, Method m) {
  FitResult r;
  const Vector uy = c.u.transpose() * blocks.y_t;
  const Vector vy = c.v.transpose() * blocks.y_n;
  r.alpha_hat = c.v * f.cwiseProduct(uy);
  r.beta_hat = c.u * f.cwiseProduct(vy);
  r.point_hz = blocks.y_n.dot(*r.alpha_hat);
  r.point_vt = blocks.y_t.dot(*r.beta_hat);
  r.method = m;
  r.rank_used = c.rank;
  return r;
}

}  // namespace

bool is_symmetric(const Method& m) {
  return std::holds_alternative<OlsMinNorm>(m) || std::holds_alternative<Pcr>(m) ||
         std::holds_alternative<Ridge>(m);
}

std::string method_name(const Method& m) {
  return std::visit(overloaded{[](const OlsMinNorm&) { return std::string("ols"); },
                               [](const Pcr&) { return std::string("pcr"); },
                               [](const Ridge&) { return std::string("ridge"); },
                               [](const Lasso&) { return std::string("lasso"); },
                               [](const ElasticNet&) { return std::string("enet"); },
                               [](const Simplex&) { return std::string("simplex"); }},
                    m);
}

std::string describe(const Method& m) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const OlsMinNorm&) { os << "ols"; },
                        [&](const Pcr& p) { os << "pcr(k=" << p.k << ")"; },
                        [&](const Ridge& p) { os << "ridge(lambda2=" << p.lambda2 << ")"; },
                        [&](const Lasso& p) {
                          os << "lasso(lambda1=" << p.lambda1 << ", " << to_string(p.direction) << ")";
                        },
                        [&](const ElasticNet& p) {
                          os << "enet(lambda1=" << p.lambda1 << ", lambda2=" << p.lambda2 << ", "
                             << to_string(p.direction) << ")";
                        },
                        [&](const Simplex& p) {
                          os << "simplex(lambda=" << p.lambda << ", " << to_string(p.direction) << ")";
                        }},
             m);
  return os.str();
}

Method with_direction(const Method& m, Direction d) {
  return std::visit(overloaded{[&](Lasso p) -> Method { p.direction = d; return p; },
                               [&](ElasticNet p) -> Method { p.direction = d; return p; },
                               [&](Simplex p) -> Method { p.direction = d; return p; },
                               [&](const auto& p) -> Method { return p; }},
                    m);
}

double FitResult::point() const {
  if (point_hz) return *point_hz;
  if (point_vt) return *point_vt;
  fail(ErrorCode::InvalidArgument, "fit has no point estimate");
}

void validate(const SolverConfig& cfg) {
  if (cfg.max_iters < 1) fail(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (!(cfg.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be > 0");
}

FitResult fit_ols_minnorm(const Blocks& blocks, const SpectralCache& cache) {
  check_cache(blocks, cache);
  return spectral_fit(blocks, cache, cache.s.cwiseInverse(), OlsMinNorm{});
}

FitResult fit_pcr(const Blocks& blocks, const SpectralCache& cache, Index k) {
  check_cache(blocks, cache);
  const SpectralCache ck = rank_k_truncate(cache, k);
  return spectral_fit(blocks, ck, ck.s.cwiseInverse(), Pcr{k});
}

FitResult fit_ridge(const Blocks& blocks, const SpectralCache& cache, double lambda2) {
  check_cache(blocks, cache);
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) {
    fail(ErrorCode::NonPositiveLambda, "ridge lambda2 must be positive and finite");
  }
  const Vector f = cache.s.array() / (cache.s.array().square() + lambda2);
  return spectral_fit(blocks, cache, f, Ridge{lambda2});
}

FitResult fit(const Blocks& blocks, const SpectralCache& cache, const Method& method,
              const SolverConfig& cfg) {
  return std::visit(
      overloaded{[&](const OlsMinNorm&) { return fit_ols_minnorm(blocks, cache); },
                 [&](const Pcr& p) { return fit_pcr(blocks, cache, p.k); },
                 [&](const Ridge& p) { return fit_ridge(blocks, cache, p.lambda2); },
                 [&](const Lasso& p) { return fit_lasso(blocks, p.direction, p.lambda1, cfg); },
                 [&](const ElasticNet& p) {
                   return fit_elastic_net(blocks, p.direction, p.lambda1, p.lambda2, cfg);
                 },
                 [&](const Simplex& p) { return fit_simplex(blocks, p.direction, p.lambda, cfg); }},
      method);
}

FitResult fit_with_intercepts(const Blocks& blocks, const Method& method, const SolverConfig& cfg,
                              double rtol) {
  if (!is_symmetric(method)) {
    fail(ErrorCode::UnsupportedMethod, method_name(method) + " has no intercept variant");
  }
  const CenteredBlocks c = twice_center(blocks);
  Blocks centered = blocks;
  centered.y0 = c.y0_centered;
  const SpectralCache cache = svd_decompose(centered.y0, rtol);
  Method m = method;
  // A constant block centres to zero; there is nothing left to regress on.
  if (cache.rank == 0) {
    if (auto* p = std::get_if<Pcr>(&m)) {
      if (p->k < 1) fail(ErrorCode::KOutOfRange, "k must be >= 1");
      m = OlsMinNorm{};
    }
  }
  FitResult r = fit(centered, cache, m, cfg);
  r.method = method;
  const double a0 = c.time_intercept;
  const double a1 = c.unit_intercept;
  r.intercepts = Intercepts{a0, a1};
  *r.point_hz += a0 + a1;
  *r.point_vt += a0 + a1;
  return r;
}

std::pair<double, double> naive_intercept_ols(const Blocks& blocks, double rtol) {
  check_blocks(blocks);
  const Index n0 = blocks.n0();
  const Index t0 = blocks.t0();
  Matrix xh(n0, t0 + 1);
  xh << blocks.y0, Vector::Ones(n0);
  Matrix xv(t0, n0 + 1);
  xv << blocks.y0.transpose(), Vector::Ones(t0);
  const Vector wh = pseudoinverse(svd_decompose(xh, rtol)) * blocks.y_t;
  const Vector wv = pseudoinverse(svd_decompose(xv, rtol)) * blocks.y_n;
  const double hz = blocks.y_n.dot(wh.head(t0)) + wh(t0);
  const double vt = blocks.y_t.dot(wv.head(n0)) + wv(n0);
  return {hz, vt};
}

double doubly_robust_combine(const Vector& alpha_hat, const Vector& beta_hat, const Blocks& blocks) {
  check_blocks(blocks);
  if (alpha_hat.size() != blocks.t0() || beta_hat.size() != blocks.n0()) {
    fail(ErrorCode::DimensionMismatch, "weights do not match the block dimensions");
  }
  return blocks.y_t.dot(beta_hat) + blocks.y_n.dot(alpha_hat) - beta_hat.dot(blocks.y0 * alpha_hat);
}

double penalized_objective(const Blocks& blocks, Direction direction, const Vector& w, double lambda1,
                           double lambda2) {
  const Vector r = direction == Direction::Hz ? Vector(blocks.y_t - blocks.y0 * w)
                                              : Vector(blocks.y_n - blocks.y0.transpose() * w);
  return r.squaredNorm() + lambda1 * w.lpNorm<1>() + lambda2 * w.squaredNorm();
}

}  // namespace panelcf
