#include "panelcf/inference.hpp"

#include "panelcf/normal.hpp"

#include <Eigen/LU>

#include <cmath>

namespace panelcf {

namespace {

constexpr double kLeverageOne = 1e-8;
constexpr double kHrkMinRcond = 1e-12;
constexpr double kDegenerateRel = 1e-12;

void check_residuals(const Residuals& res, const HatMatrices& hats) {
  if (hats.h_u.rows() != res.eps_t_hat.size() || hats.h_v.rows() != res.eps_n_hat.size()) {
    fail(ErrorCode::DimensionMismatch, "hat matrices do not match residual lengths");
  }
}

Vector hrk_side(const Vector& eps, const Matrix& hat, Side side) {
  const Index n = eps.size();
  const Matrix perp = Matrix::Identity(n, n) - hat;
  const Matrix sq = perp.cwiseProduct(perp);
  Eigen::PartialPivLU<Matrix> lu(sq);
  // I - H has unit scale, so the reciprocal condition is taken in absolute terms
  const double rc = lu.rcond() * sq.cwiseAbs().colwise().sum().maxCoeff();
  if (!(rc >= kHrkMinRcond)) {
    fail(ErrorCode::HrkUndefined,
         std::string(to_string(side)) + " side: (H_perp o H_perp) is numerically singular (rcond " +
             std::to_string(rc) + ", max leverage " + std::to_string(hat.diagonal().maxCoeff()) + ")");
  }
  return lu.solve(eps.cwiseProduct(eps));
}

}  // namespace

std::string to_string(CovKind kind) {
  switch (kind) {
    case CovKind::Homoskedastic: return "homo";
    case CovKind::Jackknife: return "jack";
    case CovKind::Hrk: return "hrk";
  }
  return "unknown";
}

Residuals residuals(const Blocks& blocks, const SpectralCache& cache) {
  check_blocks(blocks);
  Residuals r;
  r.eps_t_hat = blocks.y_t - cache.u * (cache.u.transpose() * blocks.y_t);
  r.eps_n_hat = blocks.y_n - cache.v * (cache.v.transpose() * blocks.y_n);
  return r;
}

CovEstimate cov_homoskedastic(const Residuals& res, Index rank, DegeneratePolicy policy) {
  const Index n0 = res.eps_t_hat.size();
  const Index t0 = res.eps_n_hat.size();
  if (rank < 0 || rank > std::min(n0, t0)) fail(ErrorCode::InvalidArgument, "rank out of range");
  CovEstimate c;
  c.kind = CovKind::Homoskedastic;
  double st = 0.0;
  double sn = 0.0;
  if (n0 > rank) {
    st = res.eps_t_hat.squaredNorm() / static_cast<double>(n0 - rank);
  } else {
    if (policy == DegeneratePolicy::Throw) fail(ErrorCode::DegenerateSide, "HZ side: N0 - R = 0");
    c.hz_degenerate = true;
  }
  if (t0 > rank) {
    sn = res.eps_n_hat.squaredNorm() / static_cast<double>(t0 - rank);
  } else {
    if (policy == DegeneratePolicy::Throw) fail(ErrorCode::DegenerateSide, "VT side: T0 - R = 0");
    c.vt_degenerate = true;
  }
  c.sigma_t_hat = Vector::Constant(n0, st);
  c.sigma_n_hat = Vector::Constant(t0, sn);
  return c;
}

CovEstimate cov_jackknife(const Residuals& res, const HatMatrices& hats) {
  check_residuals(res, hats);
  auto side = [](const Vector& eps, const Matrix& hat) {
    Vector out(eps.size());
    for (Index l = 0; l < eps.size(); ++l) {
      const double d = 1.0 - hat(l, l);
      out(l) = d > kLeverageOne ? eps(l) * eps(l) / (d * d) : 0.0;
    }
    return out;
  };
  CovEstimate c;
  c.kind = CovKind::Jackknife;
  c.sigma_t_hat = side(res.eps_t_hat, hats.h_u);
  c.sigma_n_hat = side(res.eps_n_hat, hats.h_v);
  c.max_leverage_u = hats.h_u.size() ? hats.h_u.diagonal().maxCoeff() : 0.0;
  c.max_leverage_v = hats.h_v.size() ? hats.h_v.diagonal().maxCoeff() : 0.0;
  return c;
}

CovEstimate cov_hrk(const Residuals& res, const HatMatrices& hats) {
  check_residuals(res, hats);
  CovEstimate c;
  c.kind = CovKind::Hrk;
  c.sigma_t_hat = hrk_side(res.eps_t_hat, hats.h_u, Side::Hz);
  c.sigma_n_hat = hrk_side(res.eps_n_hat, hats.h_v, Side::Vt);
  c.hz_negative = (c.sigma_t_hat.array() < 0.0).any();
  c.vt_negative = (c.sigma_n_hat.array() < 0.0).any();
  c.max_leverage_u = hats.h_u.diagonal().maxCoeff();
  c.max_leverage_v = hats.h_v.diagonal().maxCoeff();
  return c;
}

double trace_term(const SpectralCache& cache, const Vector& sigma_t, const Vector& sigma_n) {
  if (cache.rank == 0) return 0.0;
  const Matrix a = cache.u.transpose() * sigma_t.asDiagonal() * cache.u;  // R x R
  const Matrix b = cache.v.transpose() * sigma_n.asDiagonal() * cache.v;
  const Vector inv = cache.s.cwiseInverse();
  // sum_{l,m} (1/(s_l s_m)) A_ml B_lm
  const Matrix scaled = inv.asDiagonal() * a * inv.asDiagonal();
  return scaled.cwiseProduct(b.transpose()).sum();
}

VarianceEstimates variance_estimates(const FitResult& fit, const CovEstimate& cov,
                                     const SpectralCache& cache) {
  if (!fit.alpha_hat || !fit.beta_hat) {
    fail(ErrorCode::UnsupportedMethod, "variance estimates need both HZ and VT weights");
  }
  const Vector& a = *fit.alpha_hat;
  const Vector& b = *fit.beta_hat;
  if (b.size() != cov.sigma_t_hat.size() || a.size() != cov.sigma_n_hat.size()) {
    fail(ErrorCode::DimensionMismatch, "covariance diagonals do not match the weights");
  }
  VarianceEstimates v;
  v.v_hz = b.dot(cov.sigma_t_hat.cwiseProduct(b));
  v.v_vt = a.dot(cov.sigma_n_hat.cwiseProduct(a));
  v.trace_term = trace_term(cache, cov.sigma_t_hat, cov.sigma_n_hat);
  v.v_mix = v.v_hz + v.v_vt - v.trace_term;
  return v;
}

MixedBounds mixed_bounds(const FitResult& fit, const CovEstimate& cov, const SpectralCache& cache) {
  if (!fit.alpha_hat || !fit.beta_hat) {
    fail(ErrorCode::UnsupportedMethod, "mixed bounds need both HZ and VT weights");
  }
  const double st_min = cov.sigma_t_hat.minCoeff();
  const double st_max = cov.sigma_t_hat.maxCoeff();
  const double sn_min = cov.sigma_n_hat.minCoeff();
  const double sn_max = cov.sigma_n_hat.maxCoeff();
  const double tr = cache.rank ? cache.s.array().square().inverse().sum() : 0.0;
  const double bb = fit.beta_hat->squaredNorm();
  const double aa = fit.alpha_hat->squaredNorm();
  return {st_min * bb + sn_min * aa - st_max * sn_max * tr, st_max * bb + sn_max * aa - st_min * sn_min * tr};
}

std::pair<double, bool> mixed_fallback(double v_hz, double v_vt, double v_mix) {
  if (v_mix < 0.0) return {v_hz + v_vt, true};
  return {v_mix, false};
}

Interval confidence_interval(double point, double v, double theta) {
  if (!(v >= 0.0)) fail(ErrorCode::NegativeVariance, "variance " + std::to_string(v) + " is negative");
  const double h = z_two_sided(theta) * std::sqrt(v);
  return {point - h, point + h};
}

bool supports_inference(const Method& method) {
  return std::holds_alternative<OlsMinNorm>(method) || std::holds_alternative<Pcr>(method);
}

IntervalReport analyze_period(const Blocks& blocks, const Method& method, CovKind cov_kind, double theta,
                              const SolverConfig& cfg, double rtol) {
  if (!supports_inference(method)) {
    fail(ErrorCode::UnsupportedMethod, "intervals are available for ols and pcr only, not " +
                                           method_name(method));
  }
  const double z = z_two_sided(theta);
  const SpectralCache full = svd_decompose(blocks.y0, rtol);
  const FitResult f = fit(blocks, full, method, cfg);
  SpectralCache cache = full;
  if (const auto* p = std::get_if<Pcr>(&method)) cache = rank_k_truncate(full, p->k);

  const Residuals res = residuals(blocks, cache);
  const HatMatrices hats = hat_matrices(cache);
  CovEstimate cov;
  switch (cov_kind) {
    case CovKind::Homoskedastic: cov = cov_homoskedastic(res, cache.rank); break;
    case CovKind::Jackknife: cov = cov_jackknife(res, hats); break;
    case CovKind::Hrk: cov = cov_hrk(res, hats); break;
  }
  const VarianceEstimates v = variance_estimates(f, cov, cache);

  IntervalReport r;
  r.point_hz = *f.point_hz;
  r.point_vt = *f.point_vt;
  r.point = r.point_hz;
  r.v_hz = v.v_hz;
  r.v_vt = v.v_vt;
  r.v_mix_raw = v.v_mix;
  r.trace_term = v.trace_term;
  std::tie(r.v_mix, r.mix_fallback_used) = mixed_fallback(v.v_hz, v.v_vt, v.v_mix);
  r.bounds = mixed_bounds(f, cov, cache);
  r.theta = theta;
  r.z = z;
  r.hz_negative_variance = v.v_hz < 0.0;
  r.vt_negative_variance = v.v_vt < 0.0;
  if (!r.hz_negative_variance) r.ci_hz = confidence_interval(r.point, v.v_hz, theta);
  if (!r.vt_negative_variance) r.ci_vt = confidence_interval(r.point, v.v_vt, theta);
  if (r.v_mix >= 0.0) r.ci_mix = confidence_interval(r.point, r.v_mix, theta);
  r.hz_degenerate = res.eps_t_hat.norm() <= kDegenerateRel * (1.0 + blocks.y_t.norm());
  r.vt_degenerate = res.eps_n_hat.norm() <= kDegenerateRel * (1.0 + blocks.y_n.norm());
  r.cov_kind = cov_kind;
  r.method = method;
  r.rank_used = cache.rank;
  r.period = blocks.period;
  r.max_leverage_u = hats.h_u.size() ? hats.h_u.diagonal().maxCoeff() : 0.0;
  r.max_leverage_v = hats.h_v.size() ? hats.h_v.diagonal().maxCoeff() : 0.0;
  return r;
}

Vector jackknife_bias(const Matrix& hat, const Vector& sigma_true) {
  const Index n = hat.rows();
  Vector out = Vector::Zero(n);
  for (Index l = 0; l < n; ++l) {
    const double d = 1.0 - hat(l, l);
    if (d <= kLeverageOne) continue;
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != l) acc += sigma_true(j) * hat(l, j) * hat(l, j);
    }
    out(l) = acc / (d * d);
  }
  return out;
}

PopulationMoments population_moments(const SpectralCache& cache, const Matrix& y0, const Vector& alpha_star,
                                     const Vector& beta_star, const Vector& sigma_t, const Vector& sigma_n) {
  PopulationMoments m;
  m.mu_mix = alpha_star.dot(y0.transpose() * beta_star);
  m.hv_alpha = cache.v * (cache.v.transpose() * alpha_star);
  m.hu_beta = cache.u * (cache.u.transpose() * beta_star);
  m.v0_mix = m.hu_beta.dot(sigma_t.cwiseProduct(m.hu_beta)) + m.hv_alpha.dot(sigma_n.cwiseProduct(m.hv_alpha)) +
             trace_term(cache, sigma_t, sigma_n);
  return m;
}

}  // namespace panelcf
