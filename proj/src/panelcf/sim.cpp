#include "panelcf/sim.hpp"

#include "panelcf/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

namespace panelcf {

namespace {

constexpr double kAlCritical = 1.96;

bool covers(const Interval& ci, double point, double mu) {
  const double slack =
      64.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(point), std::abs(mu)});
  return ci.lo - slack <= mu && mu <= ci.hi + slack;
}

}  // namespace

DgpSpec build_dgp(const Blocks& blocks, double energy_threshold, double rtol) {
  check_blocks(blocks);
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "energy threshold must be in (0, 1]");
  }
  const Index n0 = blocks.n0();
  const Index t0 = blocks.t0();
  const SpectralCache full = svd_decompose(blocks.y0, rtol);
  const Index r = energy_rank(full, energy_threshold);
  if (r == 0) fail(ErrorCode::DegenerateDgp, "pretreatment block is zero");
  if (n0 <= r || t0 <= r) {
    fail(ErrorCode::DegenerateDgp, "effective rank r=" + std::to_string(r) + " leaves no residual degrees of freedom (N0=" +
                                       std::to_string(n0) + ", T0=" + std::to_string(t0) + ")");
  }
  DgpSpec d;
  d.energy_threshold = energy_threshold;
  d.r = r;
  d.cache_r = rank_k_truncate(full, r);
  d.y0_r = reconstruct(d.cache_r);
  const Matrix pinv = pseudoinverse(d.cache_r);
  d.alpha_star = pinv * blocks.y_t;
  d.beta_star = pinv.transpose() * blocks.y_n;
  d.sigma2_t = (blocks.y_t - d.y0_r * d.alpha_star).squaredNorm() / static_cast<double>(n0 - r);
  d.sigma2_n = (blocks.y_n - d.y0_r.transpose() * d.beta_star).squaredNorm() / static_cast<double>(t0 - r);
  d.mu_hz_coeff = d.cache_r.v * (d.cache_r.v.transpose() * d.alpha_star);
  d.mu_vt_coeff = d.cache_r.u * (d.cache_r.u.transpose() * d.beta_star);
  d.mu_mix = d.alpha_star.dot(d.y0_r.transpose() * d.beta_star);
  return d;
}

DgpSpec build_dgp(const PanelData& panel, double energy_threshold, double rtol) {
  return build_dgp(split_blocks(panel, panel.t0), energy_threshold, rtol);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFu), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

double standard_normal(std::mt19937_64& gen) {
  const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
  return normal_quantile(u);
}

ReplicationRecord run_replication(const DgpSpec& dgp, std::uint64_t seed, CovKind cov, double theta) {
  const Index n0 = dgp.y0_r.rows();
  const Index t0 = dgp.y0_r.cols();
  auto gt = make_stream(seed, kStreamYT);
  auto gn = make_stream(seed, kStreamYN);
  Blocks b;
  b.y0 = dgp.y0_r;
  b.y_t = dgp.y0_r * dgp.alpha_star;
  b.y_n = dgp.y0_r.transpose() * dgp.beta_star;
  const double st = std::sqrt(dgp.sigma2_t);
  const double sn = std::sqrt(dgp.sigma2_n);
  for (Index i = 0; i < n0; ++i) b.y_t(i) += st * standard_normal(gt);
  for (Index j = 0; j < t0; ++j) b.y_n(j) += sn * standard_normal(gn);

  const SpectralCache& c = dgp.cache_r;
  const FitResult f = fit_ols_minnorm(b, c);
  const Residuals res = residuals(b, c);
  const HatMatrices hats = hat_matrices(c);
  CovEstimate est;
  switch (cov) {
    case CovKind::Homoskedastic: est = cov_homoskedastic(res, c.rank); break;
    case CovKind::Jackknife: est = cov_jackknife(res, hats); break;
    case CovKind::Hrk: est = cov_hrk(res, hats); break;
  }
  const VarianceEstimates v = variance_estimates(f, est, c);

  ReplicationRecord rec;
  rec.point = *f.point_hz;
  rec.mu = {b.y_n.dot(dgp.mu_hz_coeff), b.y_t.dot(dgp.mu_vt_coeff), dgp.mu_mix};
  const auto [v_mix, fallback] = mixed_fallback(v.v_hz, v.v_vt, v.v_mix);
  rec.variance = {v.v_hz, v.v_vt, v_mix};
  rec.mix_fallback = fallback;
  for (int k = 0; k < 3; ++k) {
    rec.usable[k] = rec.variance[k] >= 0.0;
    if (!rec.usable[k]) continue;
    const Interval ci = confidence_interval(rec.point, rec.variance[k], theta);
    for (int e = 0; e < 3; ++e) rec.hit[k][e] = covers(ci, rec.point, rec.mu[e]);
    rec.length_norm[k] = 2.0 * kAlCritical * std::sqrt(rec.variance[k]) / std::abs(rec.point);
  }
  const Vector delta = jackknife_bias(hats.h_u, Vector::Constant(n0, dgp.sigma2_t));
  const Vector gamma = jackknife_bias(hats.h_v, Vector::Constant(t0, dgp.sigma2_n));
  rec.jack_bias_hz = f.beta_hat->dot(delta.cwiseProduct(*f.beta_hat));
  rec.jack_bias_vt = f.alpha_hat->dot(gamma.cwiseProduct(*f.alpha_hat));
  return rec;
}

CoverageTable coverage_study(const DgpSpec& dgp, Index reps, std::uint64_t seed, CovKind cov, double theta,
                             unsigned threads) {
  if (reps < 1) fail(ErrorCode::InvalidArgument, "reps must be >= 1");
  std::vector<ReplicationRecord> recs(static_cast<std::size_t>(reps));
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<Index>(workers, reps));

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index i = w; i < reps; i += workers) {
          recs[static_cast<std::size_t>(i)] = run_replication(dgp, seed + static_cast<std::uint64_t>(i) + 1, cov, theta);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CoverageTable t;
  t.reps = reps;
  t.seed = seed;
  t.cov = cov;
  t.theta = theta;
  t.r = dgp.r;
  t.sigma2_t = dgp.sigma2_t;
  t.sigma2_n = dgp.sigma2_n;
  t.energy_threshold = dgp.energy_threshold;
  std::array<std::array<Index, 3>, 3> hits{};
  std::array<double, 3> len{};
  std::array<Index, 3> used{};
  for (const auto& r : recs) {
    for (int k = 0; k < 3; ++k) {
      if (!r.usable[k]) {
        ++t.unusable[k];
        continue;
      }
      ++used[k];
      len[k] += r.length_norm[k];
      for (int e = 0; e < 3; ++e) hits[k][e] += r.hit[k][e] ? 1 : 0;
    }
    t.fallback_count += r.mix_fallback ? 1 : 0;
    t.mean_jack_bias_hz += r.jack_bias_hz;
    t.mean_jack_bias_vt += r.jack_bias_vt;
  }
  for (int k = 0; k < 3; ++k) {
    const double al = used[k] ? len[k] / static_cast<double>(used[k]) : std::numeric_limits<double>::quiet_NaN();
    for (int e = 0; e < 3; ++e) {
      t.cp[k][e] = static_cast<double>(hits[k][e]) / static_cast<double>(reps);
      t.al[k][e] = al;
    }
  }
  t.mean_jack_bias_hz /= static_cast<double>(reps);
  t.mean_jack_bias_vt /= static_cast<double>(reps);
  return t;
}

}  // namespace panelcf
