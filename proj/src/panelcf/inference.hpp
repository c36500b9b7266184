#pragma once

#include "panelcf/core.hpp"
#include "panelcf/estimators.hpp"

#include <optional>
#include <string>
#include <utility>

namespace panelcf {

enum class CovKind { Homoskedastic, Jackknife, Hrk };
std::string to_string(CovKind kind);  // "homo", "jack", "hrk"

enum class DegeneratePolicy { Flag, Throw };

struct Residuals {
  Vector eps_t_hat;  // H^u_perp y_T, length N0
  Vector eps_n_hat;  // H^v_perp y_N, length T0
};

Residuals residuals(const Blocks& blocks, const SpectralCache& cache);

struct CovEstimate {
  Vector sigma_t_hat;  // diagonal of the N0 x N0 estimate
  Vector sigma_n_hat;  // diagonal of the T0 x T0 estimate
  CovKind kind = CovKind::Homoskedastic;
  bool hz_degenerate = false;  // zero homoskedastic denominator on that side
  bool vt_degenerate = false;
  bool hz_negative = false;  // HRK produced a negative entry
  bool vt_negative = false;
  double max_leverage_u = 0.0;  // max_l H^u_ll, reported for HRK
  double max_leverage_v = 0.0;
};

// sigma^2 = ||eps||^2 / (dim - R); a zero denominator is flagged and yields 0
// (or throws DegenerateSide under DegeneratePolicy::Throw).
CovEstimate cov_homoskedastic(const Residuals& res, Index rank,
                              DegeneratePolicy policy = DegeneratePolicy::Flag);
// eps_l^2 / (1 - H_ll)^2, zero where 1 - H_ll vanishes.
CovEstimate cov_jackknife(const Residuals& res, const HatMatrices& hats);
// Solves (H_perp o H_perp) x = eps o eps on each side.
CovEstimate cov_hrk(const Residuals& res, const HatMatrices& hats);

struct VarianceEstimates {
  double v_hz = 0.0;
  double v_vt = 0.0;
  double v_mix = 0.0;  // before any fallback
  double trace_term = 0.0;
};

// tr(Y0^+ S_T (Y0')^+ S_N) for diagonal S_T, S_N, computed in the spectral basis.
double trace_term(const SpectralCache& cache, const Vector& sigma_t, const Vector& sigma_n);

VarianceEstimates variance_estimates(const FitResult& fit, const CovEstimate& cov,
                                     const SpectralCache& cache);

struct MixedBounds {
  double v_mix_min = 0.0;
  double v_mix_max = 0.0;
};

MixedBounds mixed_bounds(const FitResult& fit, const CovEstimate& cov, const SpectralCache& cache);

// (v_used, fallback_used)
std::pair<double, bool> mixed_fallback(double v_hz, double v_vt, double v_mix);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval confidence_interval(double point, double v, double theta);

struct IntervalReport {
  double point = 0.0;
  double point_hz = 0.0;
  double point_vt = 0.0;
  double v_hz = 0.0;
  double v_vt = 0.0;
  double v_mix = 0.0;  // value used for the mixed interval
  double v_mix_raw = 0.0;
  bool mix_fallback_used = false;
  double trace_term = 0.0;
  MixedBounds bounds;
  double theta = 0.05;
  double z = 0.0;
  std::optional<Interval> ci_hz;  // absent when the variance is negative
  std::optional<Interval> ci_vt;
  std::optional<Interval> ci_mix;
  bool hz_degenerate = false;
  bool vt_degenerate = false;
  bool hz_negative_variance = false;
  bool vt_negative_variance = false;
  CovKind cov_kind = CovKind::Homoskedastic;
  Method method = OlsMinNorm{};
  Index rank_used = 0;
  Index period = 0;
  double max_leverage_u = 0.0;
  double max_leverage_v = 0.0;
};

// Full pipeline for one post-treatment period. OLS and PCR only; PCR swaps in
// the rank-k cache for hats, pseudoinverse and R.
IntervalReport analyze_period(const Blocks& blocks, const Method& method, CovKind cov_kind, double theta,
                              const SolverConfig& cfg = {}, double rtol = kDefaultRtol);

bool supports_inference(const Method& method);

// Jackknife bias diagonal for a known error covariance:
// D_ll = sum_{j != l} sigma_j^2 H_lj^2 / (1 - H_ll)^2.
Vector jackknife_bias(const Matrix& hat, const Vector& sigma_true);

// Population quantities for the mixed model with fixed (alpha*, beta*).
struct PopulationMoments {
  double mu_mix = 0.0;    // <alpha*, Y0' beta*>
  Vector hv_alpha;        // H^v alpha*
  Vector hu_beta;         // H^u beta*
  double v0_mix = 0.0;
};

PopulationMoments population_moments(const SpectralCache& cache, const Matrix& y0, const Vector& alpha_star,
                                     const Vector& beta_star, const Vector& sigma_t, const Vector& sigma_n);

}  // namespace panelcf
