#pragma once

#include "panelcf/core.hpp"
#include "panelcf/inference.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>

namespace panelcf {

// Data-inspired mixed-model DGP at the first post-treatment period.
struct DgpSpec {
  Matrix y0_r;  // rank-r truncation of the observed Y0
  Vector alpha_star;
  Vector beta_star;
  double sigma2_t = 0.0;
  double sigma2_n = 0.0;
  Index r = 0;
  Vector mu_hz_coeff;  // H^v alpha*
  Vector mu_vt_coeff;  // H^u beta*
  double mu_mix = 0.0;
  SpectralCache cache_r;
  double energy_threshold = 0.999;
};

// alpha*, beta* are min-norm fits against the rank-r block; the noise
// levels are the residual variances of those fits with N0 - r and T0 - r
// degrees of freedom.
DgpSpec build_dgp(const PanelData& panel, double energy_threshold = 0.999, double rtol = kDefaultRtol);
DgpSpec build_dgp(const Blocks& blocks, double energy_threshold = 0.999, double rtol = kDefaultRtol);

enum : int { kHz = 0, kVt = 1, kMix = 2 };

struct ReplicationRecord {
  double point = 0.0;
  std::array<double, 3> mu{};        // realised estimands hz, vt, mix
  std::array<double, 3> variance{};  // interval variances hz, vt, mix (after fallback)
  bool mix_fallback = false;
  std::array<std::array<bool, 3>, 3> hit{};  // [interval][estimand]
  std::array<bool, 3> usable{};              // variance nonnegative
  std::array<double, 3> length_norm{};       // 2 * 1.96 * sqrt(v) / |point|
  double jack_bias_hz = 0.0;  // beta_hat' Delta beta_hat
  double jack_bias_vt = 0.0;  // alpha_hat' Gamma alpha_hat
};

// Deterministic generator for (seed, stream): mt19937_64 keyed through seed_seq.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream);
// Standard normal via the inverse CDF of a 53-bit uniform in (0, 1).
double standard_normal(std::mt19937_64& gen);

inline constexpr std::uint32_t kStreamYT = 0;
inline constexpr std::uint32_t kStreamYN = 1;

ReplicationRecord run_replication(const DgpSpec& dgp, std::uint64_t seed,
                                  CovKind cov = CovKind::Homoskedastic, double theta = 0.05);

struct CoverageTable {
  std::array<std::array<double, 3>, 3> cp{};  // [interval][estimand]
  std::array<std::array<double, 3>, 3> al{};
  std::array<Index, 3> unusable{};  // replications with a negative variance
  Index reps = 0;
  std::uint64_t seed = 0;
  Index fallback_count = 0;
  double mean_jack_bias_hz = 0.0;
  double mean_jack_bias_vt = 0.0;
  CovKind cov = CovKind::Homoskedastic;
  double theta = 0.05;
  Index r = 0;
  double sigma2_t = 0.0;
  double sigma2_n = 0.0;
  double energy_threshold = 0.999;
};

// Replication i uses seed + i for i = 1..reps. threads = 0 picks the hardware count.
CoverageTable coverage_study(const DgpSpec& dgp, Index reps, std::uint64_t seed,
                             CovKind cov = CovKind::Homoskedastic, double theta = 0.05, unsigned threads = 0);

}  // namespace panelcf
