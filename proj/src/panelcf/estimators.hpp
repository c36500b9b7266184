#pragma once

// Point estimators over the (y_N, Y0, y_T) blocks.
//
// Penalised objectives are taken literally, with no 1/2 factors and no
// sample-size scaling:
//   HZ:  ||y_T - Y0 a||^2   + l1 ||a||_1 + l2 ||a||^2
//   VT:  ||y_N - Y0' b||^2  + l1 ||b||_1 + l2 ||b||^2

#include "panelcf/core.hpp"
#include "panelcf/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace panelcf {

using Direction = Side;

struct OlsMinNorm {};
struct Pcr {
  Index k = 1;
};
struct Ridge {
  double lambda2 = 1.0;
};
struct Lasso {
  double lambda1 = 1.0;
  Direction direction = Direction::Hz;
};
struct ElasticNet {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  Direction direction = Direction::Hz;
};
struct Simplex {
  double lambda = 1e-6;
  Direction direction = Direction::Hz;
};

using Method = std::variant<OlsMinNorm, Pcr, Ridge, Lasso, ElasticNet, Simplex>;

bool is_symmetric(const Method& m);
std::string method_name(const Method& m);  // "ols", "pcr", ...
std::string describe(const Method& m);     // name plus hyperparameters
Method with_direction(const Method& m, Direction d);

struct Intercepts {
  double alpha0 = 0.0;  // time fixed effect, mean(y_T)
  double alpha1 = 0.0;  // unit fixed effect, mean(y_N)
};

struct FitResult {
  std::optional<Vector> alpha_hat;
  std::optional<Vector> beta_hat;
  std::optional<double> point_hz;
  std::optional<double> point_vt;
  Method method = OlsMinNorm{};
  std::optional<Intercepts> intercepts;
  std::vector<double> objective_trace;  // per sweep, iterative solvers only
  Index iterations = 0;
  Index rank_used = 0;

  // HZ point when present, otherwise VT.
  double point() const;
};

struct SolverConfig {
  Index max_iters = 100000;
  double tol = 1e-10;
  std::uint64_t seed = 0;  // reserved
};

void validate(const SolverConfig& cfg);

FitResult fit_ols_minnorm(const Blocks& blocks, const SpectralCache& cache);
FitResult fit_pcr(const Blocks& blocks, const SpectralCache& cache, Index k);
FitResult fit_ridge(const Blocks& blocks, const SpectralCache& cache, double lambda2);

FitResult fit_lasso(const Blocks& blocks, Direction direction, double lambda1,
                    const SolverConfig& cfg = {});
// lambda1 = 0 or lambda2 = 0 collapse to ridge or lasso; both zero is rejected.
FitResult fit_elastic_net(const Blocks& blocks, Direction direction, double lambda1, double lambda2,
                          const SolverConfig& cfg = {});
// cfg.tol bounds the projected-gradient KKT residual; 1e-9 is used when cfg.tol is smaller.
FitResult fit_simplex(const Blocks& blocks, Direction direction, double lambda = 1e-6,
                      const SolverConfig& cfg = {});

// Dispatch on the method. The cache must come from blocks.y0 (unused by the
// asymmetric methods).
FitResult fit(const Blocks& blocks, const SpectralCache& cache, const Method& method,
              const SolverConfig& cfg = {});

// Symmetric methods on the twice-centred block plus the two fixed effects.
FitResult fit_with_intercepts(const Blocks& blocks, const Method& method, const SolverConfig& cfg = {},
                              double rtol = kDefaultRtol);

// Plain intercept-augmented min-norm OLS (design [Y0, 1] and [Y0', 1]).
// Returns {point_hz, point_vt}.
std::pair<double, double> naive_intercept_ols(const Blocks& blocks, double rtol = kDefaultRtol);

double doubly_robust_combine(const Vector& alpha_hat, const Vector& beta_hat, const Blocks& blocks);

struct HppResult {
  Vector weights;
  std::vector<Vector> factors;
  std::vector<double> objective_trace;  // factorised objective per sweep
  Index iterations = 0;
};

HppResult hpp_alternating_ridge(const Blocks& blocks, Direction direction, int K, double lambda,
                                const SolverConfig& cfg = {});

// Objective values as written above, for either direction.
double penalized_objective(const Blocks& blocks, Direction direction, const Vector& w, double lambda1,
                           double lambda2);

// Euclidean projection onto {w >= 0, sum w = 1}.
Vector project_simplex(const Vector& v);

}  // namespace panelcf
