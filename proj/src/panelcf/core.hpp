#pragma once

// Panel layout and the shared linear algebra behind every estimator.
//
// Indexing convention: the treated unit is always the last row of the
// outcome matrix, so control units occupy rows [0, N0) with N0 = N - 1.
// Pretreatment periods occupy columns [0, t0).

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace panelcf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRtol = 1e-10;

struct PanelData {
  Matrix outcomes;  // N x T, units by time
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;
  Index treated_unit = 0;  // always outcomes.rows() - 1 after construction
  Index t0 = 0;            // number of pretreatment periods
  std::string source_digest;  // hex SHA-256 of the input bytes, if any

  Index n() const { return outcomes.rows(); }
  Index t() const { return outcomes.cols(); }
  Index n0() const { return outcomes.rows() - 1; }
  Index t1() const { return outcomes.cols() - t0; }
};

// Builds a panel from a dense matrix whose last row is the treated unit.
// Validates the shape invariants and finiteness.
PanelData make_panel(Matrix outcomes, std::vector<std::string> unit_labels,
                     std::vector<std::string> time_labels, Index t0);

struct Blocks {
  Vector y_n;  // treated unit, pretreatment (length T0)
  Matrix y0;   // controls, pretreatment (N0 x T0)
  Vector y_t;  // controls at one post-treatment period (length N0)
  Index period = 0;

  Index n0() const { return y0.rows(); }
  Index t0() const { return y0.cols(); }
};

// `period` is a 0-based column index and must satisfy period >= t0.
Blocks split_blocks(const PanelData& panel, Index period);

// Checks rows(y0) == len(y_t) and cols(y0) == len(y_n).
void check_blocks(const Blocks& blocks);

// Thin SVD restricted to the numerically nonzero singular triples.
struct SpectralCache {
  Matrix u;  // N0 x R
  Vector s;  // R, strictly positive, non-increasing
  Matrix v;  // T0 x R
  Index rank = 0;
  double rtol = kDefaultRtol;
  Index rows = 0;  // shape of the decomposed matrix
  Index cols = 0;
};

// R counts singular values strictly greater than rtol * s_1.
SpectralCache svd_decompose(const Matrix& y0, double rtol = kDefaultRtol);

// U diag(s) V^T.
Matrix reconstruct(const SpectralCache& cache);

// V diag(1/s) U^T, with the 0/0 = 0 convention giving a zero matrix at R = 0.
Matrix pseudoinverse(const SpectralCache& cache);

SpectralCache rank_k_truncate(const SpectralCache& cache, Index k);

// Smallest k whose leading squared singular values hold at least
// `threshold` of the total energy. threshold >= 1 returns the full rank.
Index energy_rank(const SpectralCache& cache, double threshold);

struct HatMatrices {
  Matrix h_u;  // U U^T, projector onto colspan(Y0)
  Matrix h_v;  // V V^T, projector onto rowspan(Y0)
};

HatMatrices hat_matrices(const SpectralCache& cache);

struct CenteredBlocks {
  Matrix y0_centered;
  Vector row_means;
  Vector col_means;
  double grand_mean = 0.0;
  double time_intercept = 0.0;  // mean(y_t)
  double unit_intercept = 0.0;  // mean(y_n)
};

// Applies (I - 11'/N0) on the left and (I - 11'/T0) on the right of Y0.
CenteredBlocks twice_center(const Blocks& blocks);

}  // namespace panelcf
