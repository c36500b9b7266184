#include "panelcf/core.hpp"

#include "panelcf/error.hpp"

#include <Eigen/SVD>

#include <string>

namespace panelcf {

PanelData make_panel(Matrix outcomes, std::vector<std::string> unit_labels,
                     std::vector<std::string> time_labels, Index t0) {
  const Index n = outcomes.rows();
  const Index t = outcomes.cols();
  if (n < 2) fail(ErrorCode::InvalidArgument, "panel needs at least 2 units, got " + std::to_string(n));
  if (static_cast<Index>(unit_labels.size()) != n || static_cast<Index>(time_labels.size()) != t) {
    fail(ErrorCode::DimensionMismatch, "label counts do not match the outcome matrix");
  }
  if (t0 < 1 || t0 >= t) {
    fail(ErrorCode::T0OutOfRange,
         "t0=" + std::to_string(t0) + " must satisfy 1 <= t0 < T=" + std::to_string(t));
  }
  if (!outcomes.allFinite()) fail(ErrorCode::NonFiniteInput, "outcomes contain NaN or Inf");

  PanelData panel;
  panel.outcomes = std::move(outcomes);
  panel.unit_labels = std::move(unit_labels);
  panel.time_labels = std::move(time_labels);
  panel.treated_unit = n - 1;
  panel.t0 = t0;
  return panel;
}

Blocks split_blocks(const PanelData& panel, Index period) {
  if (period < panel.t0 || period >= panel.t()) {
    fail(ErrorCode::PeriodBeforeTreatment,
         "period index " + std::to_string(period) + " is outside the post-treatment range [" +
             std::to_string(panel.t0) + ", " + std::to_string(panel.t()) + ")");
  }
  const Index n0 = panel.n0();
  const Index t0 = panel.t0;
  Blocks b;
  b.y_n = panel.outcomes.row(n0).head(t0).transpose();
  b.y0 = panel.outcomes.topLeftCorner(n0, t0);
  b.y_t = panel.outcomes.col(period).head(n0);
  b.period = period;
  return b;
}

void check_blocks(const Blocks& blocks) {
  if (blocks.y0.rows() != blocks.y_t.size() || blocks.y0.cols() != blocks.y_n.size()) {
    fail(ErrorCode::DimensionMismatch,
         "blocks: y0 is " + std::to_string(blocks.y0.rows()) + "x" + std::to_string(blocks.y0.cols()) +
             " but len(y_t)=" + std::to_string(blocks.y_t.size()) +
             " and len(y_n)=" + std::to_string(blocks.y_n.size()));
  }
}

SpectralCache svd_decompose(const Matrix& y0, double rtol) {
  if (y0.size() == 0) fail(ErrorCode::InvalidArgument, "cannot decompose an empty matrix");
  if (!y0.allFinite()) fail(ErrorCode::NonFiniteInput, "matrix contains NaN or Inf");
  if (!(rtol >= 0.0)) fail(ErrorCode::InvalidArgument, "rtol must be nonnegative");

  Eigen::JacobiSVD<Matrix> svd(y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();

  Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double cutoff = rtol * sv(0);
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  }

  SpectralCache cache;
  cache.u = svd.matrixU().leftCols(rank);
  cache.s = sv.head(rank);
  cache.v = svd.matrixV().leftCols(rank);
  cache.rank = rank;
  cache.rtol = rtol;
  cache.rows = y0.rows();
  cache.cols = y0.cols();
  return cache;
}

Matrix reconstruct(const SpectralCache& cache) {
  return cache.u * cache.s.asDiagonal() * cache.v.transpose();
}

Matrix pseudoinverse(const SpectralCache& cache) {
  if (cache.rank == 0) return Matrix::Zero(cache.cols, cache.rows);
  return cache.v * cache.s.cwiseInverse().asDiagonal() * cache.u.transpose();
}

SpectralCache rank_k_truncate(const SpectralCache& cache, Index k) {
  if (k < 1 || k > cache.rank) {
    fail(ErrorCode::KOutOfRange,
         "k=" + std::to_string(k) + " must satisfy 1 <= k <= R=" + std::to_string(cache.rank));
  }
  SpectralCache out;
  out.u = cache.u.leftCols(k);
  out.s = cache.s.head(k);
  out.v = cache.v.leftCols(k);
  out.rank = k;
  out.rtol = cache.rtol;
  out.rows = cache.rows;
  out.cols = cache.cols;
  return out;
}

Index energy_rank(const SpectralCache& cache, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidArgument, "energy threshold must be in (0, 1]");
  if (cache.rank == 0) return 0;
  if (threshold >= 1.0) return cache.rank;
  const Vector energy = cache.s.array().square();
  const double total = energy.sum();
  double cumulative = 0.0;
  for (Index k = 0; k < cache.rank; ++k) {
    cumulative += energy(k);
    if (cumulative >= threshold * total) return k + 1;
  }
  return cache.rank;
}

HatMatrices hat_matrices(const SpectralCache& cache) {
  return {cache.u * cache.u.transpose(), cache.v * cache.v.transpose()};
}

CenteredBlocks twice_center(const Blocks& blocks) {
  check_blocks(blocks);
  CenteredBlocks c;
  c.row_means = blocks.y0.rowwise().mean();
  c.col_means = blocks.y0.colwise().mean().transpose();
  c.grand_mean = blocks.y0.mean();
  // Double centering: Y - r 1' - 1 c' + g 11'.
  c.y0_centered = blocks.y0;
  c.y0_centered.colwise() -= c.row_means;
  c.y0_centered.rowwise() -= c.col_means.transpose();
  c.y0_centered.array() += c.grand_mean;
  c.time_intercept = blocks.y_t.size() > 0 ? blocks.y_t.mean() : 0.0;
  c.unit_intercept = blocks.y_n.size() > 0 ? blocks.y_n.mean() : 0.0;
  return c;
}

}  // namespace panelcf
