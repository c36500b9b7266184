#include "doctest.h"

#include "panelcf/core.hpp"
#include "panelcf/error.hpp"
#include "panelcf/panel_io.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

using namespace panelcf;
using namespace pcftest;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

PanelData load_text(const std::string& text, const std::string& treated, Index t0) {
  std::istringstream in(text);
  return load_panel(in, PanelSchema{"unit", "time", "value", {}}, treated, t0);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("load_panel on a 2x2 toy file") {
  const auto p = load_text("unit,time,value\nb,1,3\na,1,1\na,2,2\nb,2,4\n", "a", 1);
  CHECK(p.n() == 2);
  CHECK(p.t() == 2);
  CHECK(p.unit_labels.back() == "a");
  CHECK(p.treated_unit == 1);
  CHECK(p.outcomes(1, 0) == 1.0);
  CHECK(p.outcomes(1, 1) == 2.0);
  CHECK(p.outcomes(0, 1) == 4.0);
}

TEST_CASE("load_panel sorts numeric times numerically and handles quotes") {
  const auto p = load_text(
      "unit,time,value\n\"x, y\",10,1\n\"x, y\",9,2\n\"x, y\",11,3\nz,9,4\nz,10,5\nz,11,6\n", "z", 2);
  CHECK(p.time_labels == std::vector<std::string>{"9", "10", "11"});
  CHECK(p.unit_labels.front() == "x, y");
  CHECK(p.outcomes(0, 0) == 2.0);
}

TEST_CASE("load_panel errors") {
  CHECK(code_of([] { load_text("unit,time,value\na,1,1\na,2,2\nb,1,3\n", "a", 1); }) == ErrorCode::MissingCell);
  CHECK(code_of([] { load_text("unit,time,value\na,1,1\na,1,2\nb,1,3\n", "a", 1); }) ==
        ErrorCode::DuplicateCell);
  CHECK(code_of([] { load_text("unit,time,value\na,1,1\na,2,2\nb,1,3\nb,2,4\n", "c", 1); }) ==
        ErrorCode::UnknownTreatedUnit);
  CHECK(code_of([] { load_text("unit,time,value\na,1,1\na,2,2\nb,1,3\nb,2,4\n", "a", 2); }) ==
        ErrorCode::T0OutOfRange);
  CHECK(code_of([] { load_text("unit,time,value\na,1,1\na,2,2\nb,1,3\nb,2,4\n", "a", 0); }) ==
        ErrorCode::T0OutOfRange);
  CHECK(code_of([] { load_text("unit,time,value\na,1,x\n", "a", 1); }) == ErrorCode::Parse);
  CHECK(code_of([] { load_text("unit,time,value\na,1,nan\n", "a", 1); }) == ErrorCode::NonFiniteInput);
  CHECK(code_of([] { load_text("u,time,value\na,1,1\n", "a", 1); }) == ErrorCode::Parse);
}

TEST_CASE("exclude_units drops rows") {
  std::istringstream in("unit,time,value\na,1,1\na,2,2\nb,1,3\nb,2,4\nc,1,5\n");
  PanelSchema s{"unit", "time", "value", {"c"}};
  const auto p = load_panel(in, s, "a", 1);
  CHECK(p.n() == 2);
}

TEST_CASE("california panel shape") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  CHECK(p->n() == 39);
  CHECK(p->t() == 31);
  CHECK(p->t0 == 18);
  CHECK(p->unit_labels.back() == "California");
  CHECK(p->time_labels.front() == "1970");
  CHECK(p->time_labels.back() == "2000");
  CHECK(p->source_digest.size() == 64);
}

TEST_CASE("split_blocks") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const Blocks b = split_blocks(*p, p->t0);
  CHECK(b.y_n.size() == 18);
  CHECK(b.y0.rows() == 38);
  CHECK(b.y0.cols() == 18);
  CHECK(b.y_t.size() == 38);
  CHECK(b.y_t(0) == p->outcomes(0, 18));
  CHECK(code_of([&] { split_blocks(*p, p->t0 - 1); }) == ErrorCode::PeriodBeforeTreatment);
}

TEST_CASE("svd_decompose small cases") {
  const auto c = svd_decompose(Matrix::Identity(3, 3));
  CHECK(c.rank == 3);
  CHECK((c.s - Vector::Ones(3)).norm() < 1e-14);

  Vector u(3), v(4);
  u << 1, 2, 2;
  v << 1, 0, 1, 0;
  u.normalize();
  v.normalize();
  const auto c1 = svd_decompose(u * v.transpose());
  CHECK(c1.rank == 1);
  CHECK(c1.s(0) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(svd_decompose(Matrix::Zero(3, 2)).rank == 0);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { svd_decompose(bad); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("svd_decompose invariants on random matrices") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n0 = 2 + rep % 9, t0 = 2 + (rep * 7) % 11;
    const Index rank = rep % 3 == 0 ? std::min<Index>(1 + rep % 2, std::min(n0, t0)) : -1;
    const Matrix y0 = random_blocks(g, n0, t0, rank).y0;
    const auto c = svd_decompose(y0);
    CHECK((c.u.transpose() * c.u - Matrix::Identity(c.rank, c.rank)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.v.transpose() * c.v - Matrix::Identity(c.rank, c.rank)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((reconstruct(c) - y0).norm() <= 1e-8 * y0.norm());
    for (Index l = 0; l < c.rank; ++l) {
      CHECK(c.s(l) > 0.0);
      if (l > 0) CHECK(c.s(l) <= c.s(l - 1));
    }
    if (rank > 0) CHECK(c.rank == rank);
  }
}

TEST_CASE("california Y0 rank matches a Gram eigenvalue count") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const Matrix y0 = split_blocks(*p, p->t0).y0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(y0.transpose() * y0);
  const Vector ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  Index count = 0;
  for (Index i = 0; i < ev.size(); ++i) count += ev(i) > 1e-20 * top ? 1 : 0;
  CHECK(svd_decompose(y0).rank == count);
  CHECK(count == 18);
  CHECK(hat_matrices(svd_decompose(y0)).h_v.trace() == doctest::Approx(18.0).epsilon(1e-10));
}

TEST_CASE("pseudoinverse") {
  CHECK((pseudoinverse(svd_decompose(Matrix::Identity(4, 4))) - Matrix::Identity(4, 4)).norm() < 1e-14);
  const Matrix z = pseudoinverse(svd_decompose(Matrix::Zero(3, 5)));
  CHECK(z.rows() == 5);
  CHECK(z.cols() == 3);
  CHECK(z.norm() == 0.0);

  std::mt19937_64 g(5);
  const Matrix a = gaussian(g, 4, 3);
  const Matrix oracle = (a.transpose() * a).inverse() * a.transpose();
  CHECK((pseudoinverse(svd_decompose(a)) - oracle).cwiseAbs().maxCoeff() < 1e-9);

  for (int rep = 0; rep < 30; ++rep) {
    const Matrix y = random_blocks(g, 2 + rep % 7, 2 + rep % 5, rep % 2 ? 1 : -1).y0;
    const auto c = svd_decompose(y);
    const Matrix pi = pseudoinverse(c);
    CHECK((y * pi * y - y).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pi * y * pi - pi).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((y * pi).transpose() - y * pi).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((pi * y).transpose() - pi * y).cwiseAbs().maxCoeff() < 1e-8);
    SpectralCache ct = c;
    std::swap(ct.u, ct.v);
    std::swap(ct.rows, ct.cols);
    CHECK((pseudoinverse(ct) - pi.transpose()).norm() <= 1e-12 * (1.0 + pi.norm()));
  }
}

TEST_CASE("rank_k_truncate") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  const auto c = svd_decompose(d);
  const auto c1 = rank_k_truncate(c, 1);
  CHECK(c1.rank == 1);
  CHECK(c1.s(0) == doctest::Approx(3.0));
  Matrix e = Matrix::Zero(3, 3);
  e(0, 0) = 3;
  CHECK((reconstruct(c1) - e).cwiseAbs().maxCoeff() < 1e-12);
  const auto cr = rank_k_truncate(c, 3);
  CHECK((reconstruct(cr) - reconstruct(c)).norm() == 0.0);
  CHECK(code_of([&] { rank_k_truncate(c, 0); }) == ErrorCode::KOutOfRange);
  CHECK(code_of([&] { rank_k_truncate(c, 4); }) == ErrorCode::KOutOfRange);
}

TEST_CASE("Eckart-Young on california Y0 with k=3") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const Matrix y0 = split_blocks(*p, p->t0).y0;
  Eigen::JacobiSVD<Matrix> svd(y0);
  const Vector s = svd.singularValues();
  const double tail = std::sqrt(s.tail(s.size() - 3).squaredNorm());
  const double err = (y0 - reconstruct(rank_k_truncate(svd_decompose(y0), 3))).norm();
  CHECK(err == doctest::Approx(tail).epsilon(1e-8));
}

TEST_CASE("hat matrices are projectors") {
  std::mt19937_64 g(21);
  const auto hi = hat_matrices(svd_decompose(Matrix::Identity(3, 3)));
  CHECK((hi.h_u - Matrix::Identity(3, 3)).norm() < 1e-14);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n0 = 2 + rep % 10, t0 = 2 + (rep * 3) % 10;
    const Matrix y = random_blocks(g, n0, t0, rep % 4 == 0 ? 1 : -1).y0;
    const auto c = svd_decompose(y);
    const auto h = hat_matrices(c);
    for (const Matrix* m : {&h.h_u, &h.h_v}) {
      CHECK((*m * *m - *m).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((m->transpose() - *m).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(m->trace() == doctest::Approx(static_cast<double>(c.rank)).epsilon(1e-8));
      for (Index l = 0; l < m->rows(); ++l) {
        double off = 0.0;
        for (Index j = 0; j < m->cols(); ++j)
          if (j != l) off += (*m)(l, j) * (*m)(l, j);
        CHECK(std::abs(off - (*m)(l, l) * (1.0 - (*m)(l, l))) < 1e-10);
      }
    }
  }
  Vector u(3);
  u << 0, 0.6, 0.8;
  Vector v(2);
  v << 1, 0;
  const auto h1 = hat_matrices(svd_decompose(u * v.transpose()));
  CHECK((h1.h_u - u * u.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace identity tr(Y0+ (Y0')+) = sum 1/s^2") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix y = random_blocks(g, 3 + rep % 6, 2 + rep % 8, rep % 3 == 0 ? 2 : -1).y0;
    const auto c = svd_decompose(y);
    const Matrix pi = pseudoinverse(c);
    const double lhs = (pi * pi.transpose()).trace();
    const double rhs = c.s.array().square().inverse().sum();
    CHECK(std::abs(lhs - rhs) <= 1e-8 * rhs);
  }
}

TEST_CASE("twice_center") {
  Blocks b;
  b.y0 = Matrix::Constant(4, 3, 2.5);
  b.y_n = Vector::Constant(3, 1.0);
  b.y_t = Vector::Constant(4, 7.0);
  const auto c = twice_center(b);
  CHECK(c.y0_centered.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.row_means.array() - 2.5).abs().maxCoeff() < 1e-14);
  CHECK((c.col_means.array() - 2.5).abs().maxCoeff() < 1e-14);
  CHECK(c.time_intercept == doctest::Approx(7.0));
  CHECK(c.unit_intercept == doctest::Approx(1.0));

  std::mt19937_64 g(8);
  Blocks r = random_blocks(g, 6, 5);
  const auto c1 = twice_center(r);
  CHECK(c1.y0_centered.rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c1.y0_centered.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  Blocks again = r;
  again.y0 = c1.y0_centered;
  CHECK((twice_center(again).y0_centered - c1.y0_centered).cwiseAbs().maxCoeff() < 1e-12);

  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  Blocks cal = split_blocks(*p, p->t0);
  cal.y0 = twice_center(cal).y0_centered;
  CHECK((twice_center(cal).y0_centered - cal.y0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy_rank") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 10, 1, 0.01;
  const auto c = svd_decompose(d);
  CHECK(energy_rank(c, 0.5) == 1);
  CHECK(energy_rank(c, 0.999) == 2);
  CHECK(energy_rank(c, 1.0) == 3);
}

}  // TEST_SUITE
