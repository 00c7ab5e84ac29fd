// Copyright 2026 The xsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "xsim/error.hpp"
#include "xsim/simindex.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using testutil::gaussian;
using xsim::IndexKind;
using xsim::IndexSpec;

IndexSpec spec_for(IndexKind kind) {
  IndexSpec spec;
  spec.kind = kind;
  return spec;
}

MatrixXd translate(const MatrixXd& x, std::mt19937_64& rng) {
  const RowVectorXd c = gaussian(1, x.cols(), rng, 5.0);
  return x.rowwise() + c;
}

void check_cca_result(const xsim::CcaResult& r) {
  REQUIRE_FALSE(r.correlations.empty());
  CHECK(r.correlations.size() == r.weights.size());
  for (std::size_t i = 0; i < r.correlations.size(); ++i) {
    CHECK(r.correlations[i] >= 0.0);
    CHECK(r.correlations[i] <= 1.0);
    CHECK(r.weights[i] >= 0.0);
    if (i > 0) CHECK(r.correlations[i] <= r.correlations[i - 1]);
  }
  CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.score >= 0.0);
  CHECK(r.score <= 1.0);
}

}  // namespace

TEST_CASE("cca: identity and invertible maps") {
  std::mt19937_64 rng(11);
  const MatrixXd x = gaussian(100, 5, rng);
  const auto self = xsim::cca(x, x);
  CHECK(self.score == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(self.rank_x == 5);
  CHECK(self.rank_y == 5);
  check_cca_result(self);

  const MatrixXd a = testutil::invertible(5, rng);
  CHECK(std::abs(xsim::cca(x, x * a).score - 1.0) <= 1e-6);
  CHECK(std::abs(xsim::cca(x, translate(x * a, rng)).score - 1.0) <= 1e-6);
}

TEST_CASE("cca matches the covariance eigenproblem on independent data") {
  std::mt19937_64 rng(12);
  const MatrixXd x = gaussian(1000, 2, rng);
  const MatrixXd y = gaussian(1000, 2, rng);
  const auto got = xsim::cca(x, y);
  const auto want = oracle::canonical_pairs(x, y);
  REQUIRE(got.correlations.size() == 2);
  CHECK(std::abs(got.correlations[0] - want.rho[0]) <= 1e-8);
  CHECK(std::abs(got.correlations[1] - want.rho[1]) <= 1e-8);
  CHECK(std::abs(got.score - oracle::cca_mean(x, y)) <= 1e-8);
  // Independent data: small but nonzero correlations.
  CHECK(got.score < 0.2);
}

TEST_CASE("cca is symmetric and handles unequal widths") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = gaussian(60, 7, rng);
    const MatrixXd y = x.leftCols(3) * gaussian(3, 4, rng) +
                       0.5 * gaussian(60, 4, rng);
    const auto xy = xsim::cca(x, y);
    const auto yx = xsim::cca(y, x);
    CHECK(std::abs(xy.score - yx.score) <= 1e-8);
    CHECK(xy.correlations.size() == 4);
    check_cca_result(xy);
    CHECK(std::abs(xy.score - oracle::cca_mean(x, y)) <= 1e-8);
  }
}

TEST_CASE("rank deficiency drops directions") {
  std::mt19937_64 rng(14);
  MatrixXd x = gaussian(80, 6, rng);
  x.col(5) = 2.0 * x.col(0) - x.col(3);
  x.col(4).setConstant(3.0);
  const MatrixXd y = gaussian(80, 6, rng);
  const auto r = xsim::cca(x, y);
  CHECK(r.rank_x == 4);
  CHECK(r.rank_y == 6);
  CHECK(r.correlations.size() == 4);
  CHECK(xsim::cca(x, x).score == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("svcca") {
  std::mt19937_64 rng(15);
  const MatrixXd x = gaussian(100, 30, rng);
  IndexSpec spec;
  CHECK(spec.svcca_components == 20);
  const auto self = xsim::svcca(x, x, spec);
  CHECK(self.score == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(self.rank_x == 20);
  CHECK(self.correlations.size() == 20);

  const MatrixXd y = x.leftCols(8) * gaussian(8, 10, rng) +
                     gaussian(100, 10, rng);
  const MatrixXd x10 = x.leftCols(10);
  spec.svcca_components = 10;
  CHECK(std::abs(xsim::svcca(x10, y, spec).score -
                 xsim::cca(x10, y).score) <= 1e-6);
  CHECK(xsim::svcca(x10, y, spec).warnings.empty());

  spec.svcca_components = 20;
  const auto clamped = xsim::svcca(x10, y, spec);
  CHECK(clamped.rank_x == 10);
  REQUIRE_FALSE(clamped.warnings.empty());
  CHECK(clamped.warnings[0].find("clamped") != std::string::npos);

  spec.svcca_components = 3;
  const auto small = xsim::svcca(x10, y, spec);
  CHECK(small.correlations.size() == 3);
  check_cca_result(small);
}

TEST_CASE("pwcca: identity, translation and isotropic scaling") {
  std::mt19937_64 rng(16);
  const MatrixXd x = gaussian(120, 6, rng);
  CHECK(xsim::pwcca(x, x).score == doctest::Approx(1.0).epsilon(1e-8));
  const MatrixXd y = x * gaussian(6, 5, rng) + gaussian(120, 5, rng);
  const double base = xsim::pwcca(x, y).score;
  CHECK(std::abs(xsim::pwcca(x, translate(3.0 * y, rng)).score - base) <=
        1e-8);
  CHECK(std::abs(xsim::pwcca(translate(0.2 * x, rng), y).score - base) <=
        1e-8);
  check_cca_result(xsim::pwcca(x, y));
}

TEST_CASE("pwcca matches the explicit projection-weight oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = gaussian(50, 6, rng);
    const MatrixXd y = x.leftCols(2) * gaussian(2, 4, rng) +
                       gaussian(50, 4, rng);
    CHECK(std::abs(xsim::pwcca(x, y).score - oracle::pwcca(x, y)) <= 1e-8);
    CHECK(std::abs(xsim::pwcca(y, x).score - oracle::pwcca(y, x)) <= 1e-8);
  }
}

TEST_CASE("pwcca direction and symmetric mode") {
  std::mt19937_64 rng(18);
  const MatrixXd x = gaussian(200, 8, rng);
  MatrixXd y = gaussian(200, 8, rng);
  y.leftCols(2) += 3.0 * x.leftCols(2);
  y.col(0) *= 10.0;
  const double xy = xsim::pwcca(x, y).score;
  const double yx = xsim::pwcca(y, x).score;
  CHECK(std::abs(xy - yx) > 1e-3);

  IndexSpec sym;
  sym.pwcca_reference = xsim::PwccaReference::kSymmetricMean;
  CHECK(sym.symmetric());
  CHECK_FALSE(spec_for(IndexKind::kPwcca).symmetric());
  const auto a = xsim::pwcca(x, y, sym);
  const auto b = xsim::pwcca(y, x, sym);
  CHECK(std::abs(a.score - b.score) <= 1e-12);
  check_cca_result(a);
}

TEST_CASE("cka: identity, orthogonal maps, translation and scaling") {
  std::mt19937_64 rng(19);
  const MatrixXd x = gaussian(100, 12, rng);
  CHECK(std::abs(xsim::cka(x, x) - 1.0) <= 1e-10);
  const MatrixXd q = testutil::orthogonal(12, rng);
  CHECK(std::abs(xsim::cka(x, translate(x * q, rng)) - 1.0) <= 1e-8);

  const MatrixXd y = gaussian(100, 9, rng);
  const double base = xsim::cka(x, y);
  CHECK(std::abs(xsim::cka(x, 7.5 * y) - base) <= 1e-10);
  CHECK(std::abs(xsim::cka(y, x) - base) <= 1e-12);
  CHECK(base >= 0.0);
  CHECK(base <= 1.0);

  // Not invariant to general invertible maps.
  MatrixXd stretch = MatrixXd::Identity(12, 12);
  stretch(0, 0) = 50.0;
  CHECK(xsim::cka(x, x * stretch) < 0.99);
}

TEST_CASE("cka matches the element-wise HSIC oracle") {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = gaussian(50, 7, rng);
    const MatrixXd y = x * gaussian(7, 7, rng) + 2.0 * gaussian(50, 7, rng);
    CHECK(std::abs(xsim::cka(x, y) - oracle::cka(x, y)) <= 1e-8);
  }
  // Wide inputs take the other Gram path.
  const MatrixXd x = gaussian(20, 40, rng);
  const MatrixXd y = gaussian(20, 35, rng);
  CHECK(std::abs(xsim::cka(x, y) - oracle::cka(x, y)) <= 1e-8);
}

TEST_CASE("cosine aggregates") {
  std::mt19937_64 rng(21);
  const MatrixXd x = gaussian(50, 10, rng);
  CHECK(xsim::cosine_parallel(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(xsim::cosine_parallel(x, -x) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(xsim::cosine_permuted(x, x, 3) < 0.5);

  MatrixXd zero_row = x;
  zero_row.row(7).setZero();
  try {
    xsim::cosine_parallel(x, zero_row);
    FAIL("accepted a zero row");
  } catch (const xsim::ValidationError& e) {
    CHECK(std::string(e.what()).find("row 7") != std::string::npos);
  }
  CHECK_THROWS_AS(xsim::cosine_parallel(x, x.leftCols(9)),
                  xsim::ValidationError);
}

TEST_CASE("permuted cosine of isotropic data is within 3 sigma of zero") {
  constexpr int kN = 1000;
  constexpr int kD = 768;
  std::mt19937_64 rng(22);
  const MatrixXd x = gaussian(kN, kD, rng);
  const MatrixXd y = gaussian(kN, kD, rng);

  // Monte-Carlo estimate of the spread of one cosine between independent
  // isotropic vectors, then of the mean of kN such terms.
  std::mt19937_64 mc(23);
  constexpr int kDraws = 4000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int t = 0; t < kDraws; ++t) {
    const Eigen::VectorXd a = gaussian(kD, 1, mc);
    const Eigen::VectorXd b = gaussian(kD, 1, mc);
    const double c = a.dot(b) / (a.norm() * b.norm());
    sum += c;
    sum_sq += c * c;
  }
  const double var = (sum_sq - sum * sum / kDraws) / (kDraws - 1);
  const double sigma = std::sqrt(var / kN);

  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    CHECK(std::abs(xsim::cosine_permuted(x, y, seed)) <= 3.0 * sigma);
  }
  CHECK(std::abs(xsim::cosine_permuted(x, x, 0)) <= 3.0 * sigma);
}

TEST_CASE("seeded derangement") {
  for (std::size_t n : {2u, 3u, 5u, 100u, 1000u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = xsim::seeded_derangement(n, seed);
      REQUIRE(p.size() == n);
      std::vector<std::size_t> sorted = p;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(sorted[i] == i);
        CHECK(p[i] != i);
      }
      CHECK(xsim::seeded_derangement(n, seed) == p);
    }
  }
  CHECK(xsim::seeded_derangement(2, 9) == std::vector<std::size_t>{1, 0});
  CHECK(xsim::seeded_derangement(100, 1) != xsim::seeded_derangement(100, 2));
  CHECK_THROWS_AS(xsim::seeded_derangement(1, 0), xsim::ValidationError);

  // All 2 derangements of 3 items show up.
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    seen.insert(xsim::seeded_derangement(3, seed));
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("input validation and warnings") {
  std::mt19937_64 rng(24);
  const MatrixXd x = gaussian(30, 4, rng);
  for (auto kind : {IndexKind::kCca, IndexKind::kSvcca, IndexKind::kPwcca,
                    IndexKind::kCka, IndexKind::kCosine}) {
    CHECK_THROWS_AS(xsim::score(x, gaussian(29, 4, rng), spec_for(kind)),
                    xsim::ValidationError);
  }
  const MatrixXd flat = MatrixXd::Constant(30, 4, 2.5);
  CHECK_THROWS_AS(xsim::cka(x, flat), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::cca(flat, x), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::cca(x.topRows(1), x.topRows(1)),
                  xsim::ValidationError);

  const MatrixXd wide = gaussian(10, 20, rng);
  const auto r = xsim::cca(wide, gaussian(10, 3, rng));
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings[0].find("fewer rows") != std::string::npos);
  CHECK(r.rank_x == 9);

  IndexSpec bad;
  bad.svcca_components = 0;
  CHECK_THROWS_AS(bad.validate(), xsim::ValidationError);
  bad = IndexSpec{};
  bad.rank_tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), xsim::ValidationError);
  bad = IndexSpec{};
  bad.regularization = -1.0;
  CHECK_THROWS_AS(bad.validate(), xsim::ValidationError);

  CHECK(xsim::parse_index_kind("pwcca") == IndexKind::kPwcca);
  CHECK_THROWS_AS(xsim::parse_index_kind("rbf"), xsim::ValidationError);
}

TEST_CASE("ridge regularization shrinks toward the unregularized score") {
  std::mt19937_64 rng(25);
  const MatrixXd x = gaussian(80, 6, rng);
  const MatrixXd y = x * gaussian(6, 6, rng) + gaussian(80, 6, rng);
  const double plain = xsim::cca(x, y).score;
  IndexSpec tiny;
  tiny.regularization = 1e-12;
  CHECK(std::abs(xsim::cca(x, y, tiny).score - plain) <= 1e-8);
  IndexSpec strong;
  strong.regularization = 10.0;
  const auto r = xsim::cca(x, y, strong);
  check_cca_result(r);
  CHECK(r.score < plain);
}

TEST_CASE("prepared views reproduce direct scores bit for bit") {
  std::mt19937_64 rng(26);
  const MatrixXd x = gaussian(70, 9, rng);
  const MatrixXd y = x * gaussian(9, 9, rng) + gaussian(70, 9, rng);
  for (auto kind : {IndexKind::kCca, IndexKind::kSvcca, IndexKind::kPwcca,
                    IndexKind::kCka, IndexKind::kCosine}) {
    IndexSpec spec = spec_for(kind);
    spec.svcca_components = 5;
    const auto px = xsim::prepare(x, spec);
    const auto py = xsim::prepare(y, spec);
    CHECK(xsim::score(px, py, spec).value == xsim::score(x, y, spec).value);
  }
  CHECK_THROWS_AS(xsim::score(xsim::prepare(x, spec_for(IndexKind::kCka)),
                              xsim::prepare(y, spec_for(IndexKind::kCka)),
                              spec_for(IndexKind::kCca)),
                  xsim::ValidationError);
}

TEST_CASE("random instances against the oracles") {
  std::mt19937_64 rng(27);
  std::uniform_int_distribution<int> rows(20, 64);
  std::uniform_int_distribution<int> cols(1, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rows(rng);
    const int dx = cols(rng);
    const int dy = cols(rng);
    const MatrixXd x = gaussian(n, dx, rng);
    const MatrixXd y = 0.5 * x * gaussian(dx, dy, rng) + gaussian(n, dy, rng);
    CHECK(std::abs(xsim::cka(x, y) - oracle::cka(x, y)) <= 1e-8);
    CHECK(std::abs(xsim::cca(x, y).score - oracle::cca_mean(x, y)) <= 1e-8);
    CHECK(std::abs(xsim::pwcca(x, y).score - oracle::pwcca(x, y)) <= 1e-8);
  }
}
