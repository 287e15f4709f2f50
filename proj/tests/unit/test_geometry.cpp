#include <doctest.h>

#include <cmath>

#include "scorelab/errors.hpp"
#include "scorelab/geometry.hpp"
#include "test_helpers.hpp"

using namespace scorelab;
using testutil::vec2;

TEST_CASE("voronoi classification") {
  const Dataset two = testutil::symmetric2();

  SUBCASE("strictly closer point wins") {
    const VoronoiClassification c = voronoi_classify(two, vec2(0.5, 0));
    CHECK_FALSE(c.on_boundary);
    CHECK(c.nearest == 0);
  }

  SUBCASE("equidistant on the bisector") {
    const VoronoiClassification c = voronoi_classify(two, vec2(0, 2));
    CHECK(c.on_boundary);
    CHECK(c.gap == 0.0);
    CHECK(((c.nearest == 0 && c.second == 1) || (c.nearest == 1 && c.second == 0)));
  }

  SUBCASE("data point classifies into its own cell") {
    const Dataset d = testutil::gaussian2d(20, 19);
    const VoronoiClassification c = voronoi_classify(d, d.point(7));
    CHECK_FALSE(c.on_boundary);
    CHECK(c.nearest == 7);
  }

  SUBCASE("duplicates are rejected") {
    const Dataset dup({vec2(1, 1), vec2(1, 1), vec2(0, 0)});
    CHECK_THROWS_AS(voronoi_classify(dup, vec2(0, 0)), InvalidDatasetError);
  }
}

TEST_CASE("partition property with a brute-force oracle") {
  const Dataset d = testutil::gaussian2d(20, 19);
  Rng rng(71);
  for (int k = 0; k < 10000; ++k) {
    const Eigen::VectorXd x = 2.5 * rng.normal_vec(2);
    const VoronoiClassification c = voronoi_classify(d, x);
    int nn = 0;
    double best = (x - d.point(0)).squaredNorm();
    for (int n = 1; n < d.size(); ++n) {
      const double d2 = (x - d.point(n)).squaredNorm();
      if (d2 < best) {
        best = d2;
        nn = n;
      }
    }
    if (!c.on_boundary) CHECK(c.nearest == nn);
    CHECK((c.on_boundary || c.nearest >= 0));
  }
}

TEST_CASE("classification is invariant under rigid motion") {
  const Dataset d = testutil::gaussian2d(15, 5);
  const double theta = 0.83;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::Vector2d shift(2.5, -1.0);

  std::vector<Eigen::VectorXd> moved;
  for (int n = 0; n < d.size(); ++n)
    moved.push_back((rot * d.point(n).head<2>() + shift).eval());
  const Dataset dm(moved);

  Rng rng(6);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd x = 2.0 * rng.normal_vec(2);
    const Eigen::VectorXd xm = (rot * x.head<2>() + shift).eval();
    const VoronoiClassification a = voronoi_classify(d, x, 1e-9);
    const VoronoiClassification b = voronoi_classify(dm, xm, 1e-9);
    CHECK(a.on_boundary == b.on_boundary);
    if (!a.on_boundary) CHECK(a.nearest == b.nearest);
  }
}

TEST_CASE("cell margin") {
  const Dataset two = testutil::symmetric2();
  CHECK(cell_margin(two, vec2(0.5, 0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(cell_margin(two, vec2(0, 5)) == 0.0);

  SUBCASE("nesting: larger margin implies membership at smaller margin") {
    const Dataset d = testutil::gaussian2d(12, 3);
    Rng rng(14);
    for (int k = 0; k < 500; ++k) {
      const Eigen::VectorXd x = 2.0 * rng.normal_vec(2);
      const double eps = cell_margin(d, x);
      // x in V_eps and eps1 > eps2  =>  x in V_eps2.
      CHECK(eps >= 0.0);
      if (eps > 0.1) CHECK(cell_margin(d, x) > 0.05);
    }
  }
}

TEST_CASE("pairwise extremes") {
  CHECK(pairwise_extremes(testutil::symmetric2()) == std::pair<double, double>{2.0, 2.0});

  const Dataset line({testutil::vec1(0), testutil::vec1(1), testutil::vec1(3)});
  CHECK(pairwise_extremes(line) == std::pair<double, double>{1.0, 3.0});

  SUBCASE("20-point set against the O(N^2) oracle") {
    const Dataset d = testutil::gaussian2d(20, 19);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < d.size(); ++i)
      for (int j = 0; j < d.size(); ++j)
        if (i != j) {
          const double dist = (d.point(i) - d.point(j)).norm();
          lo = std::min(lo, dist);
          hi = std::max(hi, dist);
        }
    const auto [d_minus, d_plus] = pairwise_extremes(d);
    CHECK(d_minus == lo);
    CHECK(d_plus == hi);
  }

  CHECK_THROWS_AS(pairwise_extremes(Dataset({vec2(0, 0)})), InvalidDatasetError);
}

TEST_CASE("memorization fraction") {
  const Dataset d = testutil::gaussian2d(10, 9);

  SUBCASE("samples equal to the dataset collapse fully") {
    const MemorizationReport rep = memorization_fraction(d.points(), d, 1e-2);
    CHECK(rep.fraction_collapsed == 1.0);
    int hist_total = 0;
    for (int cnt : rep.cell_histogram) hist_total += cnt;
    CHECK(hist_total == d.size());
  }

  SUBCASE("distant samples do not collapse") {
    std::vector<Eigen::VectorXd> far(5, vec2(100, 100));
    CHECK(memorization_fraction(far, d, 1e-2).fraction_collapsed == 0.0);
  }

  SUBCASE("planted distances give the exact fraction") {
    const double tau = 0.1;
    std::vector<Eigen::VectorXd> samples;
    for (int n = 0; n < 6; ++n) {
      const Eigen::VectorXd offset = vec2(n < 4 ? 0.5 * tau : 2.0 * tau, 0);
      samples.push_back(d.point(n) + offset);
    }
    // Exclude planted points that land nearer another data point than intended.
    const MemorizationReport rep = memorization_fraction(samples, d, tau);
    int expected = 0;
    for (int n = 0; n < 6; ++n) {
      double best = 1e300;
      for (int m = 0; m < d.size(); ++m)
        best = std::min(best, (samples[n] - d.point(m)).norm());
      if (best < tau) ++expected;
    }
    CHECK(rep.fraction_collapsed == doctest::Approx(expected / 6.0));
  }

  SUBCASE("contracts") {
    CHECK_THROWS_AS(memorization_fraction({}, d, 0.1), DomainError);
    CHECK_THROWS_AS(memorization_fraction(d.points(), d, 0.0), DomainError);
  }
}

TEST_CASE("convergence rate fit") {
  const Schedule ve = Schedule::ve_quadratic();
  const Dataset d = testutil::gaussian2d(5, 21);

  SUBCASE("planted exponential has slope -1 and perfect fit") {
    Trajectory traj;
    const Eigen::VectorXd v = vec2(0.3, 0.4);
    const Eigen::VectorXd x0 = d.point(2);
    for (int i = 0; i <= 200; ++i) {
      const double s = 0.0 + 6.0 * i / 200.0;
      traj.s_values.push_back(s);
      traj.times.push_back(std::exp(-s));  // consistent with sigma(t) = t
      traj.states.push_back(x0 + std::exp(-s) * v);
    }
    const RateFit fit = convergence_rate_fit(traj, d, ve, 0.3, 1e-1);
    CHECK(fit.limit_index == 2);
    CHECK(fit.slope_s == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit.slope_sigma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.r2 >= 1.0 - 1e-12);
  }

  SUBCASE("not-collapsed trajectories are rejected") {
    Trajectory traj;
    for (int i = 0; i <= 100; ++i) {
      traj.times.push_back(1.0 - 0.009 * i);
      traj.states.push_back(vec2(50, 50));
    }
    CHECK_THROWS_AS(convergence_rate_fit(traj, d, ve, 0.3, 1e-2), NotCollapsedError);
  }
}

TEST_CASE("voronoi edges in 2D") {
  SUBCASE("two points produce their bisector") {
    const auto segs = voronoi_edges_2d(testutil::symmetric2(), -2, 2, -2, 2);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].a.x() == doctest::Approx(0.0));
    CHECK(segs[0].b.x() == doctest::Approx(0.0));
    CHECK(std::abs(segs[0].a.y() - segs[0].b.y()) == doctest::Approx(4.0));
  }

  SUBCASE("edge midpoints are equidistant from their two generators") {
    const Dataset d = testutil::gaussian2d(20, 19);
    const auto segs = voronoi_edges_2d(d, -3, 3, -3, 3);
    CHECK(segs.size() >= static_cast<std::size_t>(d.size()) - 1);
    for (const auto& seg : segs) {
      const Eigen::Vector2d mid = 0.5 * (seg.a + seg.b);
      std::vector<double> dists;
      for (int n = 0; n < d.size(); ++n)
        dists.push_back((mid - d.point(n).head<2>()).norm());
      std::sort(dists.begin(), dists.end());
      CHECK(dists[1] - dists[0] <= 1e-7 * (1.0 + dists[0]));
    }
  }
}
