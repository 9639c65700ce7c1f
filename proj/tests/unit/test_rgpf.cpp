#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mapclean/errors.hpp"
#include "mapclean/rgpf.hpp"
#include "test_support.hpp"

using namespace mapclean;

namespace {

using Pts = std::vector<Eigen::Vector3d>;

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d u = a.normalized(), v = b.normalized();
  return std::atan2(u.cross(v).norm(), std::abs(u.dot(v)));
}

// Ground along z = slope * x plus a box floating `clearance` above it.
void ground_and_box(std::mt19937_64& rng, double slope, Pts& pts, std::vector<bool>& is_box) {
  std::uniform_real_distribution<double> gx(0.0, 4.0), gy(-1.0, 1.0), n(-0.01, 0.01);
  for (int i = 0; i < 200; ++i) {
    const double x = gx(rng), y = gy(rng);
    pts.emplace_back(x, y, slope * x + n(rng));
    is_box.push_back(false);
  }
  std::uniform_real_distribution<double> bx(1.5, 2.5), bz(0.3, 1.8);
  for (int i = 0; i < 300; ++i) {
    const double x = bx(rng), y = gy(rng);
    pts.emplace_back(x, y, slope * x + bz(rng));
    is_box.push_back(true);
  }
}

}  // namespace

TEST_SUITE("rgpf") {
  TEST_CASE("Jacobi eigen-solver agrees with a reference solver") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::Matrix3d a;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
      a = (a + a.transpose()).eval();
      if (trial % 5 == 0) a = a * a.transpose();
      const SymmetricEigen3 mine = eigen_symmetric3(a);
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ref(a);
      const double scale = a.norm();
      for (int k = 0; k < 3; ++k) CHECK(std::abs(mine.values[k] - ref.eigenvalues()[k]) <= 1e-10 * scale);
      CHECK((a * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm() <= 1e-10 * scale);
      CHECK((mine.vectors.transpose() * mine.vectors - Eigen::Matrix3d::Identity()).norm() < 1e-10);
      CHECK(std::is_sorted(mine.values.data(), mine.values.data() + 3));
    }
  }

  TEST_CASE("seed selection") {
    Pts flat(30, Eigen::Vector3d::Zero());
    CHECK(select_seeds(flat, 0.5, 20).size() == 30);
    const Pts three{{0, 0, 0.0}, {1, 0, 0.1}, {2, 0, 2.0}};
    CHECK(select_seeds(three, 0.5, 2) == std::vector<std::size_t>{0, 1});
    // Fewer points than num_seed_points: the mean covers all of them.
    CHECK(select_seeds(three, 0.5, 20) == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("plane recovery without noise") {
    Pts flat;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) flat.emplace_back(i * 0.3, j * 0.2, 0.0);
    const PlaneModel p0 = fit_plane_pca(flat);
    CHECK((p0.normal - Eigen::Vector3d::UnitZ()).norm() < 1e-9);
    CHECK(std::abs(p0.d) < 1e-9);

    Pts tilted;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) tilted.emplace_back(i * 0.3, j * 0.2, 0.1 * i * 0.3 + 2.0);
    const PlaneModel p = fit_plane_pca(tilted);
    const Eigen::Vector3d truth = Eigen::Vector3d(-0.1, 0.0, 1.0).normalized();
    CHECK(angle_between(p.normal, truth) < 1e-9);
    CHECK(p.normal.z() > 0.0);
    CHECK(std::abs(p.normal.norm() - 1.0) < 1e-12);
    for (const auto& q : tilted) CHECK(std::abs(p.signed_distance(q)) < 1e-9);
  }

  TEST_CASE("random noise-free planes are recovered exactly") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::Vector3d n(0.3 * u(rng), 0.3 * u(rng), 1.0);
      n.normalize();
      const double d = u(rng);
      Pts pts;
      for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = u(rng);
        pts.emplace_back(x, y, -(n.x() * x + n.y() * y + d) / n.z());
      }
      const PlaneModel p = fit_plane_pca(pts);
      CHECK(angle_between(p.normal, n) < 1e-9);
      CHECK(std::abs(p.d - d) < 1e-8);
    }
  }

  TEST_CASE("noisy planes stay within two degrees") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> errs;
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Vector3d n = Eigen::Vector3d(0.1 * u(rng), 0.1 * u(rng), 1.0).normalized();
      Pts pts;
      for (int i = 0; i < 100; ++i) {
        const double x = u(rng), y = u(rng);
        pts.emplace_back(x, y, -(n.x() * x + n.y() * y) / n.z() + noise(rng));
      }
      errs.push_back(angle_between(fit_plane_pca(pts).normal, n));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[static_cast<std::size_t>(0.95 * errs.size())] < 2.0 * std::numbers::pi / 180.0);
  }

  TEST_CASE("the fitted plane beats random planes through the centroid") {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Pts pts;
      for (int i = 0; i < 80; ++i) pts.emplace_back(u(rng), u(rng), 0.3 * u(rng));
      const PlaneModel p = fit_plane_pca(pts);
      auto sse = [&](const Eigen::Vector3d& n) {
        double s = 0.0;
        for (const auto& q : pts) s += std::pow(n.dot(q - p.mean), 2);
        return s;
      };
      const double best = sse(p.normal);
      for (int k = 0; k < 100; ++k) {
        const Eigen::Vector3d n = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
        CHECK(best <= sse(n) + 1e-12);
      }
    }
  }

  TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(fit_plane_pca(Pts{{0, 0, 0}, {1, 0, 0}}), DegenerateFitError);
    CHECK_THROWS_AS(fit_plane_pca(Pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}), DegenerateFitError);
    const PipelineConfig cfg;
    const Pts line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    const BinSplit s = rgpf_bin(line, cfg);
    CHECK(s.degenerate);
    CHECK(s.ground.size() == 4);
    CHECK(s.dynamic.empty());
    CHECK_THROWS_AS(fit_ground_global(line, cfg), DegenerateFitError);
    const BinSplit e = fit_ground_global(Pts{}, cfg);
    CHECK(e.ground.empty());
    CHECK(e.dynamic.empty());
  }

  TEST_CASE("inlier margin") {
    const PlaneModel z0;
    const Pts pts{{0, 0, 0.1}, {0, 0, 0.2}, {0, 0, -0.5}};
    CHECK(extract_inliers(pts, z0, 0.15) == std::vector<std::size_t>{0, 2});
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Pts many;
    for (int i = 0; i < 500; ++i) many.emplace_back(u(rng), u(rng), u(rng));
    for (double t = 0.01; t < 0.5; t += 0.05) {
      const auto a = extract_inliers(many, z0, t), b = extract_inliers(many, z0, t + 0.05);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }

  TEST_CASE("ground and box separate on flat and sloped ground") {
    const PipelineConfig cfg;
    for (double slope : {0.0, std::tan(8.0 * std::numbers::pi / 180.0)}) {
      std::mt19937_64 rng(36);
      Pts pts;
      std::vector<bool> is_box;
      ground_and_box(rng, slope, pts, is_box);
      const BinSplit s = rgpf_bin(pts, cfg);
      std::size_t box_dyn = 0, ground_kept = 0;
      std::vector<bool> ground(pts.size(), false);
      for (auto k : s.ground) ground[k] = true;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (is_box[k] && !ground[k]) ++box_dyn;
        if (!is_box[k] && ground[k]) ++ground_kept;
      }
      INFO("slope " << slope);
      CHECK(box_dyn >= 0.99 * 300);
      CHECK(ground_kept >= 0.95 * 200);
      CHECK(s.ground.size() + s.dynamic.size() == pts.size());
      std::vector<std::size_t> all = s.ground;
      all.insert(all.end(), s.dynamic.begin(), s.dynamic.end());
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());

    }
  }

  TEST_CASE("seeds come from the ground when the box clears the seed margin") {
    const PipelineConfig cfg;
    std::mt19937_64 rng(39);
    Pts pts;
    std::vector<bool> is_box;
    ground_and_box(rng, 0.0, pts, is_box);
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (is_box[k]) pts[k].z() += 0.3;
    const auto seeds = select_seeds(pts, cfg.seed_margin, cfg.num_seed_points);
    CHECK(seeds.size() >= 150);
    for (auto k : seeds) CHECK_FALSE(is_box[k]);
  }

  TEST_CASE("inliers against the true ground plane") {
    std::mt19937_64 rng(37);
    Pts pts;
    std::vector<bool> is_box;
    ground_and_box(rng, 0.0, pts, is_box);
    const auto in = extract_inliers(pts, PlaneModel{}, 0.15);
    std::vector<std::size_t> expect;
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (!is_box[k] || pts[k].z() < 0.15) expect.push_back(k);
    CHECK(in == expect);
  }

  TEST_CASE("flat ground only gives an empty dynamic set, like the global fit") {
    const PipelineConfig cfg;
    std::mt19937_64 rng(38);
    std::uniform_real_distribution<double> u(-2.0, 2.0), n(-0.02, 0.02);
    Pts pts;
    for (int i = 0; i < 300; ++i) pts.emplace_back(u(rng), u(rng), n(rng));
    const BinSplit a = rgpf_bin(pts, cfg), b = fit_ground_global(pts, cfg);
    CHECK(a.dynamic.empty());
    CHECK(a.ground == b.ground);
    CHECK(a.dynamic == b.dynamic);
  }
}
