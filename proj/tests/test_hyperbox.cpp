#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "hmr/error.hpp"
#include "hmr/hyperbox.hpp"
#include "oracles.hpp"

using namespace hmr;

namespace {

using Vec = std::vector<double>;

const MembershipParams kUnit1 = MembershipParams::uniform(1);
const MembershipParams kUnit2 = MembershipParams::uniform(2);

ClusterConfig config(double theta, std::size_t k = 3, double fraction = 0.6) {
  ClusterConfig c;
  c.theta = theta;
  c.top_k = k;
  c.expansion_fraction = fraction;
  return c;
}

Hyperbox random_box(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    lo[i] = std::min(a, b);
    hi[i] = std::max(a, b);
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("ramp branches") {
  CHECK(ramp(0.5, 1.0) == 0.5);
  CHECK(ramp(1.5, 1.0) == 1.0);
  CHECK(ramp(-0.3, 1.0) == 0.0);
  CHECK(ramp(0.25, 2.0) == 0.5);
  CHECK_THROWS_AS(ramp(std::numeric_limits<double>::quiet_NaN(), 1.0), InvalidArgument);
  CHECK_THROWS_AS(ramp(std::numeric_limits<double>::infinity(), 1.0), InvalidArgument);
  CHECK_THROWS_AS(ramp(0.1, 0.0), InvalidArgument);
}

TEST_CASE("membership examples") {
  const Hyperbox box({0.2, 0.2}, {0.4, 0.4});
  CHECK(membership(box, Vec{0.3, 0.25}, kUnit2) == 1.0);
  CHECK(membership(Hyperbox::point(Vec{0.5}), Vec{0.7}, kUnit1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(membership(box, Vec{0.5, 0.9}, kUnit2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(membership(box, Vec{0.3}, kUnit2), InvalidArgument);
  CHECK_THROWS_AS(membership(box, Vec{0.3, 0.3}, kUnit1), InvalidArgument);
}

TEST_CASE("hyperbox and params validation") {
  CHECK_THROWS_AS(Hyperbox({0.5}, {0.4}), InvalidArgument);
  CHECK_THROWS_AS(Hyperbox({0.1, 0.2}, {0.4}), InvalidArgument);
  CHECK_THROWS_AS(Hyperbox({}, {}), InvalidArgument);
  CHECK_THROWS_AS(MembershipParams({1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(MembershipParams({-1.0}), InvalidArgument);
  CHECK_THROWS_AS(config(1.2).validate(), InvalidArgument);
  CHECK_THROWS_AS(config(0.3, 0).validate(), InvalidArgument);
  CHECK_THROWS_AS(config(0.3, 1, 0.0).validate(), InvalidArgument);
  CHECK_NOTHROW(config(0.0, 1, 1.0).validate());
}

TEST_CASE("rank_winners examples") {
  // point boxes at distance 0.6 and 0.1 from x = 0 give memberships 0.4 and 0.9
  const std::vector<Hyperbox> two{Hyperbox::point(Vec{0.6}), Hyperbox::point(Vec{0.1})};
  auto w = rank_winners(two, Vec{0.0}, kUnit1, 1);
  REQUIRE(w.size() == 1);
  CHECK(w[0].index == 1);
  CHECK(w[0].membership == doctest::Approx(0.9));

  const std::vector<Hyperbox> tied{Hyperbox::point(Vec{0.2}), Hyperbox::point(Vec{0.8})};
  w = rank_winners(tied, Vec{0.5}, kUnit1, 1);
  REQUIRE(w.size() == 1);
  CHECK(w[0].index == 0);
  CHECK(w[0].membership == doctest::Approx(0.7));

  const std::vector<Hyperbox> three{Hyperbox::point(Vec{0.9}), Hyperbox::point(Vec{0.5}),
                                    Hyperbox::point(Vec{0.7})};
  w = rank_winners(three, Vec{0.0}, kUnit1, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].index == 1);
  CHECK(w[0].membership == doctest::Approx(0.5));
  CHECK(w[1].index == 2);
  CHECK(w[1].membership == doctest::Approx(0.3));

  CHECK(rank_winners(three, Vec{0.0}, kUnit1, 10).size() == 3);
  CHECK(rank_winners({}, Vec{0.0}, kUnit1, 3).empty());
}

TEST_CASE("can_expand examples") {
  CHECK(can_expand(Hyperbox({0.1}, {0.2}), Vec{0.35}, config(0.3)));
  CHECK_FALSE(can_expand(Hyperbox({0.1, 0.1}, {0.2, 0.2}), Vec{0.35, 0.95}, config(0.3)));
  CHECK(can_expand(Hyperbox::point(Vec{0.4, 0.6}), Vec{0.4, 0.6}, config(0.0)));
  CHECK(required_dimensions(2, 0.6) == 2);
  CHECK(required_dimensions(5, 0.6) == 3);
  CHECK(required_dimensions(10, 0.6) == 6);
  CHECK(required_dimensions(23, 0.6) == 14);
  CHECK(required_dimensions(3, 1.0) == 3);
}

TEST_CASE("expand examples") {
  CHECK(expand(Hyperbox({0.3}, {0.5}), Vec{0.1}) == Hyperbox({0.1}, {0.5}));
  CHECK(expand(Hyperbox({0.3}, {0.5}), Vec{0.4}) == Hyperbox({0.3}, {0.5}));
  CHECK(expand(Hyperbox({0.2, 0.2}, {0.4, 0.4}), Vec{0.5, 0.1}) == Hyperbox({0.2, 0.1}, {0.5, 0.4}));
}

TEST_CASE("cluster examples") {
  const Vec samples{0.1, 0.9, 0.1};
  auto boxes = cluster(samples, 1, config(0.0, 1), kUnit1);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0] == Hyperbox::point(Vec{0.1}));
  CHECK(boxes[1] == Hyperbox::point(Vec{0.9}));

  boxes = cluster(Vec{0.0, 0.3, 0.6, 0.95}, 1, config(0.35, 1), kUnit1);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0] == Hyperbox({0.0}, {0.3}));
  CHECK(boxes[1] == Hyperbox({0.6}, {0.95}));

  CHECK(cluster(Vec{}, 2, config(0.3), kUnit2).empty());
  CHECK_THROWS_AS(cluster(Vec{0.1, 0.2, 0.3}, 2, config(0.3), kUnit2), InvalidArgument);
}

TEST_CASE("top-k tries later winners when the best one cannot expand") {
  // x = 0.5: box 0 [0.52, 0.9] is closest but would grow too wide; box 1
  // [0.2, 0.3] is second and can absorb it.
  const std::vector<Hyperbox> boxes{Hyperbox({0.52}, {0.9}), Hyperbox({0.2}, {0.3})};
  const auto w = rank_winners(boxes, Vec{0.5}, kUnit1, 3);
  REQUIRE(w.size() == 2);
  CHECK(w[0].index == 0);
  CHECK_FALSE(can_expand(boxes[0], Vec{0.5}, config(0.35)));
  CHECK(can_expand(boxes[1], Vec{0.5}, config(0.35)));

  // same effect through cluster: samples build the two boxes, then 0.5 arrives
  const Vec samples{0.52, 0.95, 0.2, 0.3, 0.49};
  const auto k1 = cluster(samples, 1, config(0.45, 1), kUnit1);
  const auto k3 = cluster(samples, 1, config(0.45, 3), kUnit1);
  CHECK(k1.size() == 3);
  REQUIRE(k3.size() == 2);
  CHECK(k3[0] == Hyperbox({0.52}, {0.95}));
  CHECK(k3[1] == Hyperbox({0.2}, {0.49}));
}

TEST_CASE("property: membership bounds, containment and decay") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  std::uniform_real_distribution<double> lam(0.1, 5.0);
  std::uniform_int_distribution<int> dims(1, 6);
  int violations = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(dims(rng));
    const Hyperbox box = random_box(rng, n);
    Vec lambda(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      lambda[i] = lam(rng);
      x[i] = u(rng);
    }
    const MembershipParams params(lambda);
    const double m = membership(box, x, params);
    if (!(m >= 0.0 && m <= 1.0)) ++violations;
    if ((m == 1.0) != box.contains(x)) ++violations;
    if (m != oracle::membership(box.min(), box.max(), x, lambda)) ++violations;

    // push one coordinate further away from the box
    const std::size_t i = static_cast<std::size_t>(trial) % n;
    Vec further = x;
    if (x[i] > box.max()[i]) further[i] += 0.1;
    else if (x[i] < box.min()[i]) further[i] -= 0.1;
    if (membership(box, further, params) > m) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("property: expand is extensive, monotone and idempotent on contained points") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
    const Hyperbox box = random_box(rng, n);
    Vec x(n);
    for (auto& v : x) v = u(rng);
    const Hyperbox grown = expand(box, x);
    REQUIRE(grown.contains(x));
    REQUIRE(grown.contains(box.min()));
    REQUIRE(grown.contains(box.max()));
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(grown.min()[i] <= box.min()[i]);
      REQUIRE(grown.max()[i] >= box.max()[i]);
    }
    REQUIRE(expand(grown, x) == grown);
    if (membership(box, x, MembershipParams::uniform(n)) == 1.0) REQUIRE(grown == box);
  }
}

TEST_CASE("property: cluster containment, determinism and the theta = 1 collapse") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
    const std::size_t rows = 20 + static_cast<std::size_t>(trial);
    Vec samples(rows * n);
    for (auto& v : samples) v = u(rng);
    const auto params = MembershipParams::uniform(n);
    const ClusterConfig c = config(0.05 + 0.01 * trial, 1 + static_cast<std::size_t>(trial % 3));
    const auto boxes = cluster(samples, n, c, params);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::span<const double> x(samples.data() + r * n, n);
      bool covered = false;
      for (const auto& b : boxes) covered = covered || membership(b, x, params) == 1.0;
      REQUIRE(covered);
    }
    CHECK(cluster(samples, n, c, params) == boxes);
    CHECK(cluster(samples, n, config(1.0), params).size() == 1);
  }
}
