#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "octree/error.hpp"
#include "octree/split.hpp"
#include "oracles.hpp"

using namespace octree;
using namespace octree::split;

namespace {

// Grid with abscissae 0..n-1 and the given densities.
kde::DensityGrid make_grid(std::vector<double> densities) {
  kde::DensityGrid g;
  for (std::size_t i = 0; i < densities.size(); ++i) g.points.push_back(static_cast<double>(i));
  g.densities = std::move(densities);
  auto e = kde::find_extrema(g.densities);
  g.maxima = e.maxima;
  g.minima = e.minima;
  return g;
}

double bump(double x, double center, double width, double height) {
  const double u = (x - center) / width;
  return height * std::exp(-0.5 * u * u);
}

// Three modes: two close ones (centers 20 and 32) whose valley stays above
// the clipping level, and an isolated one at 75.
kde::DensityGrid three_mode_grid() {
  std::vector<double> d(100);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = static_cast<double>(i);
    d[i] = bump(x, 20, 4, 1.0) + bump(x, 32, 4, 0.8) + bump(x, 75, 4, 0.9);
  }
  return make_grid(d);
}

SplitParams params_with(double beta, std::size_t n_root, std::size_t min_leaf) {
  SplitParams p;
  p.beta = beta;
  p.n_root = n_root;
  p.min_leaf = min_leaf;
  return p;
}

}  // namespace

TEST_CASE("support floor") {
  CHECK(support_floor(params_with(0.02, 1000, 5)) == 20);
  CHECK(support_floor(params_with(0.02, 100, 5)) == 5);
  CHECK(support_floor(params_with(0.07, 100, 5)) == 7);
  CHECK(support_floor(params_with(0.0, 1000, 5)) == 0);
}

TEST_CASE("clip") {
  std::vector<double> d(80, 0.0);
  for (std::size_t i = 5; i <= 20; ++i) d[i] = 1.0;
  for (std::size_t i = 40; i <= 60; ++i) d[i] = 2.0;
  auto g = make_grid(d);

  auto runs = clip(g, 0.25);  // threshold 0.5
  REQUIRE(runs.size() == 2);
  CHECK(runs[0] == Interval{5, 20});
  CHECK(runs[1] == Interval{40, 60});

  auto flat = make_grid(std::vector<double>(30, 1.0));
  auto one = clip(flat, 0.05);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Interval{0, 29});

  auto top = clip(g, 1.0);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == Interval{40, 60});
}

TEST_CASE("revise splits at a significant minimum (three-mode scenario)") {
  auto g = three_mode_grid();
  REQUIRE(g.mode_count() == 3);
  auto clipped = clip(g, 0.05);
  REQUIRE(clipped.size() == 2);  // [A, B] holds two modes, [C, D] one

  auto revised = revise(clipped, g, 1.0);
  REQUIRE(revised.size() == 3);
  CHECK(revised[0].low == clipped[0].low);
  CHECK(revised[0].high == revised[1].low);
  CHECK(revised[1].high == clipped[0].high);
  CHECK(revised[2] == clipped[1]);
  CHECK(revised[0].high > 20.0);
  CHECK(revised[0].high < 32.0);

  // alpha = 0: no valley is deep enough
  CHECK(revise(clipped, g, 0.0) == clipped);
}

TEST_CASE("revise leaves intervals unchanged when not triggered") {
  std::vector<double> d(50);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = bump(static_cast<double>(i), 25, 5, 1.0);
  auto unimodal = make_grid(d);
  REQUIRE(unimodal.mode_count() == 1);
  auto c = clip(unimodal, 0.05);
  CHECK(revise(c, unimodal, 1.0) == c);

  // |Y| == k: two separated modes, both clipped apart
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = bump(static_cast<double>(i), 10, 2, 1.0) + bump(static_cast<double>(i), 40, 2, 1.0);
  }
  auto bimodal = make_grid(d);
  REQUIRE(bimodal.mode_count() == 2);
  auto c2 = clip(bimodal, 0.05);
  REQUIRE(c2.size() == 2);
  CHECK(revise(c2, bimodal, 1.0) == c2);
}

TEST_CASE("assess") {
  std::vector<double> values;
  for (int i = 0; i < 12; ++i) values.push_back(1.0 + 0.01 * i);
  for (int i = 0; i < 30; ++i) values.push_back(5.0 + 0.01 * i);
  std::vector<Interval> ivs{{0.5, 2.0}, {4.5, 6.0}};

  auto kept = assess(ivs, values, params_with(0.02, 1000, 5));  // floor 20
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == Interval{4.5, 6.0});

  CHECK(assess(ivs, values, params_with(0.0, 1000, 5)) == ivs);
  CHECK(assess(ivs, values, params_with(0.5, 1000, 5)).empty());
}

TEST_CASE("shrink") {
  auto s = shrink({{2.0, 8.0}}, std::vector<double>{3.1, 4.0, 7.2, 9.0});
  REQUIRE(s.size() == 1);
  CHECK(s[0] == Interval{3.1, 7.2});

  auto single = shrink({{4.0, 6.0}}, std::vector<double>{5.0});
  CHECK(single == std::vector<Interval>{{5.0, 5.0}});

  CHECK(shrink({{10.0, 11.0}}, std::vector<double>{1.0, 2.0}).empty());

  // a value on the shared endpoint of two revised halves goes left only
  auto halves = shrink({{0.0, 5.0}, {5.0, 10.0}}, std::vector<double>{1.0, 5.0, 9.0});
  REQUIRE(halves.size() == 2);
  CHECK(halves[0] == Interval{1.0, 5.0});
  CHECK(halves[1] == Interval{9.0, 9.0});
}

TEST_CASE("impurity_proxy frozen values") {
  // n'_1 = 100 * 5 / 10 = 50; 100 * 50 / 150
  std::vector<std::size_t> c1{100};
  std::vector<Interval> i1{{0, 5}};
  CHECK(impurity_proxy(c1, i1, {0, 10}, 100) == doctest::Approx(33.333333333333336).epsilon(1e-15));

  // n'_i = 100 * 1 / 10 = 10 each; 2 * (50 * 10 / 60)
  std::vector<std::size_t> c2{50, 50};
  std::vector<Interval> i2{{1, 2}, {6, 7}};
  CHECK(impurity_proxy(c2, i2, {0, 10}, 100) == doctest::Approx(16.666666666666668).epsilon(1e-15));

  std::vector<std::size_t> c3{0};
  std::vector<Interval> i3{{0, 0}};
  CHECK(impurity_proxy(c3, i3, {0, 10}, 100) == 0.0);

  CHECK_THROWS_AS(impurity_proxy(c1, i1, {3, 3}, 100), Error);
}

TEST_CASE("impurity_proxy equals the oracle exactly and respects its bounds") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> members(0, 40);
    const std::size_t k = static_cast<std::size_t>(count(rng));
    std::vector<double> cuts(2 * k);
    for (auto& c : cuts) c = u(rng) * 20.0 - 5.0;
    std::sort(cuts.begin(), cuts.end());
    const Interval node{cuts.front() - u(rng), cuts.back() + u(rng)};
    std::vector<Interval> ivs;
    std::vector<double> lows, highs;
    std::vector<std::size_t> counts;
    std::size_t n_t = 0;
    for (std::size_t i = 0; i < k; ++i) {
      ivs.push_back({cuts[2 * i], cuts[2 * i + 1]});
      lows.push_back(cuts[2 * i]);
      highs.push_back(cuts[2 * i + 1]);
      counts.push_back(members(rng));
      n_t += counts.back();
    }
    n_t += members(rng);
    const double p = impurity_proxy(counts, ivs, node, n_t);
    CHECK(p == oracle::proxy(counts, lows, highs, node.low, node.high, n_t));
    CHECK(p >= 0.0);
    CHECK(p <= static_cast<double>(n_t) / 2.0 * static_cast<double>(k));

    // joint affine rescaling of intervals and node range
    std::vector<Interval> moved;
    for (const auto& iv : ivs) moved.push_back({3.0 * iv.low + 11.0, 3.0 * iv.high + 11.0});
    const Interval moved_node{3.0 * node.low + 11.0, 3.0 * node.high + 11.0};
    CHECK(impurity_proxy(counts, moved, moved_node, n_t) ==
          doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("propose_split examples") {
  SplitParams params = params_with(0.02, 200, 5);

  SUBCASE("two tight clusters give two intervals, one per cluster") {
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) {
      v.push_back(0.0 + 0.01 * i);
      v.push_back(20.0 + 0.01 * i);
    }
    auto c = propose_split(v, 3, {0.0, 20.99}, params);
    REQUIRE(c);
    CHECK(c->attribute == 3);
    REQUIRE(c->target_intervals.size() == 2);
    CHECK(c->target_intervals[0] == Interval{0.0, 0.99});
    CHECK(c->target_intervals[1] == Interval{20.0, 20.99});
    CHECK(c->counts == std::vector<std::size_t>{100, 100});
    CHECK(c->interval_total == 3);
  }

  SUBCASE("constant values give no candidate") {
    std::vector<double> v(50, 7.3);
    CHECK_FALSE(propose_split(v, 0, {0.0, 10.0}, params));
  }

  SUBCASE("uniform unimodal values give exactly one interval") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(200);
    for (auto& x : v) x = u(rng);
    const double h = kde::silverman_bandwidth(v);
    auto model = kde::KdeModel::fit(v);
    auto grid = kde::evaluate_grid(model, model.sample().front() - h, model.sample().back() + h,
                                   params.grid_points);
    // brute-force scan: a single run above the clipping level
    const double tau = 0.05 * *std::max_element(grid.densities.begin(), grid.densities.end());
    std::size_t runs = 0;
    for (std::size_t i = 0; i < grid.densities.size(); ++i) {
      if (grid.densities[i] >= tau && (i == 0 || grid.densities[i - 1] < tau)) ++runs;
    }
    REQUIRE(runs == 1);
    auto c = propose_split(v, 0, {0.0, 1.0}, params);
    REQUIRE(c);
    CHECK(c->target_intervals.size() == 1);
  }
}

TEST_CASE("division pipeline properties on random samples") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    std::uniform_int_distribution<int> size(20, 300);
    std::uniform_int_distribution<int> clusters(1, 4);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const int k = clusters(rng);
    std::vector<double> centers;
    for (int c = 0; c < k; ++c) centers.push_back(u(rng));
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) {
      std::normal_distribution<double> g(centers[rng() % centers.size()], 0.7);
      x = g(rng);
    }
    SplitParams p = params_with(trial % 2 ? 0.02 : 0.0, v.size(), 5);
    p.alpha = 0.5 + 0.5 * (trial % 3) / 2.0;

    auto model = kde::KdeModel::fit(v);
    const double h = model.bandwidth();
    auto grid = kde::evaluate_grid(model, model.sample().front() - h, model.sample().back() + h,
                                   p.grid_points);
    auto clipped = clip(grid, p.gamma);
    auto revised = revise(clipped, grid, p.alpha);
    auto assessed = assess(revised, v, p);
    auto shrunk = shrink(assessed, v);
    CHECK(clipped.size() <= revised.size());
    CHECK(assessed.size() <= revised.size());
    CHECK(shrunk.size() <= assessed.size());

    for (std::size_t i = 0; i < shrunk.size(); ++i) {
      CHECK(std::find(v.begin(), v.end(), shrunk[i].low) != v.end());
      CHECK(std::find(v.begin(), v.end(), shrunk[i].high) != v.end());
      if (i > 0) CHECK(shrunk[i - 1].high < shrunk[i].low);
      // members of a shrunk interval were members of some assessed interval
      for (double x : v) {
        if (!shrunk[i].contains(x)) continue;
        CHECK(std::any_of(assessed.begin(), assessed.end(),
                          [&](const Interval& a) { return a.contains(x); }));
      }
    }

    auto cand = propose_split(v, 0, {model.sample().front(), model.sample().back()}, p);
    if (cand) {
      std::size_t sum = 0;
      for (auto c : cand->counts) {
        CHECK(c >= support_floor(p));
        sum += c;
      }
      CHECK(sum <= v.size());
      CHECK(cand->target_intervals == shrunk);
    } else {
      CHECK(shrunk.empty());
    }
  }
}
