#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace capmimo;
using namespace testing_support;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("default scenario", "[experiments]") {
  const Scenario sc = default_scenario();
  CHECK(sc.users.size() == 8);
  CHECK(sc.aperture.area() == 0.25);
  CHECK_THAT(sc.budget.pt_ma2(), WithinRel(100.0, 1e-12));
  CHECK(sc.budget.sigma2 == 5.6e-3);
  CHECK(sc.effective_order() == TruncationOrder{4, 4, 0});
  CHECK(sc.users[0] == Real3(-1, -1, 30));
  CHECK(sc.users[7] == Real3(5, 5, 30));
  CHECK_NOTHROW(sc.validate());
}

TEST_CASE("scenario validation names the offending user", "[experiments]") {
  Scenario sc = default_scenario();
  sc.users[3] = Real3(0.1, 0.1, 0.0);
  CHECK_THROWS_WITH(sc.validate(), ContainsSubstring("user 3"));
  sc.users.clear();
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = default_scenario();
  sc.grid_n = 0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("scheme and nf parsing", "[experiments]") {
  for (Scheme s : {Scheme::pdm, Scheme::mf, Scheme::digital, Scheme::upper}) CHECK(parse_scheme(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scheme("zf"), ConfigError);
  CHECK(NfSetting::parse("9").pinned.count() == 9);
  CHECK(NfSetting::parse("81").pinned.count() == 81);
  CHECK(NfSetting::parse("225").pinned.count() == 225);
  CHECK(NfSetting::parse("auto").automatic);
  CHECK_THROWS_AS(NfSetting::parse("17"), ConfigError);
  CHECK(with_nf(default_scenario(), NfSetting::fixed(1)).solver.order == TruncationOrder{1, 1, 0});
}

TEST_CASE("user placements", "[experiments]") {
  const auto c = circle_users(8, 3.0, 7.0);
  REQUIRE(c.size() == 8);
  for (const auto& u : c) {
    CHECK_THAT(std::hypot(u.x(), u.y()), WithinRel(3.0, 1e-12));
    CHECK(u.z() == 7.0);
  }
  CHECK_THAT(c[7].x(), WithinRel(3.0, 1e-12));
  const auto a = random_users(8, 5);
  CHECK(a == random_users(8, 5));
  CHECK(a != random_users(8, 6));
  for (const auto& u : a) {
    CHECK(std::hypot(u.x(), u.y()) >= 2.0);
    CHECK(std::hypot(u.x(), u.y()) <= 30.0);
    CHECK(u.z() >= 2.0);
    CHECK(u.z() <= 30.0);
  }
}

TEST_CASE("sweep rows are complete and ordered", "[experiments]") {
  Scenario base = small_scenario(2, 16);
  base.solver.max_iters = 50;
  RunOptions opt;
  opt.schemes = {Scheme::pdm, Scheme::mf, Scheme::upper, Scheme::digital};
  opt.seeds = {1, 2};
  opt.serial = true;
  const auto rows = sweep_power(base, {10.0, 100.0}, opt);
  REQUIRE(rows.size() == 2 * 4 * 2);
  std::size_t i = 0;
  for (double p : {10.0, 100.0}) {
    for (Scheme s : opt.schemes) {
      for (std::uint64_t seed : opt.seeds) {
        const ResultRow& r = rows[i++];
        CHECK(r.ok());
        CHECK(r.sweep == "power");
        CHECK(r.variable == "pt_ma2");
        CHECK(r.value == p);
        CHECK(r.scheme == to_string(s));
        CHECK(r.seed == seed);
        CHECK(r.sum_rate > 0.0);
        CHECK(r.wall_time_s == 0.0);
        CHECK(r.power_ma2 <= p * (1.0 + 1e-9));
        if (s == Scheme::pdm) CHECK(r.nf == 81);
        if (s == Scheme::upper) CHECK(r.nf == 225);
        if (s == Scheme::digital) CHECK(r.nf == 81);
      }
    }
  }
  const auto upper = best_rate(rows, [](const ResultRow& r) { return r.scheme == "upper" && r.value == 100.0; });
  const auto pdm = best_rate(rows, [](const ResultRow& r) { return r.scheme == "pdm" && r.value == 100.0; });
  REQUIRE(upper);
  REQUIRE(pdm);
  CHECK(*upper >= *pdm);
  CHECK_FALSE(best_rate(rows, [](const ResultRow& r) { return r.scheme == "nope"; }));
}

TEST_CASE("failing points produce error rows", "[experiments]") {
  Scenario good = small_scenario(2, 8);
  Scenario bad = good;
  bad.users[1] = Real3(0.0, 0.0, 0.0);
  RunOptions opt;
  opt.schemes = {Scheme::mf};
  opt.seeds = {1, 2, 3};
  opt.serial = true;
  const auto rows = run_sweep({{"t", "x", 0.0, "", 0.0}, {"t", "x", 1.0, "", 0.0}}, {good, bad}, opt);
  REQUIRE(rows.size() == 6);
  for (int i = 0; i < 3; ++i) CHECK(rows[static_cast<std::size_t>(i)].ok());
  for (int i = 3; i < 6; ++i) {
    CHECK_FALSE(rows[static_cast<std::size_t>(i)].ok());
    CHECK_THAT(rows[static_cast<std::size_t>(i)].error, ContainsSubstring("user 1"));
    CHECK(rows[static_cast<std::size_t>(i)].sum_rate == 0.0);
  }
  CHECK_THROWS_AS(run_sweep({}, {good}, opt), ContractViolation);
}

TEST_CASE("serial runs are bit-identical and threads do not change results", "[experiments]") {
  Scenario base = small_scenario(3, 16);
  base.solver.max_iters = 40;
  RunOptions opt;
  opt.schemes = {Scheme::pdm, Scheme::mf};
  opt.seeds = {1, 2};
  opt.serial = true;
  const auto a = sweep_aperture(base, {0.0625, 0.25, 0.5625}, opt);
  const auto b = sweep_aperture(base, {0.0625, 0.25, 0.5625}, opt);
  CHECK(a == b);
  opt.serial = false;
  opt.jobs = 3;
  auto c = sweep_aperture(base, {0.0625, 0.25, 0.5625}, opt);
  REQUIRE(c.size() == a.size());
  for (auto& r : c) {
    CHECK(r.wall_time_s >= 0.0);
    r.wall_time_s = 0.0;
  }
  CHECK(a == c);
}

TEST_CASE("parallel_for visits every index once", "[experiments]") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  parallel_for(0, 4, [&](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("wavenumber gain study", "[experiments]") {
  const auto ratios = ratio_grid(2.0, 0.01);
  REQUIRE(ratios.size() == 401);
  CHECK(ratios.front() == -2.0);
  CHECK(ratios[200] == 0.0);
  CHECK_THAT(ratios.back(), WithinAbs(2.0, 1e-12));

  // broadside far user: spectrum peaks at kappa_x = 0
  const auto far = wavenumber_gain_study({10.0}, {2.4e9}, ratios, 2000);
  REQUIRE(far.size() == ratios.size());
  CHECK(far[200].gain_db == 0.0);

  const auto g = wavenumber_gain_study({0.1, 1.0}, {2.4e9}, ratios, 2000);
  REQUIRE(g.size() == 2 * ratios.size());
  for (std::size_t d = 0; d < 2; ++d) {
    const std::size_t off = d * ratios.size();
    double peak = -1e9;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      peak = std::max(peak, g[off + i].gain_db);
      CHECK(g[off + i].gain_db <= 0.0);
      CHECK_THAT(g[off + i].gain_db, WithinAbs(g[off + ratios.size() - 1 - i].gain_db, 1e-6));
    }
    CHECK(peak == 0.0);
  }
  CHECK_THROWS_AS(wavenumber_gain_study({1.0}, {2.4e9}, {}, 100), ConfigError);
}
