#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "stlncs/taud.hpp"

using namespace stlncs;

TEST_SUITE("taud") {

TEST_CASE("initial extended state replicates x0 and zeroes the history") {
  const std::vector<double> x0{1, 2, 3};
  const ExtendedState z = init_extended(x0, 3, 2, 2);
  CHECK(z.tau() == 3);
  CHECK(z.d == 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::vector<double>(z.window.state(i).begin(), z.window.state(i).end()) == x0);
  }
  CHECK(z.history == std::vector<double>(4, 0.0));

  const ExtendedState tiny = init_extended(std::vector<double>{5.0}, 1, 0, 1);
  CHECK(tiny.tau() == 1);
  CHECK(tiny.history.empty());
}

TEST_CASE("advance shifts both sequences") {
  ExtendedState z = init_extended(std::vector<double>{0.0}, 3, 2, 1);
  z.window.set_state(0, std::vector<double>{1.0});  // window [A=1, B=0, C=0]
  z.window.set_state(1, std::vector<double>{2.0});
  z.window.set_state(2, std::vector<double>{3.0});
  z.history = {10.0, 20.0};

  const ExtendedState next = advance_extended(z, std::vector<double>{4.0}, std::vector<double>{30.0});
  CHECK(next.window.state(0)[0] == 2.0);
  CHECK(next.window.state(1)[0] == 3.0);
  CHECK(next.window.state(2)[0] == 4.0);
  CHECK(next.history == std::vector<double>{20.0, 30.0});

  const ExtendedState single = init_extended(std::vector<double>{1.0}, 1, 0, 1);
  const ExtendedState replaced = advance_extended(single, std::vector<double>{9.0}, std::vector<double>{});
  CHECK(replaced.window.state(0)[0] == 9.0);
}

TEST_CASE("tau advances flush the initial state out of the window") {
  const int tau = 5;
  ExtendedState z = init_extended(std::vector<double>{-1.0}, tau, 1, 1);
  for (int i = 0; i < tau; ++i)
    z = advance_extended(z, std::vector<double>{static_cast<double>(i)}, std::vector<double>{0.0});
  for (int i = 0; i < tau; ++i) CHECK(z.window.state(i)[0] != -1.0);
}

TEST_CASE("reward takes the documented two values") {
  Phi phi = phi_leaf([] {
    SubFormula f;
    f.op = TemporalOp::Globally;
    f.t_start = 0;
    f.t_end = 0;
    Predicate p;
    p.coeffs = {1.0};
    p.bound = 0.0;  // x0 <= 0
    f.body = InnerFormula::make_pred(p);
    return f;
  }());

  RewardParams params;
  params.outer_op = TemporalOp::Globally;
  params.beta = 100.0;

  ExtendedState violating = init_extended(std::vector<double>{0.1}, 1, 0, 1);
  CHECK(reward(violating, phi, params) == -1.0);

  ExtendedState boundary = init_extended(std::vector<double>{0.0}, 1, 0, 1);
  CHECK(reward(boundary, phi, params) == -std::exp(-100.0));
  CHECK(reward(boundary, phi, params) == doctest::Approx(-3.72e-44).epsilon(0.01));

  params.outer_op = TemporalOp::Finally;
  params.beta = 2.0;
  ExtendedState satisfying = init_extended(std::vector<double>{-0.3}, 1, 0, 1);
  CHECK(reward(satisfying, phi, params) == std::exp(2.0));
  CHECK(reward(satisfying, phi, params) == doctest::Approx(7.389).epsilon(1e-3));
}

TEST_CASE("reward never produces a third value") {
  RngStream rng(13);
  const Spec spec = parse_stl("G[0,3](F[0,2](x0<=0.5 && x1>=-0.5) && G[0,1](x1<=2))", 2);
  RewardParams params;
  params.beta = 100.0;
  params.outer_op = TemporalOp::Globally;
  std::set<double> seen;
  for (int i = 0; i < 2000; ++i) {
    ExtendedState z = init_extended(std::vector<double>{0, 0}, spec.tau, 2, 1);
    for (int t = 0; t < spec.tau; ++t) {
      const auto x = oracle::random_trace(rng, 2, 1);
      z = advance_extended(z, x.state(0), std::vector<double>{rng.uniform(-1, 1)});
    }
    seen.insert(reward(z, spec.phi, params));
  }
  CHECK(seen.size() == 2);
  CHECK(seen.count(-1.0) == 1);
  CHECK(seen.count(-std::exp(-100.0)) == 1);
}

TEST_CASE("reward ignores the action history") {
  RngStream rng(17);
  const Spec spec = parse_stl("G[0,2](F[0,1](x0<=0.3))", 1);
  RewardParams params;
  for (int i = 0; i < 100; ++i) {
    ExtendedState z = init_extended(std::vector<double>{rng.uniform(-1, 1)}, spec.tau, 3, 2);
    for (int t = 0; t < 2; ++t)
      z = advance_extended(z, std::vector<double>{rng.uniform(-1, 1)},
                           std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double r = reward(z, spec.phi, params);
    ExtendedState permuted = z;
    std::reverse(permuted.history.begin(), permuted.history.end());
    CHECK(reward(permuted, spec.phi, params) == r);
  }
}

TEST_CASE("flattened dimension follows tau nx plus d nu") {
  const ExtendedState z = init_extended(std::vector<double>{0, 0, 0}, 100, 10, 2);
  CHECK(z.flat_size() == 320);
  CHECK(flatten(z).size() == 320);
}

}  // TEST_SUITE
