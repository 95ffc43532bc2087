#include <doctest.h>

#include <cmath>

#include "noisytr/solver.hpp"
#include "replay.hpp"

using namespace noisytr;

namespace {

Objective sphere(int n, double L1 = 1.0) {
  ObjectiveSpec s;
  s.name = "scaled_sphere";
  s.dim = n;
  s.L1 = L1;
  return builtin_objective(s);
}

Objective quadratic(std::vector<double> diag, double quartic, double region = 2.0) {
  ObjectiveSpec s;
  s.name = "indefinite_quadratic";
  s.dim = static_cast<int>(diag.size());
  s.diag = std::move(diag);
  s.quartic = quartic;
  s.region = region;
  return builtin_objective(s);
}

TrParams params_with(int budget, double r = 0.0) {
  TrParams p;
  p.budget = budget;
  p.r = r;
  return p;
}

void check_update_rules(const RunTrace& t, bool second_order) {
  const auto& p = t.params;
  double delta = p.delta0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    CAPTURE(r.k);
    CHECK(r.delta == delta);
    const double m = std::log(r.delta / p.delta0) / std::log(p.gamma);
    CHECK(std::abs(m - std::round(m)) <= 1e-6);
    if (r.model_decrease > 0.0) {
      CHECK(r.accepted == (r.rho >= p.eta1));
    } else {
      CHECK_FALSE(r.accepted);
      CHECK(std::isnan(r.rho));
    }
    const double bm = second_order ? std::max(r.g_norm, -r.h_lambda_min) : r.g_norm;
    CHECK(r.beta_m == bm);
    CHECK(r.success == (r.accepted && bm >= p.eta2 * r.delta));
    CHECK(r.step_norm <= r.delta * (1 + 1e-12));
    delta = r.success ? r.delta / p.gamma : r.delta * p.gamma;
    const Vector& next = i + 1 < t.records.size() ? t.records[i + 1].x : t.final_x;
    if (!r.accepted) CHECK(next == r.x);
  }
  CHECK(t.final_delta == delta);
}

}  // namespace

TEST_CASE("compute_rho arithmetic") {
  CHECK(compute_rho(1.0, 1.0, 0.0, 0.5) == 0.0);
  CHECK(compute_rho(1.5, 1.0, 0.0, 0.5) == 1.0);
  CHECK(compute_rho(1.0, 0.625, 0.4, 0.5) == doctest::Approx(1.55));
  CHECK_THROWS_AS(compute_rho(1.0, 0.0, 0.0, 0.0), ContractViolation);
  CHECK_THROWS_AS(compute_rho(1.0, 0.0, 0.0, -1.0), ContractViolation);
}

TEST_CASE("first iteration on the unit sphere by hand") {
  const Objective f = sphere(2);
  ZerothOracle z = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  Vector x0(2);
  x0 << 1.0, 0.0;
  const RunTrace t = run_tr1(f, z, g, zero_hessian(), params_with(1), x0, 0);
  REQUIRE(t.records.size() == 1);
  const auto& r = t.records[0];
  CHECK(r.step_norm == doctest::Approx(0.5));
  CHECK(r.model_decrease == doctest::Approx(0.5));
  CHECK(r.f_k - r.f_k_plus == doctest::Approx(0.375));
  CHECK(r.rho == doctest::Approx(0.75));
  CHECK(r.accepted);
  CHECK(r.success);
  CHECK(t.final_delta == doctest::Approx(0.5 / 0.8));
  CHECK(t.final_x(0) == doctest::Approx(0.5));
}

TEST_CASE("zero gradient draws are rejected without function evaluations") {
  const Objective f = sphere(3);
  ZerothOracle z = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  const RunTrace t = run_tr1(f, z, g, zero_hessian(), params_with(3), Vector::Zero(3), 0);
  REQUIRE(t.records.size() == 3);
  for (const auto& r : t.records) {
    CHECK_FALSE(r.accepted);
    CHECK(r.model_decrease == 0.0);
  }
  CHECK(z.evaluations() == 0);
  CHECK(t.final_delta == doctest::Approx(0.5 * 0.8 * 0.8 * 0.8));

  ZerothOracle z2 = ZerothOracle::exact(f);
  SecondOracle h = SecondOracle::exact(f);
  const RunTrace t2 = run_tr2(f, z2, g, h, params_with(2), Vector::Zero(3), 0);
  CHECK_FALSE(t2.records[0].accepted);
  CHECK(z2.evaluations() == 0);
}

TEST_CASE("budget 0 gives an empty trace") {
  const Objective f = sphere(2);
  ZerothOracle z = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  const RunTrace t = run_tr1(f, z, g, zero_hessian(), params_with(0), Vector::Ones(2), 0);
  CHECK(t.records.empty());
  CHECK(t.final_x == Vector::Ones(2));
}

TEST_CASE("relaxation r = 2 eps_f makes J_k hold and accepts every sufficiently good step") {
  const Objective f = sphere(10);
  ZerothOracle z = ZerothOracle::bounded_uniform(f, 0.1, 3);
  FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{0.5, 1.0, 0.7, 10.0}, 4);
  const TrParams p = params_with(400, 0.2);
  const RunTrace t = run_tr1(f, z, g, zero_hessian(), p, Vector::Constant(10, 1.4), 5);
  long checked = 0;
  for (const auto& r : t.records) {
    CHECK(r.J_k);
    if (r.model_decrease > 0.0 && r.phi_value - r.phi_trial >= p.eta1 * r.model_decrease) {
      ++checked;
      CHECK(r.accepted);
    }
  }
  CHECK(checked > 0);
  check_update_rules(t, false);
}

TEST_CASE("runs are reproducible from the seed") {
  const Objective f = sphere(5);
  auto once = [&] {
    ZerothOracle z = ZerothOracle::bounded_uniform(f, 0.05, 8);
    FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{0.2, 1.0, 0.8, 10.0}, 9);
    return run_tr1(f, z, g, zero_hessian(), params_with(100, 0.1), Vector::Ones(5), 1);
  };
  const RunTrace a = once(), b = once();
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(a.records[i].f_k == b.records[i].f_k);
  }
}

TEST_CASE("evaluation cap and gradient-norm stop") {
  const Objective f = sphere(4);
  ZerothOracle z = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  RunOptions o;
  o.max_evaluations = 10;
  const RunTrace t = run_tr1(f, z, g, zero_hessian(), params_with(100), Vector::Ones(4), 0, o);
  CHECK(t.records.size() == 5);
  CHECK(t.phi_per_evaluation.size() == 10);

  ZerothOracle z2 = ZerothOracle::exact(f);
  RunOptions s;
  s.stop_true_grad_norm = 0.1;
  const RunTrace u = run_tr1(f, z2, g, zero_hessian(), params_with(1000), Vector::Ones(4), 0, s);
  REQUIRE_FALSE(u.records.empty());
  CHECK(u.records.back().true_grad_norm <= 0.1);
  for (std::size_t i = 0; i + 1 < u.records.size(); ++i) CHECK(u.records[i].true_grad_norm > 0.1);
}

TEST_CASE("second-order iteration escapes the saddle at the origin") {
  const Objective f = quadratic({1.0, -2.0}, 1.0);
  ZerothOracle z = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  SecondOracle h = SecondOracle::exact(f);
  const RunTrace t = run_tr2(f, z, g, h, params_with(60), Vector::Zero(2), 0);
  const auto& r0 = t.records[0];
  CHECK(r0.g_norm == 0.0);
  CHECK(r0.beta_m == doctest::Approx(2.0));
  // Eigen step of length 0.5 along e2: decrease 0.25, phi(s) = -0.25 + 0.25^2/4.
  CHECK(r0.model_decrease == doctest::Approx(0.25));
  CHECK(r0.phi_trial == doctest::Approx(-0.234375));
  CHECK(r0.rho == doctest::Approx(0.9375));
  CHECK(r0.success);
  // Minimizers at x = (0, +-sqrt 2) with phi = -1.
  CHECK(t.final_phi == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(t.final_x(1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
  check_update_rules(t, true);
}

TEST_CASE("on convex quadratics with exact oracles the second-order method matches the first") {
  const Objective f = quadratic({1.0, 3.0, 0.5}, 0.0);
  Vector x0(3);
  x0 << 2.0, -1.0, 3.0;
  ZerothOracle z1 = ZerothOracle::exact(f), z2 = ZerothOracle::exact(f);
  FirstOracle g = FirstOracle::exact(f);
  SecondOracle h = SecondOracle::exact(f);
  const RunTrace a = run_tr1(f, z1, g, clipped_exact_hessian(f, 3.0), params_with(40), x0, 0);
  const RunTrace b = run_tr2(f, z2, g, h, params_with(40), x0, 0);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CAPTURE(i);
    CHECK(a.records[i].accepted == b.records[i].accepted);
    CHECK(a.records[i].success == b.records[i].success);
    CHECK((a.records[i].x - b.records[i].x).norm() <= 1e-9 * (1.0 + x0.norm()));
  }
}

TEST_CASE("first-order lemma replays on noisy runs") {
  replay::Counts total;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (double eps_g : {0.0, 0.5}) {
      for (double eps_f : {0.0, 0.05}) {
        const Objective f = sphere(8, 1.5);
        ZerothOracle z = ZerothOracle::bounded_uniform(f, eps_f, derive_seed(seed, Stream::kZeroth));
        FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{eps_g, 1.0, 0.75, 10.0},
                                               derive_seed(seed, Stream::kFirst));
        TrParams p = params_with(300, 2.0 * eps_f);
        const RunTrace t = run_tr1(f, z, g, zero_hessian(), p, Vector::Constant(8, 1.4), seed);
        check_update_rules(t, false);
        replay::FirstInputs in;
        in.L1 = 1.5;
        in.kappa_eg = 1.0;
        in.eps_g = eps_g;
        in.params = p;
        total.add(replay::replay_first(t, in));
      }
    }
  }
  // Exact Hessian models on an unbounded indefinite quadratic.
  const Objective q = quadratic({1.0, -2.0, 0.5}, 0.0);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    ZerothOracle z = ZerothOracle::bounded_uniform(q, 0.02, seed);
    FirstOracle g = FirstOracle::corrupted(q, CorruptionSpec{0.1, 1.0, 0.8, 10.0}, seed + 100);
    TrParams p = params_with(60, 0.04);
    const RunTrace t = run_tr1(q, z, g, clipped_exact_hessian(q, 2.0), p, Vector::Ones(3), seed);
    replay::FirstInputs in;
    in.L1 = 2.0;
    in.kappa_bhm = 2.0;
    in.kappa_fcd = 1.0;
    in.eps_g = 0.1;
    in.params = p;
    total.add(replay::replay_first(t, in));
  }
  for (const auto& f : total.failures) MESSAGE(f);
  CHECK(total.violations == 0);
  CHECK(total.accept_checked > 50);
  CHECK(total.success_checked > 50);
  CHECK(total.progress_checked > 100);
}

TEST_CASE("second-order lemma replays on noisy runs") {
  replay::Counts total;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Objective f = quadratic({1.0, -2.0, 0.5}, 1.0, 2.5);
    const double eps_f = 0.001, eps_g = 0.01, eps_H = 0.05;
    ZerothOracle z = ZerothOracle::bounded_uniform(f, eps_f, derive_seed(seed, Stream::kZeroth));
    FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{eps_g, 1.0, 0.8, 10.0},
                                           derive_seed(seed, Stream::kFirst));
    SecondOracle h = SecondOracle::corrupted(f, CorruptionSpec{eps_H, 1.0, 0.9, 10.0},
                                             derive_seed(seed, Stream::kSecond));
    TrParams p = params_with(150, 2.0 * eps_f + std::pow(eps_g, 1.5));
    p.delta0 = 0.02;
    Vector x0 = Vector::Zero(3);
    x0(0) = 0.5 * static_cast<double>(seed % 3);
    const RunTrace t = run_tr2(f, z, g, h, p, x0, seed);
    check_update_rules(t, true);
    replay::SecondInputs in;
    in.L2 = f.L2();
    in.kappa_bhm = std::max(1e-12, replay::max_model_hessian_norm(t));
    in.eps_g = eps_g;
    in.eps_H = eps_H;
    in.params = p;
    total.add(replay::replay_second(t, f, in));
  }
  for (const auto& f : total.failures) MESSAGE(f);
  MESSAGE("accept " << total.accept_checked << " success " << total.success_checked);
  CHECK(total.violations == 0);
  CHECK(total.accept_checked > 20);
  CHECK(total.progress_checked > 100);
}

TEST_CASE("accuracy indicators occur with at least the oracle reliability") {
  const Objective f = sphere(6);
  long iters = 0, first_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ZerothOracle z = ZerothOracle::bounded_uniform(f, 0.01, seed);
    FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{0.1, 1.0, 0.8, 10.0}, seed + 50);
    RunOptions o;
    o.radius_floor = 0.0;
    const RunTrace t = run_tr1(f, z, g, zero_hessian(), params_with(500, 0.02), Vector::Ones(6), seed, o);
    for (const auto& r : t.records) {
      ++iters;
      first_ok += r.I_k;
    }
  }
  REQUIRE(iters == 10000);
  CHECK(static_cast<double>(first_ok) / iters >= 0.8 - 3.0 * std::sqrt(0.8 * 0.2 / iters));

  long iters2 = 0, both_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ZerothOracle z = ZerothOracle::bounded_uniform(f, 0.001, seed);
    FirstOracle g = FirstOracle::corrupted(f, CorruptionSpec{0.01, 1.0, 0.8, 10.0}, seed + 50);
    SecondOracle h = SecondOracle::corrupted(f, CorruptionSpec{0.05, 1.0, 0.9, 10.0}, seed + 90);
    RunOptions o;
    o.radius_floor = 0.0;
    const RunTrace t = run_tr2(f, z, g, h, params_with(500, 0.003), Vector::Ones(6), seed, o);
    for (const auto& r : t.records) {
      ++iters2;
      both_ok += r.I_k;
    }
  }
  REQUIRE(iters2 == 10000);
  CHECK(static_cast<double>(both_ok) / iters2 >= 0.72 - 3.0 * std::sqrt(0.72 * 0.28 / iters2));
}
