#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spex/errors.hpp"
#include "spex/identify.hpp"
#include "spex/spectrum.hpp"

using namespace spex;

namespace {

MobiusSpectrum mobius(std::size_t n, std::vector<Term> terms) { return MobiusSpectrum(n, std::move(terms)); }

Mask M(std::size_t n, std::initializer_list<std::size_t> idx) { return Mask::from_indices(n, idx); }

// Exhaustive optimum over all |S| = retain (n <= 20), ties to the lex-smallest mask.
std::pair<double, Mask> exhaustive(const MobiusSpectrum& mob, std::size_t retain, Direction dir) {
  const std::size_t n = mob.n();
  double best = dir == Direction::max ? -INFINITY : INFINITY;
  Mask arg;
  for (std::uint32_t S = 0; S < (1U << n); ++S) {
    if (static_cast<std::size_t>(oracle::pc(S)) != retain) continue;
    const auto m = oracle::to_mask(n, S);
    const double v = mob.evaluate(m);
    const bool better = dir == Direction::max ? v > best : v < best;
    if (better || (v == best && lex_less(m, arg))) {
      best = v;
      arg = m;
    }
  }
  return {best, arg};
}

}  // namespace

TEST_CASE("constant spectrum: nothing is relevant") {
  const FourierSpectrum c(5, std::vector<Term>{{Mask(5), 2.0}});
  const auto prog = build_program(c, 2, Direction::max);
  CHECK(prog.relevant_vars.empty());
  CHECK(prog.retain == 3);
  for (auto method : {SolveMethod::brute, SolveMethod::bnb}) {
    const auto sol = solve(prog, method);
    CHECK(sol.objective == 2.0);
    CHECK(sol.mask == M(5, {0, 1, 2}));
    CHECK(sol.optimality == Optimality::proven);
  }
}

TEST_CASE("single positive singleton is retained") {
  const auto prog = build_program(mobius(4, {{Mask(4), 1.0}, {M(4, {0}), 5.0}}), 3, Direction::max);
  for (auto method : {SolveMethod::brute, SolveMethod::bnb}) {
    const auto sol = solve(prog, method);
    CHECK(sol.mask == M(4, {0}));
    CHECK(sol.objective == 6.0);
  }
}

TEST_CASE("negative monomial is activated when minimizing") {
  const auto prog = build_program(mobius(4, {{M(4, {0, 1}), -4.0}}), 2, Direction::min);
  for (auto method : {SolveMethod::brute, SolveMethod::bnb}) {
    const auto sol = solve(prog, method);
    CHECK(sol.mask == M(4, {0, 1}));
    CHECK(sol.objective == -4.0);
  }
}

TEST_CASE("down-closure stress case ties to the lower index") {
  const auto prog = build_program(
      mobius(2, {{Mask(2), 0.0}, {M(2, {0}), 3.0}, {M(2, {1}), 3.0}, {M(2, {0, 1}), -10.0}}), 1, Direction::max);
  for (auto method : {SolveMethod::brute, SolveMethod::bnb}) {
    const auto sol = solve(prog, method);
    CHECK(sol.mask == M(2, {0}));
    CHECK(sol.objective == 3.0);
  }
}

TEST_CASE("build_program guards and conversion") {
  const FourierSpectrum s(3, std::vector<Term>{{Mask::from_indices(3, {1}), 1.0}});
  CHECK_THROWS_AS(build_program(s, 4, Direction::max), InvalidArgument);
  const auto prog = build_program(s, 0, Direction::min);
  CHECK(prog.retain == 3);
  CHECK(prog.relevant_vars == std::vector<std::size_t>{1});
  CHECK(prog.mobius.coef(Mask::from_indices(3, {1})) == -2.0);
}

TEST_CASE("brute-force guard") {
  std::vector<Term> terms;
  for (std::size_t i = 0; i < 25; ++i) terms.push_back({Mask::from_indices(30, {i}), 1.0 + i});
  const auto prog = build_program(MobiusSpectrum(30, terms), 5, Direction::max);
  CHECK_THROWS_AS(solve(prog, SolveMethod::brute), CapacityError);
  const auto sol = solve(prog, SolveMethod::bnb);
  CHECK(sol.optimality == Optimality::proven);
  // Dropping the five irrelevant features keeps every singleton.
  CHECK(sol.objective == doctest::Approx(325.0));
  CHECK(sol.mask.count() == 25);
}

TEST_CASE("bnb equals exhaustive search on random programs") {
  std::mt19937_64 gen(41);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 12;
    const auto spec = oracle::to_spectrum(n, oracle::random_sparse(gen, n, 20, 4));
    const auto mob = fourier_to_mobius(spec);
    for (std::size_t r : {1, 4, 7}) {
      for (auto dir : {Direction::max, Direction::min}) {
        const auto prog = build_program(mob, r, dir);
        const auto [best, arg] = exhaustive(mob, n - r, dir);
        for (auto method : {SolveMethod::brute, SolveMethod::bnb}) {
          const auto sol = solve(prog, method);
          REQUIRE(sol.mask.count() == n - r);
          CHECK(sol.objective == mob.evaluate(sol.mask));
          CHECK(std::abs(sol.objective - best) <= 1e-9 * (1 + std::abs(best)));
          CHECK(sol.optimality == Optimality::proven);
        }
      }
    }
  }
}

TEST_CASE("node limit downgrades to heuristic") {
  std::mt19937_64 gen(42);
  const int n = 20;
  const auto spec = oracle::to_spectrum(n, oracle::random_sparse(gen, n, 60, 4));
  const auto prog = build_program(spec, 10, Direction::max);
  const auto sol = solve(prog, SolveMethod::bnb, SolveLimits{5, 0.0});
  CHECK(sol.optimality == Optimality::heuristic);
  CHECK(sol.mask.count() == 10);
  CHECK(sol.objective == prog.mobius.evaluate(sol.mask));
}

TEST_CASE("max optimum is monotone in cardinality for non-negative coefficients") {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Term> terms;
  for (const auto& [T, c] : oracle::random_sparse(gen, 10, 15, 3)) terms.push_back({oracle::to_mask(10, T), std::abs(c)});
  const MobiusSpectrum mob(10, terms);
  double prev = -INFINITY;
  for (std::size_t m = 0; m <= 10; ++m) {
    const auto sol = solve(build_program(mob, 10 - m, Direction::max), SolveMethod::bnb);
    CHECK(sol.objective >= prev);
    prev = sol.objective;
  }
}

TEST_CASE("identify_removal takes the farther of max and min") {
  // f̂ = 1 + 3·x0 - 5·x1 (Möbius): full value -1. Removing one feature:
  // drop x1 -> 4 (gap 5), drop x0 -> -4 (gap 3). Farther is removing x1.
  const MobiusSpectrum mob(2, std::vector<Term>{{Mask(2), 1.0}, {M(2, {0}), 3.0}, {M(2, {1}), -5.0}});
  std::vector<Term> fourier_terms;
  // Build the Fourier spectrum whose Möbius form is `mob` from its dense table.
  const auto table = dense_table(mob);
  const auto spec = exact_transform(2, table);
  const auto res = identify_removal(spec, 1);
  CHECK(res.full_value == doctest::Approx(-1.0));
  CHECK(res.best.mask == M(2, {0}));
  CHECK(res.gap == doctest::Approx(5.0));
  CHECK(res.maximizer.direction == Direction::max);
  CHECK(res.minimizer.direction == Direction::min);
}

TEST_CASE("solver name parsing") {
  CHECK(parse_method("bnb") == SolveMethod::bnb);
  CHECK(parse_method("brute") == SolveMethod::brute);
  CHECK(parse_direction("min") == Direction::min);
  CHECK_THROWS_AS(parse_method("milp"), InvalidArgument);
  CHECK(to_string(Optimality::heuristic) == "heuristic");
}
