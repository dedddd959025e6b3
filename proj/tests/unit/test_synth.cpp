#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "spex/errors.hpp"
#include "spex/synth.hpp"

using namespace spex;

TEST_CASE("staircase construction") {
  const auto s = make_synthetic({SyntheticFamily::staircase, 3, 1, 2, 0});
  REQUIRE(s.truth.size() == 2);
  CHECK(s.truth.coef(Mask::from_indices(3, {0})) == 1.0);
  CHECK(s.truth.coef(Mask::from_indices(3, {0, 1})) == 1.0);
  // f(S) = (-1)^{[0∈S]} + (-1)^{|S∩{0,1}|}
  for (std::uint32_t S = 0; S < 8; ++S) {
    const bool a = S & 1U, b = S & 2U;
    const double expected = (a ? -1.0 : 1.0) + ((a != b) ? -1.0 : 1.0);
    CHECK((*s.vf)(oracle::to_mask(3, S)) == expected);
  }
}

TEST_CASE("peak: distinct sets of the requested size") {
  const auto truth = synthetic_truth({SyntheticFamily::peak, 20, 10, 5, 7});
  REQUIRE(truth.size() == 10);
  std::set<std::vector<std::size_t>> seen;
  for (const auto& t : truth.terms()) {
    CHECK(t.set.count() == 5);
    CHECK(t.coef > -1.0);
    CHECK(t.coef < 1.0);
    seen.insert(t.set.indices());
  }
  CHECK(seen.size() == 10);
  const auto again = synthetic_truth({SyntheticFamily::peak, 20, 10, 5, 7});
  CHECK(again.terms().size() == truth.terms().size());
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(again.terms()[i].coef == truth.terms()[i].coef);
}

TEST_CASE("complete hierarchy is the down-closure") {
  const auto one = synthetic_truth({SyntheticFamily::complete_hierarchy, 2, 1, 2, 3});
  REQUIRE(one.size() == 4);
  const auto vf = make_synthetic({SyntheticFamily::complete_hierarchy, 2, 1, 2, 3}).vf;
  for (std::uint32_t S = 0; S < 4; ++S) {
    double expected = 0.0;
    for (const auto& t : one.terms()) expected += t.set.odd_overlap(oracle::to_mask(2, S)) ? -t.coef : t.coef;
    CHECK((*vf)(oracle::to_mask(2, S)) == doctest::Approx(expected).epsilon(1e-15));
  }

  const auto big = synthetic_truth({SyntheticFamily::complete_hierarchy, 30, 6, 4, 1});
  for (const auto& t : big.terms())
    for_each_subset(t.set, [&](const Mask& sub) { CHECK(big.contains(sub)); });
  CHECK(big.degree() == 4);
}

TEST_CASE("synthetic vf agrees with its truth on the full cube") {
  for (auto fam : {SyntheticFamily::peak, SyntheticFamily::complete_hierarchy, SyntheticFamily::staircase}) {
    const auto s = make_synthetic({fam, 12, 5, 4, 2});
    const auto F = oracle::to_sparse(s.truth);
    const auto table = oracle::table_from_fourier(12, F);
    for (std::uint32_t S = 0; S < table.size(); S += 3)
      REQUIRE(std::abs((*s.vf)(oracle::to_mask(12, S)) - table[S]) <= 1e-12);
  }
}

TEST_CASE("synthetic spec validation and names") {
  CHECK_THROWS_AS(make_synthetic({SyntheticFamily::peak, 4, 1, 5, 0}), InvalidArgument);
  CHECK_THROWS_AS(make_synthetic({SyntheticFamily::peak, 4, 0, 2, 0}), InvalidArgument);
  CHECK_THROWS_AS(make_synthetic({SyntheticFamily::peak, 5, 20, 2, 0}), InvalidArgument);  // only C(5,2)=10 sets
  CHECK(parse_family("complete_hierarchy") == SyntheticFamily::complete_hierarchy);
  CHECK(to_string(SyntheticFamily::staircase) == "staircase");
  CHECK_THROWS_AS(parse_family("ring"), InvalidArgument);
}
