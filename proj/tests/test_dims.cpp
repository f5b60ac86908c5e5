#include <map>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "skewfib/dims.hpp"

using namespace skewfib;
using namespace skewfib::dims;

TEST_CASE("rho examples") {
  CHECK(rho(1) == 1);
  CHECK(rho(16) == 9);
  CHECK(rho(12) == 4);
  CHECK(rho(2) == 2);
  CHECK(rho(8) == 8);
  CHECK(rho(32) == 10);
  CHECK_THROWS_AS(rho(0), Error);
  CHECK_THROWS_AS(rho(-4), Error);
}

TEST_CASE("rho agrees with trial-division factoring up to 1e4") {
  for (std::int64_t q = 1; q <= 10000; ++q) REQUIRE(rho(q) == oracle::rho_by_factoring(q));
}

TEST_CASE("admissible_skew examples") {
  CHECK(admissible_skew({1, 3}));
  CHECK(admissible_skew({2, 6}));
  CHECK_FALSE(admissible_skew({1, 4}));
  CHECK_FALSE(admissible_skew({0, 0}));
  CHECK_FALSE(admissible_skew({3, 2}));
}

TEST_CASE("a_k reproduces the published periods") {
  const std::vector<std::int64_t> expected{2, 4, 4, 8, 8, 8, 8, 16, 32, 64, 64, 128, 128, 128};
  for (int k = 1; k <= 14; ++k) CHECK(a_k(k) == expected[k - 1]);
  CHECK_THROWS_AS(a_k(0), Error);
}

TEST_CASE("admissible_skew holds iff a_k divides n - k") {
  for (int k = 1; k <= 14; ++k) {
    const std::int64_t period = a_k(k);
    for (int q = 1; q <= 256; ++q) CHECK(admissible_skew({k, k + q}) == (q % period == 0));
  }
}

TEST_CASE("columns of the published table for n = 3..24") {
  const std::map<int, std::vector<int>> table{
      {3, {1}},     {4, {}},      {5, {1}},        {6, {2}},    {7, {3, 1}},  {8, {}},
      {9, {1}},     {10, {2}},    {11, {3, 1}},    {12, {4}},   {13, {5, 1}}, {14, {6, 2}},
      {15, {7, 3, 1}}, {16, {}},  {17, {1}},       {18, {2}},   {19, {3, 1}}, {20, {4}},
      {21, {5, 1}}, {22, {6, 2}}, {23, {7, 3, 1}}, {24, {8}}};
  for (const auto& [n, ks] : table) CHECK(skew_column(n) == ks);
}

TEST_CASE("admissible_sphere examples and implication") {
  CHECK(admissible_sphere({1, 5}));
  CHECK(admissible_sphere({3, 7}));
  CHECK_FALSE(admissible_sphere({2, 6}));
  CHECK(admissible_sphere({7, 15}));
  CHECK_FALSE(admissible_sphere({7, 23}));
  CHECK(admissible_sphere({0, 4}));
  for (int n = 1; n <= 200; ++n)
    for (int k = 1; k < n; ++k)
      if (admissible_sphere({k, n})) CHECK(admissible_skew({k, n}));
}
