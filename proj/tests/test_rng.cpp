#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "lf/rng.hpp"

using namespace lf;

TEST_CASE("same seed reproduces the same sequence") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("named streams are independent and stable") {
  Rng root(999);
  Rng s1 = root.stream("planner");
  Rng s2 = root.stream("tracker");
  Rng s1again = root.stream("planner");
  CHECK(s1.next_u64() == s1again.next_u64());
  Rng t1 = root.stream("planner");
  Rng t2 = root.stream("tracker");
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (t1.next_u64() == t2.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("indexed streams differ by index") {
  Rng root(5);
  Rng a = root.stream("agent", 0);
  Rng b = root.stream("agent", 1);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in range and looks flat") {
  Rng rng(77);
  const int n = 200000;
  double sum = 0, mn = 1, mx = 0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    mn = std::min(mn, u);
    mx = std::max(mx, u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(mn < 0.001);
  CHECK(mx > 0.999);
}

TEST_CASE("uniform(lo,hi) respects bounds") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform(-2.5, 4.5);
    CHECK(u >= -2.5);
    CHECK(u < 4.5);
  }
}

TEST_CASE("below(n) covers all residues") {
  Rng rng(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("gauss has roughly standard moments") {
  Rng rng(1234);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gauss();
    s += g;
    s2 += g * g;
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.0).epsilon(1).scale(0.02));
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  Rng a(55), b(55);
  std::vector<int> va(20), vb(20);
  std::iota(va.begin(), va.end(), 0);
  std::iota(vb.begin(), vb.end(), 0);
  a.shuffle(va.begin(), va.end());
  b.shuffle(vb.begin(), vb.end());
  CHECK(va == vb);
  std::vector<int> sorted = va;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("shuffle visits many orders") {
  Rng rng(9);
  std::set<std::vector<int>> orders;
  for (int it = 0; it < 200; ++it) {
    std::vector<int> v{0, 1, 2, 3};
    rng.shuffle(v.begin(), v.end());
    orders.insert(v);
  }
  CHECK(orders.size() == 24);
}
