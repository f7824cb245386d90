#include <cmath>
#include <vector>

#include "doctest.h"
#include "vxf/rng.hpp"

using vxf::Rng;

TEST_CASE("streams are reproducible and independent of call order") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base(7);
  Rng s1 = base.derive(1, 2, 3);
  base.derive(9, 9, 9).next_u64();  // unrelated stream consumption
  Rng s2 = base.derive(1, 2, 3);
  CHECK(s1.next_u64() == s2.next_u64());

  CHECK(base.derive(1, 2, 3).next_u64() != base.derive(1, 2, 4).next_u64());
  CHECK(base.derive(-1).next_u64() != base.derive(1).next_u64());
}

TEST_CASE("derive_seed matches explicit derivation") {
  Rng base(99);
  Rng via_rng = base.derive(-5, 3, 0);
  Rng via_seed{vxf::derive_seed(99, -5, 3, 0)};
  // derive_seed re-hashes the state, so sequences differ, but the seed is a
  // pure function of (seed, tags).
  CHECK(vxf::derive_seed(99, -5, 3, 0) == via_rng.state());
  CHECK(via_seed.next_u64() == Rng{vxf::derive_seed(99, -5, 3, 0)}.next_u64());
}

TEST_CASE("uniform and normal have sane moments") {
  Rng rng(1234);
  const int n = 200000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
    sq += u * u;
  }
  mean /= n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);

  double nmean = 0.0, nsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    nmean += g;
    nsq += g * g;
  }
  nmean /= n;
  CHECK(std::abs(nmean) < 0.01);
  CHECK(std::abs(nsq / n - nmean * nmean - 1.0) < 0.02);
}
