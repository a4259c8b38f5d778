#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sparse_unif/rng.hpp"

using namespace sparse_unif;

// Known answers from numpy.random.Philox, which shares the
// pre-increment-then-encrypt convention.
TEST_CASE("philox known answers") {
  Philox4x64 g(Philox4x64::Key{1, 2}, Philox4x64::Block{0, 0, 0, 0});
  const std::uint64_t expect[] = {0x4f2f4313b5536b09, 0x5b617be3219ff32a, 0x097293476f9275cb, 0xf63f3bf4962c3942,
                                  0x04dcc60473aa0f43, 0x6d905c9b986b0028, 0x559a6c953d16fe9d, 0xbd24fd1da9945eea};
  for (std::uint64_t e : expect) CHECK(g() == e);

  // Counter carry out of the low word.
  Philox4x64 h(Philox4x64::Key{0, 0}, Philox4x64::Block{~0ULL, 0, 0, 0});
  const std::uint64_t carry[] = {0xe85facf8b3b067d6, 0xfdbc6a61c123b5f8, 0x349bde9a4b8d60c1, 0x39212690df8b178a};
  for (std::uint64_t e : carry) CHECK(h() == e);
}

TEST_CASE("seed streams") {
  const SeedSpec root{42, 0};
  Philox4x64 a(root);
  Philox4x64 b(root);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(root.child(1) == root.child(1));
  CHECK(!(root.child(1) == root.child(2)));
  CHECK(!(root.child(1, 7) == root.child(1, 8)));
  std::set<std::uint64_t> ids;
  for (std::uint64_t i = 0; i < 10000; ++i) ids.insert(root.child(i).stream_id);
  CHECK(ids.size() == 10000);

  Philox4x64 c(SeedSpec{42, 1});
  Philox4x64 d(SeedSpec{42, 0});
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += c() == d() ? 1 : 0;
  CHECK(equal == 0);
}

TEST_CASE("uniform doubles") {
  Philox4x64 g(SeedSpec{9, 9});
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
