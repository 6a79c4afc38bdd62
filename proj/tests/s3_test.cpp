#include "ftlab/s3.hpp"

#include <gtest/gtest.h>

#include <array>
#include <set>

using namespace ftlab;

namespace {

// Independent oracle: permutations as explicit point maps, composed by
// applying the right factor first.
using Perm = std::array<int, 3>;

Perm to_perm(S3 g) { return {g.apply(0), g.apply(1), g.apply(2)}; }

Perm compose(const Perm& a, const Perm& b) {
  return {a[b[0]], a[b[1]], a[b[2]]};
}

}  // namespace

TEST(S3, TableMatchesPermutationOracle) {
  for (S3 a : all_s3())
    for (S3 b : all_s3())
      EXPECT_EQ(to_perm(multiply(a, b)), compose(to_perm(a), to_perm(b)));
}

TEST(S3, Examples) {
  EXPECT_EQ(multiply(S3::t12(), S3::t12()), S3::e());
  EXPECT_EQ(inverse(S3::c123()), S3::c132());
  EXPECT_EQ(multiply(S3::t12(), S3::t13()), S3::c132());
  EXPECT_NE(multiply(S3::t12(), S3::t13()), multiply(S3::t13(), S3::t12()));
}

TEST(S3, GroupAxioms) {
  for (S3 a : all_s3()) {
    EXPECT_EQ(multiply(a, S3::e()), a);
    EXPECT_EQ(multiply(S3::e(), a), a);
    EXPECT_EQ(multiply(a, inverse(a)), S3::e());
    for (S3 b : all_s3())
      for (S3 c : all_s3())
        EXPECT_EQ(multiply(multiply(a, b), c), multiply(a, multiply(b, c)));
  }
}

TEST(S3, ConjugacyClasses) {
  EXPECT_EQ(S3::e().conjugacy_class(), 0);
  for (S3 t : {S3::t12(), S3::t13(), S3::t23()}) EXPECT_EQ(t.conjugacy_class(), 1);
  for (S3 c : {S3::c123(), S3::c132()}) EXPECT_EQ(c.conjugacy_class(), 2);
}

TEST(S3, ConjugationPreservesClassExhaustively) {
  for (S3 g1 : all_s3())
    for (S3 g2 : all_s3())
      EXPECT_EQ(conjugate_by(g1, g2).conjugacy_class(), g1.conjugacy_class());
}

TEST(S3, BraidRuleExample) {
  // (13)^-1 (12) (13) = (23)
  EXPECT_EQ(conjugate_by(S3::t12(), S3::t13()), S3::t23());
}

// Conjugating by b then by c equals conjugating by the product b*c.
TEST(S3, ConjugationIsAnAction) {
  for (S3 f : all_s3())
    for (S3 b : all_s3())
      for (S3 c : all_s3())
        EXPECT_EQ(conjugate_by(conjugate_by(f, b), c), conjugate_by(f, multiply(b, c)));
}

TEST(S3, AbelianSubgroupNeverMovesItself) {
  const std::array<S3, 3> rot = {S3::e(), S3::c123(), S3::c132()};
  for (S3 a : rot)
    for (S3 b : rot) EXPECT_EQ(conjugate_by(a, b), a);
  // non-abelian witness
  EXPECT_NE(conjugate_by(S3::t12(), S3::t13()), S3::t12());
}

TEST(S3, NamesAreDistinct) {
  std::set<std::string_view> names;
  for (S3 g : all_s3()) names.insert(g.name());
  EXPECT_EQ(names.size(), 6u);
}
