#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace ftlab {

// The symmetric group S3, the smallest non-abelian group. Elements are fixed
// as e, (12), (13), (23), (123), (132); multiply(a, b) composes right to
// left (b acts first), so multiply((12), (13)) = (132).
class S3 {
 public:
  constexpr S3() : v_(0) {}
  constexpr explicit S3(uint8_t v) : v_(v) {
    if (v > 5) throw std::invalid_argument("invalid S3 element");
  }

  static constexpr S3 e() { return S3(0); }
  static constexpr S3 t12() { return S3(1); }
  static constexpr S3 t13() { return S3(2); }
  static constexpr S3 t23() { return S3(3); }
  static constexpr S3 c123() { return S3(4); }
  static constexpr S3 c132() { return S3(5); }

  constexpr uint8_t index() const { return v_; }
  constexpr bool is_identity() const { return v_ == 0; }

  constexpr bool operator==(const S3&) const = default;

  // Conjugacy classes: 0 -> {e}, 1 -> transpositions, 2 -> 3-cycles.
  constexpr int conjugacy_class() const { return v_ == 0 ? 0 : (v_ <= 3 ? 1 : 2); }

  std::string_view name() const {
    constexpr std::array<std::string_view, 6> names = {"e",     "(12)",  "(13)",
                                                       "(23)",  "(123)", "(132)"};
    return names[v_];
  }

  // Image of point p in {0,1,2} under this permutation.
  constexpr int apply(int p) const { return kPerm[v_][p]; }

  friend constexpr S3 multiply(S3 a, S3 b) {
    // result maps p -> a(b(p))
    for (uint8_t r = 0; r < 6; ++r)
      if (kPerm[r][0] == a.apply(b.apply(0)) && kPerm[r][1] == a.apply(b.apply(1)) &&
          kPerm[r][2] == a.apply(b.apply(2)))
        return S3(r);
    return S3(0);  // unreachable: S3 is closed
  }

  friend constexpr S3 inverse(S3 a) {
    for (uint8_t r = 0; r < 6; ++r)
      if (multiply(S3(r), a) == e()) return S3(r);
    return S3(0);  // unreachable
  }

  // Braiding rule: the flux of a particle carried once around flux g becomes
  // g^-1 * flux * g.
  friend constexpr S3 conjugate_by(S3 flux, S3 g) {
    return multiply(multiply(inverse(g), flux), g);
  }

 private:
  static constexpr std::array<std::array<int, 3>, 6> kPerm = {{
      {0, 1, 2},  // e
      {1, 0, 2},  // (12)
      {2, 1, 0},  // (13)
      {0, 2, 1},  // (23)
      {1, 2, 0},  // (123): 1->2, 2->3, 3->1
      {2, 0, 1},  // (132): 1->3, 3->2, 2->1
  }};

  uint8_t v_;
};

inline constexpr std::array<S3, 6> all_s3() {
  return {S3(0), S3(1), S3(2), S3(3), S3(4), S3(5)};
}

}  // namespace ftlab
