#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ftlab {

// Edge orientation on the square torus.
enum class Orient : int { H = 0, V = 1 };

// Packed Z2 vector over edges. Semantics are set-XOR; layout is 64-bit words.
class BitChain {
 public:
  BitChain() = default;
  explicit BitChain(int n_bits) : n_bits_(n_bits), words_((n_bits + 63) / 64, 0) {}

  int size() const { return n_bits_; }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void flip(int i) { words_[i >> 6] ^= (uint64_t{1} << (i & 63)); }
  void set(int i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }

  BitChain& operator^=(const BitChain& o) {
    for (size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }
  friend BitChain operator^(BitChain a, const BitChain& b) { return a ^= b; }

  bool operator==(const BitChain& o) const {
    return n_bits_ == o.n_bits_ && words_ == o.words_;
  }

  bool empty() const {
    for (uint64_t w : words_) if (w) return false;
    return true;
  }

  int popcount() const {
    int c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  // Parity of |this AND other|.
  bool overlap_parity(const BitChain& o) const {
    uint64_t acc = 0;
    for (size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & o.words_[w];
    return std::popcount(acc) & 1;
  }

 private:
  int n_bits_ = 0;
  std::vector<uint64_t> words_;
};

// X-type and Z-type error content of a Pauli product over the edges.
struct PauliChain {
  BitChain x_part;
  BitChain z_part;

  explicit PauliChain(int n_edges) : x_part(n_edges), z_part(n_edges) {}
  PauliChain() = default;

  PauliChain& operator^=(const PauliChain& o) {
    x_part ^= o.x_part;
    z_part ^= o.z_part;
    return *this;
  }
  bool identity() const { return x_part.empty() && z_part.empty(); }
};

struct DefectSet {
  std::vector<int> vertex_defects;  // sorted vertex indices
  std::vector<int> face_defects;    // sorted face indices
  bool empty() const { return vertex_defects.empty() && face_defects.empty(); }
};

// Four winding bits of a closed chain: (wz_v, wz_h, wx_v, wx_h).
struct HomologyClass {
  bool wz_v = false, wz_h = false, wx_v = false, wx_h = false;
  bool trivial() const { return !wz_v && !wz_h && !wx_v && !wx_h; }
  bool operator==(const HomologyClass&) const = default;
};

// k x k torus with one spin per edge. Coordinates are (x, y) mod k;
// horizontal edge (x,y,H) joins (x,y)-(x+1,y), vertical edge (x,y,V)
// joins (x,y)-(x,y+1); face (x,y) is bounded by
// {(x,y,H), (x,y+1,H), (x,y,V), (x+1,y,V)}.
class ToricLattice {
 public:
  explicit ToricLattice(int k) : k_(k) {
    if (k < 2) throw std::invalid_argument("toric lattice requires k >= 2");
    const int n = k * k;
    star_.resize(n);
    bound_.resize(n);
    edge_vertices_.resize(2 * n);
    edge_faces_.resize(2 * n);
    for (int y = 0; y < k; ++y) {
      for (int x = 0; x < k; ++x) {
        const int s = vertex_index(x, y);
        star_[s] = {edge_index(x, y, Orient::H), edge_index(mod(x - 1), y, Orient::H),
                    edge_index(x, y, Orient::V), edge_index(x, mod(y - 1), Orient::V)};
        const int p = face_index(x, y);
        bound_[p] = {edge_index(x, y, Orient::H), edge_index(x, mod(y + 1), Orient::H),
                     edge_index(x, y, Orient::V), edge_index(mod(x + 1), y, Orient::V)};
        edge_vertices_[edge_index(x, y, Orient::H)] = {s, vertex_index(mod(x + 1), y)};
        edge_vertices_[edge_index(x, y, Orient::V)] = {s, vertex_index(x, mod(y + 1))};
        // h(x,y) separates faces (x,y) and (x,y-1); v(x,y) separates (x,y) and (x-1,y).
        edge_faces_[edge_index(x, y, Orient::H)] = {p, face_index(x, mod(y - 1))};
        edge_faces_[edge_index(x, y, Orient::V)] = {p, face_index(mod(x - 1), y)};
      }
    }
    seam_v_ = BitChain(n_edges());
    seam_h_ = BitChain(n_edges());
    dual_seam_v_ = BitChain(n_edges());
    dual_seam_h_ = BitChain(n_edges());
    for (int t = 0; t < k; ++t) {
      seam_v_.set(edge_index(0, t, Orient::H));       // crossed by horizontal transport
      seam_h_.set(edge_index(t, 0, Orient::V));
      dual_seam_v_.set(edge_index(0, t, Orient::V));  // same cuts on the dual lattice
      dual_seam_h_.set(edge_index(t, 0, Orient::H));
    }
  }

  int k() const { return k_; }
  int n_vertices() const { return k_ * k_; }
  int n_faces() const { return k_ * k_; }
  int n_edges() const { return 2 * k_ * k_; }

  int mod(int a) const {
    const int m = a % k_;
    return m < 0 ? m + k_ : m;
  }
  int vertex_index(int x, int y) const { return y * k_ + x; }
  int face_index(int x, int y) const { return y * k_ + x; }
  int edge_index(int x, int y, Orient o) const {
    return (o == Orient::V ? k_ * k_ : 0) + y * k_ + x;
  }
  Orient edge_orient(int e) const { return e < k_ * k_ ? Orient::H : Orient::V; }
  int edge_x(int e) const { return (e % (k_ * k_)) % k_; }
  int edge_y(int e) const { return (e % (k_ * k_)) / k_; }

  const std::array<int, 4>& star(int s) const {
    if (s < 0 || s >= n_vertices()) throw std::out_of_range("invalid vertex index");
    return star_[s];
  }
  const std::array<int, 4>& bound(int p) const {
    if (p < 0 || p >= n_faces()) throw std::out_of_range("invalid face index");
    return bound_[p];
  }
  const std::array<int, 2>& edge_vertices(int e) const { return edge_vertices_[e]; }
  const std::array<int, 2>& edge_faces(int e) const { return edge_faces_[e]; }

  const BitChain& seam_v() const { return seam_v_; }
  const BitChain& seam_h() const { return seam_h_; }
  const BitChain& dual_seam_v() const { return dual_seam_v_; }
  const BitChain& dual_seam_h() const { return dual_seam_h_; }

  BitChain star_chain(int s) const {
    BitChain c(n_edges());
    for (int e : star(s)) c.flip(e);
    return c;
  }
  BitChain bound_chain(int p) const {
    BitChain c(n_edges());
    for (int e : bound(p)) c.flip(e);
    return c;
  }

  DefectSet syndrome(const PauliChain& chain) const {
    DefectSet d;
    for (int s = 0; s < n_vertices(); ++s) {
      int odd = 0;
      for (int e : star_[s]) odd ^= chain.z_part.test(e);
      if (odd) d.vertex_defects.push_back(s);
    }
    for (int p = 0; p < n_faces(); ++p) {
      int odd = 0;
      for (int e : bound_[p]) odd ^= chain.x_part.test(e);
      if (odd) d.face_defects.push_back(p);
    }
    return d;
  }

  // Defined for closed chains only. Z windings count crossings of the primal
  // seams; X windings count crossings of the dual seams.
  HomologyClass homology_class(const PauliChain& chain) const {
    if (!syndrome(chain).empty())
      throw std::invalid_argument("homology class of an open chain is undefined");
    HomologyClass h;
    h.wz_v = chain.z_part.overlap_parity(seam_v_);
    h.wz_h = chain.z_part.overlap_parity(seam_h_);
    h.wx_v = chain.x_part.overlap_parity(dual_seam_v_);
    h.wx_h = chain.x_part.overlap_parity(dual_seam_h_);
    return h;
  }

  // Torus graph distance between two vertices (or two faces).
  int site_distance(int a, int b) const {
    const int dx = std::abs(a % k_ - b % k_);
    const int dy = std::abs(a / k_ - b / k_);
    return std::min(dx, k_ - dx) + std::min(dy, k_ - dy);
  }

 private:
  int k_;
  std::vector<std::array<int, 4>> star_;
  std::vector<std::array<int, 4>> bound_;
  std::vector<std::array<int, 2>> edge_vertices_;
  std::vector<std::array<int, 2>> edge_faces_;
  BitChain seam_v_, seam_h_, dual_seam_v_, dual_seam_h_;
};

}  // namespace ftlab
