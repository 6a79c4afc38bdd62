#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftlab/rng.hpp"
#include "ftlab/s3.hpp"
#include "ftlab/stats.hpp"

namespace ftlab {

// Flux anyon on an L x L open planar grid. Flux labels are base-framed: the
// reference point sits below the lattice, each anyon trails a cut running
// straight down from its position, and the total flux is the ordered product
// over anyons sorted by x ascending, then y descending. Under this framing
// the total flux of a vacuum-created population is exactly the identity and
// stays so under every operation below.
struct FluxAnyon {
  int id = -1;
  S3 flux;
  int x = 0, y = 0;
  int partner_id = -1;  // the anyon it was created with
  bool stray = false;   // created by noise rather than by the computation
  bool alive = false;
};

struct QDEvent {
  enum class Kind { Create, Move, Braid, Fuse };
  Kind kind{};
  int a = -1, b = -1;       // Create: new ids; Move: id; Braid: mover, target; Fuse: ids
  uint8_t flux = 0;         // Create: local flux index of the anyon at (ax, ay)
  int ax = 0, ay = 0;       // Create: first site; Move: step (dx, dy)
  int bx = 0, by = 0;       // Create: second site
  bool stray = false;       // Create
  int residual_id = -1;     // Fuse outcome, -1 when the pair fused to vacuum
  uint8_t residual_flux = 0;
  bool wrong_pair = false;  // Fuse diagnostic: partner ids did not match
};

struct FuseResult {
  bool vacuum = false;
  int residual_id = -1;
  S3 residual_flux;
  bool wrong_pair = false;
};

class DoubleState {
 public:
  DoubleState(int grid_l, uint64_t stream_key)
      : l_(grid_l), rng_(stream_key), occupant_(grid_l * grid_l, -1) {
    if (grid_l < 4) throw std::invalid_argument("quantum-double grid needs L >= 4");
  }

  int grid_size() const { return l_; }
  long clock() const { return clock_; }
  const std::vector<FluxAnyon>& anyons() const { return anyons_; }
  const std::vector<QDEvent>& log() const { return log_; }
  RandomStream& rng() { return rng_; }

  const FluxAnyon& anyon(int id) const {
    if (id < 0 || id >= static_cast<int>(anyons_.size()) || !anyons_[id].alive)
      throw std::invalid_argument("no such anyon");
    return anyons_[id];
  }
  bool in_bounds(int x, int y) const { return x >= 0 && x < l_ && y >= 0 && y < l_; }
  int occupant(int x, int y) const { return occupant_[y * l_ + x]; }
  bool vacant(int x, int y) const { return in_bounds(x, y) && occupant(x, y) < 0; }

  int alive_count() const {
    int n = 0;
    for (const auto& a : anyons_) n += a.alive;
    return n;
  }

  // Ordered product of all flux labels (x ascending, y descending): identity
  // for any population built from vacuum.
  S3 total_flux() const {
    S3 acc = S3::e();
    for (int id : ordered_ids()) acc = multiply(acc, anyons_[id].flux);
    return acc;
  }

  // ---- operations ----

  std::pair<int, int> create_pair(S3 g, int ax, int ay, int bx, int by,
                                  bool stray = false) {
    if (g.is_identity()) throw std::invalid_argument("cannot create vacuum particles");
    if (!vacant(ax, ay) || !vacant(bx, by))
      throw std::invalid_argument("pair-creation sites must be vacant");
    if (std::abs(ax - bx) + std::abs(ay - by) != 1)
      throw std::invalid_argument("pair-creation sites must be adjacent");
    const int id_a = next_id_++, id_b = next_id_++;
    anyons_.push_back(FluxAnyon{id_a, g, ax, ay, id_b, stray, true});
    anyons_.push_back(FluxAnyon{id_b, inverse(g), bx, by, id_a, stray, true});
    occupant_[ay * l_ + ax] = id_a;
    occupant_[by * l_ + bx] = id_b;
    // Base-framed labels: the member later in the spatial order is dressed by
    // the in-between product so the ordered total flux stays the identity.
    const S3 lam = between_product(id_a, id_b);
    if (order_less(anyons_[id_a], anyons_[id_b]))
      anyons_[id_b].flux = multiply(multiply(inverse(lam), inverse(g)), lam);
    else
      anyons_[id_a].flux = multiply(multiply(inverse(lam), g), lam);
    log_.push_back(QDEvent{QDEvent::Kind::Create, id_a, id_b, g.index(), ax, ay, bx, by,
                           stray, -1, 0, false});
    return {id_a, id_b};
  }

  // One unit step. Crossing another anyon's cut conjugates the mover's flux;
  // the mover's own cut sweeping over an anyon conjugates that anyon.
  void move_anyon(int id, int dx, int dy) {
    if (std::abs(dx) + std::abs(dy) != 1)
      throw std::invalid_argument("moves are unit steps");
    FluxAnyon& m = mutable_anyon(id);
    const int nx = m.x + dx, ny = m.y + dy;
    if (!vacant(nx, ny)) throw std::invalid_argument("move target is not vacant");
    apply_move(m, nx, ny);
    log_.push_back(QDEvent{QDEvent::Kind::Move, id, -1, 0, dx, dy, 0, 0, false, -1, 0, false});
  }

  // Carries the mover once counterclockwise around the target along the ring
  // of eight neighboring sites. The mover must start on that ring and the
  // rest of the ring must be vacant. Net effect on the mover's flux in an
  // uncluttered region: g -> g_t^-1 g g_t.
  void braid(int mover_id, int target_id) {
    const FluxAnyon& t = anyon(target_id);
    FluxAnyon& m = mutable_anyon(mover_id);
    if (mover_id == target_id) throw std::invalid_argument("cannot braid an anyon around itself");
    const auto ring = braid_ring(t.x, t.y);
    int start = -1;
    for (size_t i = 0; i < ring.size(); ++i) {
      const auto [rx, ry] = ring[i];
      if (!in_bounds(rx, ry)) throw std::invalid_argument("braid ring leaves the grid");
      if (rx == m.x && ry == m.y)
        start = static_cast<int>(i);
      else if (!vacant(rx, ry))
        throw std::invalid_argument("braid ring is blocked");
    }
    if (start < 0) throw std::invalid_argument("mover must sit on the ring around the target");
    execute_ring(m, ring, start);
    log_.push_back(QDEvent{QDEvent::Kind::Braid, mover_id, target_id, 0, 0, 0, 0, 0, false,
                           -1, 0, false});
  }

  // Fuses two adjacent anyons. An exactly inverse (frame-corrected) pair
  // fuses to vacuum; anything else leaves a residual particle at the site of
  // the spatially first member.
  FuseResult fuse(int id_a, int id_b) {
    FluxAnyon& a = mutable_anyon(id_a);
    FluxAnyon& b = mutable_anyon(id_b);
    if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1)
      throw std::invalid_argument("fusion requires adjacent anyons");
    const bool a_first = order_less(a, b);
    FluxAnyon& first = a_first ? a : b;
    FluxAnyon& second = a_first ? b : a;
    const S3 lam = between_product(first.id, second.id);
    const S3 merged =
        multiply(first.flux, multiply(lam, multiply(second.flux, inverse(lam))));
    FuseResult res;
    res.wrong_pair = (a.partner_id != b.id);
    const int fx = first.x, fy = first.y;
    remove_anyon(a);
    remove_anyon(b);
    if (merged.is_identity()) {
      res.vacuum = true;
    } else {
      const int rid = next_id_++;
      anyons_.push_back(FluxAnyon{rid, merged, fx, fy, -1, a.stray || b.stray, true});
      occupant_[fy * l_ + fx] = rid;
      res.residual_id = rid;
      res.residual_flux = merged;
    }
    log_.push_back(QDEvent{QDEvent::Kind::Fuse, id_a, id_b, 0, 0, 0, 0, 0, false,
                           res.residual_id, res.residual_flux.index(), res.wrong_pair});
    return res;
  }

  // With probability p_pair inserts a stray pair at a uniformly random vacant
  // adjacent site pair, class drawn by weight and the element uniformly
  // within the class; then every stray takes one unbiased random-walk step.
  void noise_step(double p_pair, double w_transposition = 0.5) {
    if (p_pair < 0 || p_pair > 1 || w_transposition < 0 || w_transposition > 1)
      throw std::invalid_argument("invalid noise parameters");
    if (p_pair > 0 && rng_.next_bernoulli(p_pair)) {
      const auto pairs = vacant_adjacent_pairs();
      if (!pairs.empty()) {
        const auto& chosen = pairs[static_cast<size_t>(rng_.next_below(pairs.size()))];
        S3 g = S3::e();
        if (rng_.next_bernoulli(w_transposition)) {
          const std::array<S3, 3> cls = {S3::t12(), S3::t13(), S3::t23()};
          g = cls[static_cast<size_t>(rng_.next_below(3))];
        } else {
          const std::array<S3, 2> cls = {S3::c123(), S3::c132()};
          g = cls[static_cast<size_t>(rng_.next_below(2))];
        }
        create_pair(g, chosen[0], chosen[1], chosen[2], chosen[3], /*stray=*/true);
      }
    }
    // Random walks, in id order. Blocked directions waste the draw.
    static constexpr std::array<std::array<int, 2>, 4> dirs = {{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
    const int population = static_cast<int>(anyons_.size());
    for (int id = 0; id < population; ++id) {
      if (!anyons_[id].alive || !anyons_[id].stray) continue;
      const auto& d = dirs[static_cast<size_t>(rng_.next_below(4))];
      if (vacant(anyons_[id].x + d[0], anyons_[id].y + d[1])) move_anyon(id, d[0], d[1]);
    }
    ++clock_;
  }

  struct SweepReport {
    int fused_to_vacuum = 0;
    int residuals = 0;
    int wrong_pairs = 0;
    int abandoned = 0;
  };

  // Repeatedly finds the closest stray pair with inverse fluxes within the
  // given lattice distance (ties by lowest id pair), walks the two together
  // along shortest paths and fuses them. Pairs whose approach is blocked are
  // abandoned for this sweep. Computational (non-stray) anyons are left to
  // the computation.
  SweepReport sweep(int radius) {
    if (radius < 1) throw std::invalid_argument("sweep radius must be >= 1");
    SweepReport rep;
    std::vector<std::pair<int, int>> abandoned;
    for (;;) {
      int best_a = -1, best_b = -1, best_dist = std::numeric_limits<int>::max();
      for (size_t i = 0; i < anyons_.size(); ++i) {
        const auto& a = anyons_[i];
        if (!a.alive || !a.stray) continue;
        for (size_t j = i + 1; j < anyons_.size(); ++j) {
          const auto& b = anyons_[j];
          if (!b.alive || !b.stray) continue;
          if (!multiply(a.flux, b.flux).is_identity()) continue;
          const int dist = std::abs(a.x - b.x) + std::abs(a.y - b.y);
          if (dist > radius) continue;
          const auto key = std::make_pair(a.id, b.id);
          if (std::find(abandoned.begin(), abandoned.end(), key) != abandoned.end())
            continue;
          if (dist < best_dist) {
            best_dist = dist;
            best_a = a.id;
            best_b = b.id;
          }
        }
      }
      if (best_a < 0) break;
      if (!walk_together(best_a, best_b)) {
        abandoned.emplace_back(best_a, best_b);
        ++rep.abandoned;
        continue;
      }
      const FuseResult f = fuse(best_a, best_b);
      if (f.vacuum)
        ++rep.fused_to_vacuum;
      else
        ++rep.residuals;
      if (f.wrong_pair) ++rep.wrong_pairs;
    }
    return rep;
  }

  // Canonical dump used for replay comparison.
  std::string serialize() const {
    std::ostringstream os;
    os << "grid " << l_ << "\nnext_id " << next_id_ << "\n";
    for (const auto& a : anyons_) {
      if (!a.alive) continue;
      os << "anyon " << a.id << ' ' << a.flux.name() << ' ' << a.x << ' ' << a.y << ' '
         << a.partner_id << ' ' << (a.stray ? 1 : 0) << "\n";
    }
    os << "total_flux " << total_flux().name() << "\n";
    return os.str();
  }

  // Rebuilds a state by applying a recorded event sequence; no randomness is
  // consumed, so the result is byte-identical to the live run.
  static DoubleState replay(int grid_l, const std::vector<QDEvent>& events) {
    DoubleState st(grid_l, 0);
    for (const auto& ev : events) {
      switch (ev.kind) {
        case QDEvent::Kind::Create: {
          const auto ids = st.create_pair(S3(ev.flux), ev.ax, ev.ay, ev.bx, ev.by, ev.stray);
          if (ids.first != ev.a || ids.second != ev.b)
            throw std::runtime_error("replay id mismatch");
          break;
        }
        case QDEvent::Kind::Move:
          st.move_anyon(ev.a, ev.ax, ev.ay);
          break;
        case QDEvent::Kind::Braid:
          st.braid(ev.a, ev.b);
          break;
        case QDEvent::Kind::Fuse:
          st.fuse(ev.a, ev.b);
          break;
      }
    }
    return st;
  }

 private:
  FluxAnyon& mutable_anyon(int id) {
    if (id < 0 || id >= static_cast<int>(anyons_.size()) || !anyons_[id].alive)
      throw std::invalid_argument("no such anyon");
    return anyons_[id];
  }

  static bool order_less(const FluxAnyon& a, const FluxAnyon& b) {
    return a.x != b.x ? a.x < b.x : a.y > b.y;
  }

  std::vector<int> ordered_ids() const {
    std::vector<int> ids;
    for (const auto& a : anyons_)
      if (a.alive) ids.push_back(a.id);
    std::sort(ids.begin(), ids.end(), [&](int p, int q) {
      return order_less(anyons_[p], anyons_[q]);
    });
    return ids;
  }

  // Product of fluxes strictly between two anyons in the spatial order.
  S3 between_product(int first_id, int second_id) const {
    const FluxAnyon& lo = anyons_[first_id];
    const FluxAnyon& hi = anyons_[second_id];
    const FluxAnyon& first = order_less(lo, hi) ? lo : hi;
    const FluxAnyon& second = order_less(lo, hi) ? hi : lo;
    S3 acc = S3::e();
    for (int id : ordered_ids()) {
      const FluxAnyon& r = anyons_[id];
      if (r.id == first.id || r.id == second.id) continue;
      if (order_less(first, r) && order_less(r, second)) acc = multiply(acc, r.flux);
    }
    return acc;
  }

  void remove_anyon(FluxAnyon& a) {
    occupant_[a.y * l_ + a.x] = -1;
    a.alive = false;
  }

  void apply_move(FluxAnyon& m, int nx, int ny) {
    const int ox = m.x, oy = m.y;
    if (nx > ox) {
      sweep_column(m, ox, +1);
      cross_column(m, nx, +1);
    } else if (nx < ox) {
      cross_column(m, ox, -1);
    }
    occupant_[oy * l_ + ox] = -1;
    m.x = nx;
    m.y = ny;
    occupant_[ny * l_ + nx] = m.id;
    if (nx < ox) sweep_column(m, nx, -1);
  }

  // The mover crosses the cuts of every anyon above its row in the given
  // column: flux -> G^-1 flux G moving right, G flux G^-1 moving left, where
  // G is the top-down product of the crossed fluxes.
  void cross_column(FluxAnyon& m, int col, int direction) {
    std::vector<int> above;
    for (const auto& b : anyons_)
      if (b.alive && b.id != m.id && b.x == col && b.y > m.y) above.push_back(b.id);
    if (above.empty()) return;
    std::sort(above.begin(), above.end(),
              [&](int p, int q) { return anyons_[p].y > anyons_[q].y; });
    S3 g = S3::e();
    for (int id : above) g = multiply(g, anyons_[id].flux);
    m.flux = direction > 0 ? multiply(multiply(inverse(g), m.flux), g)
                           : multiply(multiply(g, m.flux), inverse(g));
  }

  // The mover's own cut sweeps over every anyon below its row in the given
  // column: their fluxes are conjugated by the mover's current flux.
  void sweep_column(const FluxAnyon& m, int col, int direction) {
    for (auto& c : anyons_) {
      if (!c.alive || c.id == m.id || c.x != col || c.y >= m.y) continue;
      c.flux = direction > 0
                   ? multiply(multiply(m.flux, c.flux), inverse(m.flux))
                   : multiply(multiply(inverse(m.flux), c.flux), m.flux);
    }
  }

  static std::array<std::pair<int, int>, 8> braid_ring(int tx, int ty) {
    return {{{tx - 1, ty - 1},
             {tx, ty - 1},
             {tx + 1, ty - 1},
             {tx + 1, ty},
             {tx + 1, ty + 1},
             {tx, ty + 1},
             {tx - 1, ty + 1},
             {tx - 1, ty}}};
  }

  void execute_ring(FluxAnyon& m, const std::array<std::pair<int, int>, 8>& ring,
                    int start) {
    for (int step = 1; step <= 8; ++step) {
      const auto [nx, ny] = ring[(start + step) % 8];
      apply_move(m, nx, ny);
    }
  }

  std::vector<std::array<int, 4>> vacant_adjacent_pairs() const {
    std::vector<std::array<int, 4>> pairs;
    for (int y = 0; y < l_; ++y)
      for (int x = 0; x < l_; ++x) {
        if (occupant(x, y) >= 0) continue;
        if (x + 1 < l_ && occupant(x + 1, y) < 0) pairs.push_back({x, y, x + 1, y});
        if (y + 1 < l_ && occupant(x, y + 1) < 0) pairs.push_back({x, y, x, y + 1});
      }
    return pairs;
  }

  // Alternates single steps of b toward a (and a toward b) until adjacent,
  // taking only distance-reducing moves. Returns false when blocked.
  bool walk_together(int id_a, int id_b) {
    int guard = 4 * l_ * l_;
    while (guard-- > 0) {
      const FluxAnyon& a = anyons_[id_a];
      const FluxAnyon& b = anyons_[id_b];
      if (std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1) return true;
      if (step_toward(id_b, a.x, a.y)) continue;
      if (step_toward(id_a, b.x, b.y)) continue;
      return false;
    }
    return false;
  }

  bool step_toward(int id, int tx, int ty) {
    FluxAnyon& m = anyons_[id];
    const int dx = tx - m.x, dy = ty - m.y;
    std::array<std::array<int, 2>, 2> tries{};
    int n_tries = 0;
    if (std::abs(dx) >= std::abs(dy) && dx != 0) {
      tries[n_tries++] = {dx > 0 ? 1 : -1, 0};
      if (dy != 0) tries[n_tries++] = {0, dy > 0 ? 1 : -1};
    } else if (dy != 0) {
      tries[n_tries++] = {0, dy > 0 ? 1 : -1};
      if (dx != 0) tries[n_tries++] = {dx > 0 ? 1 : -1, 0};
    }
    for (int i = 0; i < n_tries; ++i) {
      const int nx = m.x + tries[i][0], ny = m.y + tries[i][1];
      if (vacant(nx, ny)) {
        move_anyon(id, tries[i][0], tries[i][1]);
        return true;
      }
    }
    return false;
  }

  int l_;
  RandomStream rng_;
  std::vector<FluxAnyon> anyons_;  // indexed by id; fused anyons stay, marked dead
  std::vector<int> occupant_;
  std::vector<QDEvent> log_;
  int next_id_ = 0;
  long clock_ = 0;
};

// ---- braiding-memory experiment ----

struct BraidingMemoryParams {
  int grid_l = 16;
  double p_pair = 0.01;
  int radius = 3;
  long n_trials = 2000;
  uint64_t seed = 0;
  double w_transposition = 0.5;
};

struct BraidingMemoryArm {
  bool swept = false;
  RateEstimate rate;
};

// Transport waypoints: a rectangle from (2,1) with margin 2, traversed once.
inline std::vector<std::pair<int, int>> memory_loop_path(int l) {
  std::vector<std::pair<int, int>> path;
  const int x0 = 2, y0 = 1, x1 = l - 2, y1 = l - 2;
  for (int x = x0 + 1; x <= x1; ++x) path.emplace_back(x, y0);
  for (int y = y0 + 1; y <= y1; ++y) path.emplace_back(x1, y);
  for (int x = x1 - 1; x >= x0; --x) path.emplace_back(x, y1);
  for (int y = y1 - 1; y >= y0; --y) path.emplace_back(x0, y);
  return path;
}

// One trial: create a logical (12) pair, carry one member around the loop
// while noise and (optionally) sweeping run, and report whether its flux
// came back changed. Returns true on failure.
inline bool braiding_memory_trial(const BraidingMemoryParams& p, bool sweep_enabled,
                                  uint64_t stream_key, DoubleState* out_state = nullptr) {
  if (p.grid_l < 8) throw std::invalid_argument("memory experiment needs L >= 8");
  DoubleState st(p.grid_l, stream_key);
  const auto [anchor_id, mover_id] = st.create_pair(S3::t12(), 1, 1, 2, 1, false);
  (void)anchor_id;
  const auto path = memory_loop_path(p.grid_l);
  size_t next_waypoint = 0;
  long stuck_guard = 64 * static_cast<long>(path.size());
  while (next_waypoint < path.size() && stuck_guard-- > 0) {
    st.noise_step(p.p_pair, p.w_transposition);
    if (sweep_enabled) st.sweep(p.radius);
    const auto& m = st.anyon(mover_id);
    const auto [wx, wy] = path[next_waypoint];
    const int dx = wx - m.x, dy = wy - m.y;
    const int occ = st.occupant(wx, wy);
    if (occ >= 0) {
      // Ask the blocking stray to step aside; wait another tick if it cannot.
      static constexpr std::array<std::array<int, 2>, 4> dirs = {
          {{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
      for (const auto& d : dirs) {
        if (st.vacant(wx + d[0], wy + d[1])) {
          st.move_anyon(occ, d[0], d[1]);
          break;
        }
      }
      continue;
    }
    st.move_anyon(mover_id, dx, dy);
    ++next_waypoint;
  }
  const bool failed = !(st.anyon(mover_id).flux == S3::t12()) || next_waypoint < path.size();
  if (out_state) *out_state = std::move(st);
  return failed;
}

inline BraidingMemoryArm braiding_memory_arm(const BraidingMemoryParams& p,
                                             bool sweep_enabled) {
  BraidingMemoryArm arm;
  arm.swept = sweep_enabled;
  long failures = 0;
  for (long i = 0; i < p.n_trials; ++i)
    failures += braiding_memory_trial(p, sweep_enabled, p.seed + static_cast<uint64_t>(i));
  const WilsonInterval w = wilson_interval(failures, p.n_trials);
  arm.rate.n_trials = p.n_trials;
  arm.rate.failures = failures;
  arm.rate.estimate = w.center;
  arm.rate.ci_low = w.low;
  arm.rate.ci_high = w.high;
  return arm;
}

}  // namespace ftlab
