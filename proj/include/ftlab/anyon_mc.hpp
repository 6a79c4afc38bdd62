#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ftlab/lattice.hpp"
#include "ftlab/rng.hpp"
#include "ftlab/stats.hpp"

namespace ftlab {

struct MCParams {
  double p_create = 0.0;  // pair-creation probability per eligible edge per sweep
  double p_hop = 0.0;     // per-defect probability of attempting a move per sweep
  double bias_q = 0.0;    // probability a hop is aimed at the nearest partner
  int bias_radius = 1;    // lattice-distance cutoff for the attraction
  long t_max = 0;
  uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_create) || !prob(p_hop) || !prob(bias_q))
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    if (bias_radius < 1) throw std::invalid_argument("bias radius must be >= 1");
    if (t_max < 0) throw std::invalid_argument("t_max must be nonnegative");
  }
};

struct TrialOutcome {
  bool failed = false;
  long failure_time = -1;  // set iff failed
  int max_defect_count = 0;
  bool forced_cleanup = false;  // defects force-annihilated at t_max
};

// Stochastic toric-code memory: cumulative error chain, cached defects and
// incrementally tracked winding bits. X-type and Z-type processes run
// independently; defects of one species hop on the primal lattice, the other
// on the dual.
class AnyonState {
 public:
  AnyonState(const ToricLattice& lat, uint64_t stream_key)
      : lat_(&lat),
        chain_(lat.n_edges()),
        rng_(stream_key),
        parity_{std::vector<uint8_t>(lat.n_vertices(), 0),
                std::vector<uint8_t>(lat.n_faces(), 0)} {}

  const ToricLattice& lattice() const { return *lat_; }
  const PauliChain& chain() const { return chain_; }
  long clock() const { return clock_; }
  int defect_count() const {
    return static_cast<int>(defects_[0].size() + defects_[1].size());
  }
  const std::vector<int>& vertex_defects() const { return defects_[0]; }
  const std::vector<int>& face_defects() const { return defects_[1]; }
  HomologyClass winding() const { return winding_; }
  bool vacuum() const { return defects_[0].empty() && defects_[1].empty(); }

  // Species 0: Z errors (vertex defects); species 1: X errors (face defects).
  void toggle_edge(int species, int e) {
    if (species == 0) {
      chain_.z_part.flip(e);
      if (lat_->seam_v().test(e)) winding_.wz_v = !winding_.wz_v;
      if (lat_->seam_h().test(e)) winding_.wz_h = !winding_.wz_h;
      for (int v : lat_->edge_vertices(e)) flip_site(0, v);
    } else {
      chain_.x_part.flip(e);
      if (lat_->dual_seam_v().test(e)) winding_.wx_v = !winding_.wx_v;
      if (lat_->dual_seam_h().test(e)) winding_.wx_h = !winding_.wx_h;
      for (int f : lat_->edge_faces(e)) flip_site(1, f);
    }
  }

  // One full sweep: pair creation, then biased/unbiased defect hops.
  void step(const MCParams& params) {
    for (int species = 0; species < 2; ++species) {
      create_sweep(species, params.p_create);
      hop_sweep(species, params);
    }
    ++clock_;
  }

  // Pairs up remaining defects greedily (closest pair first) and annihilates
  // each pair along a deterministic shortest path.
  void force_cleanup() {
    for (int species = 0; species < 2; ++species) {
      while (!defects_[species].empty()) {
        const auto& d = defects_[species];
        int best_a = -1, best_b = -1, best_dist = std::numeric_limits<int>::max();
        for (size_t i = 0; i < d.size(); ++i)
          for (size_t j = i + 1; j < d.size(); ++j) {
            const int dist = lat_->site_distance(d[i], d[j]);
            if (dist < best_dist) {
              best_dist = dist;
              best_a = d[i];
              best_b = d[j];
            }
          }
        annihilate_along_path(species, best_a, best_b);
      }
    }
  }

  // Full recomputation from the chain; used by consistency checks.
  bool cached_syndrome_consistent() const {
    DefectSet s = lat_->syndrome(chain_);
    return s.vertex_defects == defects_[0] && s.face_defects == defects_[1];
  }
  bool winding_consistent_at_vacuum() const {
    return lat_->homology_class(chain_) == winding_;
  }

  RandomStream& rng() { return rng_; }

 private:
  void flip_site(int species, int site) {
    auto& par = parity_[species];
    auto& list = defects_[species];
    auto it = std::lower_bound(list.begin(), list.end(), site);
    if (par[site]) {
      par[site] = 0;
      list.erase(it);
    } else {
      par[site] = 1;
      list.insert(it, site);
    }
  }

  bool endpoints_defect_free(int species, int e) const {
    if (species == 0) {
      const auto& vs = lat_->edge_vertices(e);
      return !parity_[0][vs[0]] && !parity_[0][vs[1]];
    }
    const auto& fs = lat_->edge_faces(e);
    return !parity_[1][fs[0]] && !parity_[1][fs[1]];
  }

  // Scans the edges in index order; each edge fires with probability p and a
  // firing edge toggles only if both its endpoints are currently defect-free.
  // Geometric gaps reproduce the per-edge Bernoulli draws without touching
  // non-firing edges.
  void create_sweep(int species, double p) {
    if (p <= 0.0) return;
    const uint64_t n = static_cast<uint64_t>(lat_->n_edges());
    uint64_t pos = rng_.next_geometric_skip(p);
    while (pos < n) {
      const int e = static_cast<int>(pos);
      if (endpoints_defect_free(species, e)) toggle_edge(species, e);
      const uint64_t gap = rng_.next_geometric_skip(p);
      if (gap >= n - pos) break;
      pos += 1 + gap;
    }
  }

  const std::array<int, 4>& incident_edges(int species, int site) const {
    return species == 0 ? lat_->star(site) : lat_->bound(site);
  }
  int other_endpoint(int species, int e, int site) const {
    const auto& ends = species == 0 ? lat_->edge_vertices(e) : lat_->edge_faces(e);
    return ends[0] == site ? ends[1] : ends[0];
  }

  // Nearest other defect within the given radius; ties broken by lowest site
  // index (the list is sorted). Returns -1 when none qualifies.
  int nearest_partner(int species, int site, int radius) const {
    int best = -1, best_dist = radius + 1;
    for (int other : defects_[species]) {
      if (other == site) continue;
      const int dist = lat_->site_distance(site, other);
      if (dist < best_dist) {
        best_dist = dist;
        best = other;
      }
    }
    return best;
  }

  // The incident edge whose far endpoint is closest to the target; ties by
  // lowest edge index.
  int greedy_edge_toward(int species, int site, int target) const {
    const auto& edges = incident_edges(species, site);
    int best_e = -1, best_dist = std::numeric_limits<int>::max();
    std::array<int, 4> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    for (int e : sorted) {
      const int far = other_endpoint(species, e, site);
      const int dist = lat_->site_distance(far, target);
      if (dist < best_dist) {
        best_dist = dist;
        best_e = e;
      }
    }
    return best_e;
  }

  void hop_sweep(int species, const MCParams& params) {
    if (params.p_hop <= 0.0 || defects_[species].empty()) return;
    const std::vector<int> snapshot = defects_[species];  // ascending site order
    for (int site : snapshot) {
      if (!parity_[species][site]) continue;  // annihilated earlier this sweep
      if (!rng_.next_bernoulli(params.p_hop)) continue;
      int e = -1;
      if (params.bias_q > 0.0 && rng_.next_bernoulli(params.bias_q)) {
        const int target = nearest_partner(species, site, params.bias_radius);
        if (target >= 0) e = greedy_edge_toward(species, site, target);
      }
      if (e < 0) {
        std::array<int, 4> sorted = incident_edges(species, site);
        std::sort(sorted.begin(), sorted.end());
        e = sorted[static_cast<size_t>(rng_.next_below(4))];
      }
      toggle_edge(species, e);
    }
  }

  void annihilate_along_path(int species, int from, int to) {
    const int k = lat_->k();
    int x = from % k, y = from / k;
    const int tx = to % k, ty = to / k;
    auto signed_delta = [&](int a, int b) {
      const int fwd = lat_->mod(b - a);
      return fwd <= k - fwd ? fwd : fwd - k;  // ties resolved forward
    };
    int dx = signed_delta(x, tx), dy = signed_delta(y, ty);
    while (dx != 0) {
      const int sgn = dx > 0 ? 1 : -1;
      const int e = species == 0
                        ? lat_->edge_index(sgn > 0 ? x : lat_->mod(x - 1), y, Orient::H)
                        : lat_->edge_index(sgn > 0 ? lat_->mod(x + 1) : x, y, Orient::V);
      toggle_edge(species, e);
      x = lat_->mod(x + sgn);
      dx -= sgn;
    }
    while (dy != 0) {
      const int sgn = dy > 0 ? 1 : -1;
      const int e = species == 0
                        ? lat_->edge_index(x, sgn > 0 ? y : lat_->mod(y - 1), Orient::V)
                        : lat_->edge_index(x, sgn > 0 ? lat_->mod(y + 1) : y, Orient::H);
      toggle_edge(species, e);
      y = lat_->mod(y + sgn);
      dy -= sgn;
    }
  }

  const ToricLattice* lat_;
  PauliChain chain_;
  RandomStream rng_;
  std::array<std::vector<uint8_t>, 2> parity_;
  std::array<std::vector<int>, 2> defects_;  // sorted site indices
  HomologyClass winding_;
  long clock_ = 0;
};

// Runs one trial to t_max. Failure is decided at the first vacuum time with
// nontrivial winding, or after forced cleanup of leftover defects at t_max.
inline TrialOutcome run_trial(const ToricLattice& lat, const MCParams& params,
                              uint64_t stream_key) {
  params.validate();
  AnyonState state(lat, stream_key);
  TrialOutcome out;
  for (long t = 1; t <= params.t_max; ++t) {
    state.step(params);
    out.max_defect_count = std::max(out.max_defect_count, state.defect_count());
    if (state.vacuum() && !state.winding().trivial()) {
      out.failed = true;
      out.failure_time = t;
      return out;
    }
  }
  if (!state.vacuum()) {
    state.force_cleanup();
    out.forced_cleanup = true;
    if (!state.winding().trivial()) {
      out.failed = true;
      out.failure_time = params.t_max;
    }
  }
  return out;
}

inline TrialOutcome run_trial(int k, const MCParams& params) {
  ToricLattice lat(k);
  return run_trial(lat, params, params.seed);
}

// Serial failure-rate estimate; trial i uses stream key seed + i. The harness
// parallelizes over trial ranges with the same keying, so worker count never
// changes the outcome.
inline RateEstimate logical_error_rate(const ToricLattice& lat, const MCParams& params,
                                       long n_trials) {
  if (n_trials < 1) throw std::invalid_argument("need at least one trial");
  RateEstimate r;
  r.n_trials = n_trials;
  double failure_time_sum = 0.0;
  for (long i = 0; i < n_trials; ++i) {
    const TrialOutcome out = run_trial(lat, params, params.seed + static_cast<uint64_t>(i));
    if (out.failed) {
      ++r.failures;
      failure_time_sum += static_cast<double>(out.failure_time);
    }
  }
  const WilsonInterval w = wilson_interval(r.failures, r.n_trials);
  r.estimate = w.center;
  r.ci_low = w.low;
  r.ci_high = w.high;
  if (r.failures > 0) r.mean_failure_time = failure_time_sum / static_cast<double>(r.failures);
  return r;
}

}  // namespace ftlab
