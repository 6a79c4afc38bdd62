#include "ftlab/quantum_double.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ftlab;

namespace {

// Clean braid configuration: the target parked at (5,3) with its partner far
// right, the mover dropped onto the ring at (4,4) with its partner far up the
// same column. No foreign cut touches the ring.
struct BraidFixture {
  DoubleState st{12, 0};
  int mover = -1, target = -1;

  BraidFixture(S3 g1, S3 g2) {
    auto [t_id, t_partner] = st.create_pair(g2, 8, 3, 9, 3);
    (void)t_partner;
    for (int i = 0; i < 3; ++i) st.move_anyon(t_id, -1, 0);  // park at (5,3)
    auto [m_id, m_partner] = st.create_pair(g1, 4, 8, 4, 9);
    (void)m_partner;
    for (int i = 0; i < 4; ++i) st.move_anyon(m_id, 0, -1);  // drop to (4,4)
    mover = m_id;
    target = t_id;
    EXPECT_EQ(st.anyon(mover).flux, g1);
    EXPECT_EQ(st.anyon(target).flux, g2);
  }
};

std::vector<S3> nontrivial() {
  return {S3::t12(), S3::t13(), S3::t23(), S3::c123(), S3::c132()};
}

}  // namespace

TEST(DoubleState, CreatePairExamples) {
  DoubleState st(8, 0);
  const auto [a, b] = st.create_pair(S3::t12(), 2, 2, 3, 2);
  EXPECT_EQ(st.anyon(a).flux, S3::t12());
  EXPECT_EQ(st.anyon(b).flux, S3::t12());  // transpositions are self-inverse
  EXPECT_EQ(st.anyon(a).partner_id, b);
  EXPECT_TRUE(st.total_flux().is_identity());

  const auto [c, d] = st.create_pair(S3::c123(), 5, 5, 5, 6);
  EXPECT_EQ(st.anyon(c).flux, S3::c123());
  EXPECT_EQ(st.anyon(d).flux, S3::c132());
  EXPECT_TRUE(multiply(st.anyon(c).flux, st.anyon(d).flux).is_identity());
  EXPECT_TRUE(st.total_flux().is_identity());
}

TEST(DoubleState, CreatePairPreconditions) {
  DoubleState st(8, 0);
  st.create_pair(S3::t12(), 2, 2, 3, 2);
  EXPECT_THROW(st.create_pair(S3::t12(), 2, 2, 2, 3), std::invalid_argument);  // occupied
  EXPECT_THROW(st.create_pair(S3::e(), 5, 5, 5, 6), std::invalid_argument);    // vacuum
  EXPECT_THROW(st.create_pair(S3::t12(), 5, 5, 6, 6), std::invalid_argument);  // diagonal
}

TEST(DoubleState, BraidConjugatesMoverForAllNontrivialPairs) {
  for (S3 g1 : nontrivial()) {
    for (S3 g2 : nontrivial()) {
      BraidFixture fx(g1, g2);
      const int sx = fx.st.anyon(fx.mover).x, sy = fx.st.anyon(fx.mover).y;
      fx.st.braid(fx.mover, fx.target);
      EXPECT_EQ(fx.st.anyon(fx.mover).flux, conjugate_by(g1, g2))
          << g1.name() << " around " << g2.name();
      EXPECT_EQ(fx.st.anyon(fx.mover).x, sx);
      EXPECT_EQ(fx.st.anyon(fx.mover).y, sy);
      EXPECT_TRUE(fx.st.total_flux().is_identity());
      EXPECT_EQ(fx.st.anyon(fx.mover).flux.conjugacy_class(), g1.conjugacy_class());
    }
  }
}

TEST(DoubleState, BraidAroundCommutingFluxLeavesMoverUnchanged) {
  BraidFixture fx(S3::c123(), S3::c132());
  fx.st.braid(fx.mover, fx.target);
  EXPECT_EQ(fx.st.anyon(fx.mover).flux, S3::c123());
  EXPECT_EQ(fx.st.anyon(fx.target).flux, S3::c132());
}

// Around an unchanged target (commuting fluxes keep it fixed) two loops
// compose to conjugation by the square.
TEST(DoubleState, DoubleBraidAroundUnchangedTargetIsConjugationBySquare) {
  BraidFixture fx(S3::c132(), S3::c123());
  const S3 g1 = fx.st.anyon(fx.mover).flux;
  const S3 g2 = fx.st.anyon(fx.target).flux;
  fx.st.braid(fx.mover, fx.target);
  EXPECT_EQ(fx.st.anyon(fx.target).flux, g2);  // unchanged, as presumed
  fx.st.braid(fx.mover, fx.target);
  EXPECT_EQ(fx.st.anyon(fx.mover).flux, conjugate_by(g1, multiply(g2, g2)));
}

// The full monodromy moves the pair product nowhere even when the fluxes do
// not commute; the encircled anyon's base-framed label absorbs the frame
// change and stays in its conjugacy class.
TEST(DoubleState, BraidConservesTotalFluxAndClasses) {
  BraidFixture fx(S3::t12(), S3::t13());
  fx.st.braid(fx.mover, fx.target);
  EXPECT_EQ(fx.st.anyon(fx.mover).flux, S3::t23());  // (13)^-1 (12)(13)
  EXPECT_EQ(fx.st.anyon(fx.target).flux.conjugacy_class(), S3::t13().conjugacy_class());
  EXPECT_TRUE(fx.st.total_flux().is_identity());
}

TEST(DoubleState, BraidPreconditions) {
  DoubleState st(10, 0);
  const auto [m, mp] = st.create_pair(S3::t12(), 2, 5, 1, 5);
  (void)mp;
  const auto [t, tp] = st.create_pair(S3::t13(), 3, 5, 3, 6);
  EXPECT_THROW(st.braid(m, m), std::invalid_argument);
  EXPECT_THROW(st.braid(m, 99), std::invalid_argument);
  // (3,6) sits on the ring around (3,5): blocked path.
  (void)tp;
  EXPECT_THROW(st.braid(m, t), std::invalid_argument);
  // Target on the boundary: the ring leaves the grid.
  DoubleState edge(8, 0);
  const auto [em, et] = edge.create_pair(S3::t12(), 1, 0, 1, 1);
  EXPECT_THROW(edge.braid(et, em), std::invalid_argument);
}

TEST(DoubleState, FuseExamples) {
  DoubleState st(8, 0);
  const auto [a, b] = st.create_pair(S3::t12(), 2, 2, 3, 2);
  const FuseResult r1 = st.fuse(a, b);
  EXPECT_TRUE(r1.vacuum);
  EXPECT_FALSE(r1.wrong_pair);
  EXPECT_EQ(st.alive_count(), 0);

  const auto [c, d] = st.create_pair(S3::c123(), 2, 2, 3, 2);
  const FuseResult r2 = st.fuse(c, d);
  EXPECT_TRUE(r2.vacuum);
  EXPECT_TRUE(st.total_flux().is_identity());
}

TEST(DoubleState, FuseLeavesResidualParticle) {
  DoubleState st(10, 0);
  // id0 (12) at (2,3) with partner off to the left; id2 (13) at (2,2).
  const auto [a, ap] = st.create_pair(S3::t12(), 2, 3, 1, 3);
  (void)ap;
  const auto [c, cp] = st.create_pair(S3::t13(), 2, 2, 3, 2);
  (void)cp;
  const FuseResult r = st.fuse(a, c);
  EXPECT_FALSE(r.vacuum);
  EXPECT_TRUE(r.wrong_pair);
  EXPECT_EQ(r.residual_flux, S3::c132());  // (12)(13), spatially-first factor left
  EXPECT_EQ(st.anyon(r.residual_id).flux, S3::c132());
  EXPECT_EQ(st.anyon(r.residual_id).x, 2);
  EXPECT_EQ(st.anyon(r.residual_id).y, 3);
  EXPECT_TRUE(st.total_flux().is_identity());
}

TEST(DoubleState, FuseRequiresAdjacency) {
  DoubleState st(8, 0);
  const auto [a, b] = st.create_pair(S3::t12(), 2, 2, 3, 2);
  st.move_anyon(b, 1, 0);
  st.move_anyon(b, 1, 0);
  EXPECT_THROW(st.fuse(a, b), std::invalid_argument);
}

TEST(DoubleState, NoiseStepKeepsTotalFluxTrivialAndIsDeterministic) {
  DoubleState a(10, 42), b(10, 42);
  for (int t = 0; t < 200; ++t) {
    a.noise_step(0.4, 0.5);
    b.noise_step(0.4, 0.5);
    ASSERT_TRUE(a.total_flux().is_identity());
  }
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_GT(a.alive_count(), 0);
}

TEST(DoubleState, NoiseStepWithZeroRateOnlyWalksExistingStrays) {
  DoubleState st(8, 5);
  st.noise_step(0.0, 0.5);
  EXPECT_EQ(st.alive_count(), 0);
  EXPECT_EQ(st.clock(), 1);
}

TEST(Sweep, AnnihilatesAdjacentInversePair) {
  DoubleState st(8, 0);
  st.create_pair(S3::c123(), 2, 2, 3, 2, /*stray=*/true);
  const auto rep = st.sweep(2);
  EXPECT_EQ(rep.fused_to_vacuum, 1);
  EXPECT_EQ(st.alive_count(), 0);
}

TEST(Sweep, RespectsRadiusCutoff) {
  DoubleState st(12, 0);
  const auto [a, b] = st.create_pair(S3::t12(), 2, 2, 3, 2, /*stray=*/true);
  (void)a;
  for (int i = 0; i < 5; ++i) st.move_anyon(b, 1, 0);  // now 6 apart
  const auto rep = st.sweep(3);
  EXPECT_EQ(rep.fused_to_vacuum, 0);
  EXPECT_EQ(st.alive_count(), 2);
}

TEST(Sweep, LeavesComputationalAnyonsAlone) {
  DoubleState st(8, 0);
  st.create_pair(S3::t12(), 2, 2, 3, 2, /*stray=*/false);
  const auto rep = st.sweep(3);
  EXPECT_EQ(rep.fused_to_vacuum, 0);
  EXPECT_EQ(st.alive_count(), 2);
}

// Four identical transposition strays: cross pairing still reaches vacuum,
// and the mismatched partner ids are flagged.
TEST(Sweep, WrongPairingReachesVacuumAndIsLogged) {
  DoubleState st(12, 0);
  const auto [a0, a1] = st.create_pair(S3::t12(), 2, 2, 3, 2, /*stray=*/true);
  (void)a0;
  for (int i = 0; i < 6; ++i) st.move_anyon(a1, 1, 0);  // a1 to (9,2)
  const auto [b0, b1] = st.create_pair(S3::t12(), 3, 2, 4, 2, /*stray=*/true);
  (void)b0;
  for (int i = 0; i < 4; ++i) st.move_anyon(b1, 1, 0);  // b1 to (8,2)
  const auto rep = st.sweep(2);
  EXPECT_EQ(rep.fused_to_vacuum, 2);
  EXPECT_EQ(rep.wrong_pairs, 2);
  EXPECT_EQ(st.alive_count(), 0);
  EXPECT_TRUE(st.total_flux().is_identity());

  // Wrong-pair events appear in the log.
  int wrong = 0;
  for (const auto& ev : st.log())
    if (ev.kind == QDEvent::Kind::Fuse && ev.wrong_pair) ++wrong;
  EXPECT_EQ(wrong, 2);
}

// Randomized event soup: ordered total flux stays the identity after every
// event and the log replays to a byte-identical state.
TEST(DoubleState, FluxConservationAndReplayOverRandomizedEvents) {
  DoubleState st(16, 9001);
  RandomStream& rng = st.rng();
  int events = 0;
  while (events < 4000) {
    const double u = rng.next_double();
    if (u < 0.45) {
      st.noise_step(0.8, 0.5);
    } else if (u < 0.75) {
      // Random walk an arbitrary alive anyon.
      std::vector<int> alive;
      for (const auto& a : st.anyons())
        if (a.alive) alive.push_back(a.id);
      if (!alive.empty()) {
        const int id = alive[static_cast<size_t>(rng.next_below(alive.size()))];
        static constexpr std::array<std::array<int, 2>, 4> dirs = {
            {{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
        const auto& d = dirs[static_cast<size_t>(rng.next_below(4))];
        const auto& m = st.anyon(id);
        if (st.vacant(m.x + d[0], m.y + d[1])) st.move_anyon(id, d[0], d[1]);
      }
    } else if (u < 0.9) {
      // Fuse any adjacent alive pair, inverse or not.
      bool done = false;
      for (const auto& a : st.anyons()) {
        if (!a.alive || done) continue;
        for (const auto& b : st.anyons()) {
          if (!b.alive || b.id <= a.id) continue;
          if (std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1) {
            st.fuse(a.id, b.id);
            done = true;
            break;
          }
        }
      }
    } else {
      st.sweep(4);
    }
    ++events;
    ASSERT_TRUE(st.total_flux().is_identity()) << "after event " << events;
  }
  const DoubleState replayed = DoubleState::replay(16, st.log());
  EXPECT_EQ(replayed.serialize(), st.serialize());
}

TEST(DoubleState, ReplayOfEmptyLogIsInitialState) {
  const DoubleState st = DoubleState::replay(8, {});
  EXPECT_EQ(st.alive_count(), 0);
  EXPECT_TRUE(st.total_flux().is_identity());
}

TEST(BraidingMemory, NoNoiseMeansNoFailures) {
  BraidingMemoryParams p;
  p.grid_l = 12;
  p.p_pair = 0.0;
  p.radius = 2;
  p.n_trials = 5;
  p.seed = 3;
  for (bool swept : {false, true}) {
    const BraidingMemoryArm arm = braiding_memory_arm(p, swept);
    EXPECT_EQ(arm.rate.failures, 0);
  }
}

TEST(BraidingMemory, HeavyNoiseProducesFailuresWithoutSweeping) {
  BraidingMemoryParams p;
  p.grid_l = 12;
  p.p_pair = 0.5;
  p.radius = 3;
  p.n_trials = 40;
  p.seed = 17;
  const BraidingMemoryArm arm = braiding_memory_arm(p, /*sweep_enabled=*/false);
  EXPECT_GT(arm.rate.failures, 0);
}

TEST(BraidingMemory, TrialIsDeterministicPerKey) {
  BraidingMemoryParams p;
  p.grid_l = 12;
  p.p_pair = 0.3;
  p.radius = 2;
  p.seed = 5;
  DoubleState s1(12, 0), s2(12, 0);
  const bool f1 = braiding_memory_trial(p, true, 123, &s1);
  const bool f2 = braiding_memory_trial(p, true, 123, &s2);
  EXPECT_EQ(f1, f2);
  EXPECT_EQ(s1.serialize(), s2.serialize());
}
