#include <gtest/gtest.h>

#include "lfmsemi/lfm.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace lfmsemi;

namespace {

CVector vec(std::initializer_list<cplx> d) {
  CVector v(Index(d.size()));
  Index i = 0;
  for (cplx x : d) v(i++) = x;
  return v;
}

BallMap disc(cplx a, cplx b, cplx c, cplx d) {
  // (a z + b) / (c z + d): the C slot holds conj(c)
  return BallMap::make(CMatrix::Constant(1, 1, a), vec({b}), vec({std::conj(c)}), d);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST(Eval, Examples) {
  const BallMap id = BallMap::identity(2);
  const CVector z = vec({0.3, cplx(0, -0.4)});
  EXPECT_LE((eval(id, z) - z).norm(), 1e-15);
  const BallMap half = BallMap::make(CMatrix::Identity(2, 2) / 2.0, CVector::Zero(2), CVector::Zero(2), 1.0);
  EXPECT_LE((eval(half, vec({0.8, 0})) - vec({0.4, 0})).norm(), 1e-15);
  EXPECT_NEAR(std::abs(eval(disc(1, 0.5, 0.5, 1), vec({0}))(0) - 0.5), 0.0, 1e-15);
  EXPECT_EQ(kind_of([&] { eval(half, vec({1.5, 0})); }), ErrorKind::Domain);
}

TEST(Eval, PoleIsReported) {
  CMatrix h = CMatrix::Identity(2, 2);
  h(1, 0) = 1.0;
  h(1, 1) = -1.0;
  EXPECT_EQ(kind_of([&] { ProjectiveMap(h).apply(vec({1.0})); }), ErrorKind::Pole);
}

TEST(MakeBallMap, RejectsBadDenominator) {
  EXPECT_EQ(kind_of([] { disc(1, 0, 2, 1); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { disc(1, 0, 0, 0); }), ErrorKind::Domain);
  // 2z is not a self-map
  EXPECT_EQ(kind_of([] { disc(2, 0, 0, 1); }), ErrorKind::Domain);
}

TEST(Algebra, ComposeInverseConjugate) {
  const BallMap f = disc(1, 0.5, 0.5, 1);
  const BallMap fi = compose(f, BallMap::identity(1));
  EXPECT_LE((fi.homogeneous() - f.homogeneous()).norm(), 1e-14);

  const double r = 0.3;
  const BallMap inv = inverse(disc(1, r, r, 1));
  EXPECT_LE((inv.homogeneous() - disc(1, -r, -r, 1).homogeneous()).norm(), 1e-12);
  EXPECT_TRUE(compose(f, inverse(f)).is_identity(1e-9));

  corpus::Rng rng(1);
  const CMatrix u = corpus::random_unitary(rng, 3);
  const BallMap g = BallMap::linear(CMatrix::Identity(3, 3) / 2.0);
  const BallMap c = conjugate(g, BallMap::linear(u));
  for (int k = 0; k < 20; ++k) {
    const CVector z = corpus::random_ball_point(rng, 3, 0.95);
    EXPECT_LE((c.apply(z) - u * g.apply(u.adjoint() * z)).norm(), 1e-10);
  }
}

TEST(Algebra, AssociativityAndPointwiseCompose) {
  corpus::Rng r(2);
  const BallMap f = corpus::random_automorphism(r, 3), g = corpus::planted_elliptic_u0(r, 3, true).map,
               h = corpus::planted_parabolic(r, 3, false, true).map;
  for (int k = 0; k < 50; ++k) {
    const CVector z = corpus::random_ball_point(r, 3, 0.95);
    EXPECT_LE((compose(f, g).apply(z) - f.apply(g.apply(z))).norm(), 1e-10);
    EXPECT_LE((compose(compose(f, g), h).apply(z) - compose(f, compose(g, h)).apply(z)).norm(), 1e-9);
  }
}

TEST(Algebra, SingularInverse) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 0) = 1.0;
  EXPECT_EQ(kind_of([&] { inverse(ProjectiveMap(h)); }), ErrorKind::NotInvertible);
}

TEST(Cayley, Examples) {
  EXPECT_LE((cayley(vec({0, 0})) - vec({cplx(0, 1), 0})).norm(), 1e-15);
  const SiegelMap id = cayley_to_siegel(BallMap::identity(2));
  EXPECT_LE((id.homogeneous() - CMatrix::Identity(3, 3)).norm(), 1e-15);

  const BallMap f = disc(1, 0.5, 0.5, 1);
  const SiegelMap g = cayley_to_siegel(f);
  EXPECT_NEAR(std::abs(g.lambda() - 3.0), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(g.b()), 0.0, 1e-9);
  corpus::Rng r(3);
  for (int k = 0; k < 100; ++k) {
    const CVector z = corpus::random_ball_point(r, 1, 0.95);
    EXPECT_LE((g.apply(cayley(z)) - cayley(f.apply(z))).norm(), 1e-9 * std::max(1.0, cayley(z).norm()));
  }
}

TEST(Cayley, RoundTrip) {
  corpus::Rng r(4);
  for (int k = 0; k < 10; ++k) {
    const BallMap f = k % 2 ? corpus::planted_hyperbolic(r, 3, true).map : corpus::planted_parabolic(r, 3, true, true).map;
    const BallMap back = cayley_to_ball(cayley_to_siegel(f));
    for (int s = 0; s < 20; ++s) {
      const CVector z = corpus::random_ball_point(r, 3, 0.9);
      EXPECT_LE((back.apply(z) - f.apply(z)).norm(), 1e-9);
    }
  }
}

TEST(Cayley, EllipticHasNoSiegelForm) {
  EXPECT_EQ(kind_of([] { cayley_to_siegel(BallMap::linear(CMatrix::Identity(2, 2) / 2.0)); }), ErrorKind::Form);
}

TEST(FixedPoints, Examples) {
  const FixedPoints h = fixed_points(BallMap::linear(CMatrix::Identity(1, 1) / 2.0));
  ASSERT_EQ(h.interior.size(), 1u);
  EXPECT_LE(h.interior[0].norm(), 1e-12);
  EXPECT_TRUE(h.boundary.empty());

  const FixedPoints d = fixed_points(disc(1, 0.5, 0.5, 1));
  EXPECT_TRUE(d.interior.empty());
  const oracle::MobiusFixed m = oracle::mobius_fixed(1, 0.5, 0.5, 1);
  ASSERT_EQ(d.boundary.size(), m.points.size());
  for (const auto& p : m.points) {
    double best = 1e9;
    for (const auto& q : d.boundary) best = std::min(best, std::abs(q(0) - p));
    EXPECT_LE(best, 1e-9);
  }

  const FixedPoints u = fixed_points(BallMap::linear(CMatrix::Constant(1, 1, std::polar(1.0, 0.7))));
  ASSERT_EQ(u.interior.size(), 1u);
  EXPECT_TRUE(u.boundary.empty());
}

TEST(FixedPoints, MatchIteration) {
  corpus::Rng r(5);
  for (int k = 0; k < 10; ++k) {
    const BallMap f = corpus::conjugated(r, BallMap::linear(corpus::random_contraction(r, 3, 0.7)), true);
    const FixedPoints fp = fixed_points(f);
    ASSERT_EQ(fp.interior.size(), 1u);
    CVector z = corpus::random_ball_point(r, 3, 0.9);
    for (int it = 0; it < 400; ++it) z = f.apply(z);
    EXPECT_LE((z - fp.interior[0]).norm(), 1e-6);
  }
}

TEST(Classify, Examples) {
  const Classification e = classify(BallMap::linear(CMatrix::Identity(1, 1) / 2.0));
  EXPECT_EQ(e.kind, MapKind::Elliptic);
  EXPECT_LE(e.interior_fixed_points.at(0).norm(), 1e-12);

  const Classification h = classify(disc(1, 0.5, 0.5, 1));
  EXPECT_EQ(h.kind, MapKind::Hyperbolic);
  EXPECT_LE(std::abs((*h.dw_point)(0) - 1.0), 1e-9);
  EXPECT_NEAR(*h.delta, 1.0 / 3.0, 1e-9);

  const SiegelMap shift(1.0, CMatrix(0, 0), CVector(0), 1.0, CVector(0));
  const Classification p = classify(cayley_to_ball(shift));
  EXPECT_EQ(p.kind, MapKind::Parabolic);
  EXPECT_LE(std::abs((*p.dw_point)(0) - 1.0), 1e-9);
  EXPECT_NEAR(*p.delta, 1.0, 1e-6);

  EXPECT_EQ(kind_of([] { classify(BallMap::identity(2)); }), ErrorKind::DegenerateInput);
}

TEST(Classify, DeltaMatchesAngularDerivativeOracle) {
  corpus::Rng r(6);
  for (int k = 0; k < 10; ++k) {
    const BallMap f = corpus::planted_hyperbolic(r, 2, true).map;
    const Classification c = classify(f);
    ASSERT_EQ(c.kind, MapKind::Hyperbolic);
    // Re<d phi_w(w), w> equals delta at the Denjoy-Wolff point
    const double ad = oracle::angular_derivative(f.A(), f.B(), f.C(), f.D(), *c.dw_point);
    EXPECT_NEAR(*c.delta, ad, 1e-6);
  }
}

TEST(Classify, ConjugationInvariant) {
  corpus::Rng r(7);
  for (int k = 0; k < 12; ++k) {
    const BallMap f = k % 3 == 0   ? corpus::planted_hyperbolic(r, 3, false).map
                      : k % 3 == 1 ? corpus::planted_parabolic(r, 3, true, false).map
                                   : corpus::planted_elliptic_u0(r, 3, false).map;
    const Classification a = classify(f);
    const Classification b = classify(conjugate(f, corpus::random_automorphism(r, 3, 0.6)));
    EXPECT_EQ(a.kind, b.kind);
    if (a.delta) EXPECT_NEAR(*a.delta, *b.delta, 1e-6);
  }
}

TEST(UnitaryIndex, Examples) {
  EXPECT_EQ(unitary_index(BallMap::linear(CMatrix::Identity(1, 1) / 2.0)), 0);
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = std::polar(1.0, 0.4);
  a(1, 1) = 0.5;
  EXPECT_EQ(unitary_index(BallMap::linear(a)), 1);
  corpus::Rng r(8);
  EXPECT_EQ(unitary_index(BallMap::linear(corpus::random_unitary(r, 3))), 3);
  EXPECT_EQ(kind_of([] { unitary_index(disc(1, 0.5, 0.5, 1)); }), ErrorKind::Domain);
}

TEST(UnitaryIndex, ConstantAlongFixedSlice) {
  corpus::Rng r(9);
  CMatrix a = CMatrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = std::polar(1.0, 1.1);
  a(2, 2) = 0.4;
  const BallMap s = corpus::random_automorphism(r, 3, 0.5);
  const BallMap f = conjugate(BallMap::linear(a), s);
  const CVector z0 = s.apply(CVector::Zero(3)), z1 = s.apply(vec({0.6, 0, 0}));
  ASSERT_LE((f.apply(z1) - z1).norm(), 1e-10);
  EXPECT_EQ(unitary_index(f, z0), 2);
  EXPECT_EQ(unitary_index(f, z1), 2);
}

TEST(Automorphism, Detection) {
  corpus::Rng r(10);
  EXPECT_TRUE(is_automorphism(corpus::random_automorphism(r, 3)));
  EXPECT_FALSE(is_automorphism(BallMap::linear(CMatrix::Identity(3, 3) * 0.9)));
}
