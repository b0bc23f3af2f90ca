#include <gtest/gtest.h>

#include "lfmsemi/normal_forms.hpp"
#include "support/corpus.hpp"

using namespace lfmsemi;

namespace {

CVector vec(std::initializer_list<cplx> d) {
  CVector v(Index(d.size()));
  Index i = 0;
  for (cplx x : d) v(i++) = x;
  return v;
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

double margin_of(const std::vector<ConditionMargin>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.condition == name) return c.margin;
  ADD_FAILURE() << "no condition " << name;
  return NAN;
}

bool passes(const std::vector<ConditionMargin>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.condition == name) return c.pass;
  ADD_FAILURE() << "no condition " << name;
  return false;
}

// chain round trip on 100 seeded points
void expect_chain(const BallMap& f, const NormalForm& nf) {
  EXPECT_LE(conjugation_residual(f.projective(), nf.normal_map, nf.conjugator, 100), 1e-8);
  EXPECT_LE(nf.chain_residual, 1e-8);
}

}  // namespace

TEST(EllipticSplit, DiagonalNeedsNoConjugation) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = std::polar(1.0, 0.9);
  a(1, 1) = 0.5;
  const BallMap f = BallMap::linear(a);
  const NormalForm nf = elliptic_split(f);
  const auto& p = std::get<EllipticSplitParams>(nf.params);
  ASSERT_EQ(p.lambda.size(), 1);
  EXPECT_LE(std::abs(p.lambda(0) - a(0, 0)), 1e-12);
  EXPECT_LE(std::abs(p.a1(0, 0) - 0.5), 1e-12);
  expect_chain(f, nf);
}

TEST(EllipticSplit, RecoversUnderUnitaryConjugation) {
  corpus::Rng r(1);
  CMatrix a = CMatrix::Zero(3, 3);
  a(0, 0) = std::polar(1.0, 0.9);
  a(1, 1) = std::polar(1.0, -2.0);
  a(2, 2) = 0.5;
  const BallMap f = conjugate(BallMap::linear(a), BallMap::linear(corpus::random_unitary(r, 3)));
  const NormalForm nf = elliptic_split(f);
  const auto& p = std::get<EllipticSplitParams>(nf.params);
  ASSERT_EQ(p.lambda.size(), 2);
  std::vector<double> args{std::arg(p.lambda(0)), std::arg(p.lambda(1))};
  std::sort(args.begin(), args.end());
  EXPECT_NEAR(args[0], -2.0, 1e-9);
  EXPECT_NEAR(args[1], 0.9, 1e-9);
  EXPECT_NEAR(std::abs(p.a1(0, 0) - 0.5), 0.0, 1e-9);
  expect_chain(f, nf);
  // the normal map is exactly linear
  const CMatrix h = nf.normal_map.homogeneous();
  EXPECT_LE(h.block(3, 0, 1, 3).norm(), 1e-12);
  EXPECT_LE(h.col(3).head(3).norm(), 1e-12);
}

TEST(EllipticSplit, UnitaryHasEmptyContractionBlock) {
  corpus::Rng r(2);
  const BallMap f = BallMap::linear(corpus::random_unitary(r, 3));
  const NormalForm nf = elliptic_split(f);
  const auto& p = std::get<EllipticSplitParams>(nf.params);
  EXPECT_EQ(p.lambda.size(), 3);
  EXPECT_EQ(p.a1.rows(), 0);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(p.lambda(j)), 1.0, 1e-9);
  expect_chain(f, nf);
}

TEST(EllipticSplit, PlantedCorpus) {
  corpus::Rng r(3);
  for (int k = 0; k < 20; ++k) {
    const corpus::Case c = corpus::planted_elliptic_split(r, 2 + k % 4, true);
    const NormalForm nf = elliptic_split(c.map);
    const auto& p = std::get<EllipticSplitParams>(nf.params);
    for (Index j = 0; j < p.lambda.size(); ++j) EXPECT_NEAR(std::abs(p.lambda(j)), 1.0, 1e-9);
    if (p.a1.rows() > 0) {
      EXPECT_LT(spectral_radius(p.a1), 1.0 - 1e-9);
      EXPECT_LE(spectral_norm(p.a1), 1.0 + 1e-10);
    }
    expect_chain(c.map, nf);
  }
}

TEST(EllipticSplit, ZeroIndexIsWrongForm) {
  EXPECT_EQ(kind_of([] { elliptic_split(BallMap::linear(CMatrix::Identity(2, 2) / 2.0)); }), ErrorKind::WrongForm);
}

TEST(EllipticU0, LinearHalf) {
  const BallMap f = BallMap::linear(CMatrix::Identity(2, 2) / 2.0);
  const NormalForm nf = elliptic_u0(f);
  const auto& p = std::get<EllipticU0Params>(nf.params);
  EXPECT_NEAR(p.delta, 0.0, 1e-14);
  EXPECT_LE((p.a_hat - CMatrix::Identity(2, 2) / 2.0).norm(), 1e-12);
  expect_chain(f, nf);
}

TEST(EllipticU0, ScalarDelta) {
  for (double c : {0.05, 0.2, 0.35}) {
    const BallMap f = BallMap::make(CMatrix::Constant(1, 1, 0.5), vec({0}), vec({c}), 1.0);
    const NormalForm nf = elliptic_u0(f);
    // (conj(a) - 1) V = conj(c) with a = 1/2 gives |V| = 2|c|
    EXPECT_NEAR(std::get<EllipticU0Params>(nf.params).delta, 2.0 * c, 1e-10);
    expect_chain(f, nf);
  }
}

TEST(EllipticU0, NecessaryBoundAlongIterates) {
  corpus::Rng r(4);
  for (int k = 0; k < 20; ++k) {
    const corpus::Case c = corpus::planted_elliptic_u0(r, 1 + k % 4, true);
    const NormalForm nf = elliptic_u0(c.map);
    const auto& p = std::get<EllipticU0Params>(nf.params);
    const Index n = p.a_hat.rows();
    EXPECT_GE(p.delta, 0.0);
    EXPECT_LE(p.delta, 1.0 + 1e-9);
    EXPECT_LT(spectral_radius(p.a_hat), 1.0 - 1e-9);
    EXPECT_LE(spectral_norm(p.a_hat), 1.0 + 1e-10);
    const CVector e1 = CVector::Unit(n, 0);
    CMatrix pw = CMatrix::Identity(n, n);
    for (int m = 1; m <= 50; ++m) {
      pw = pw * p.a_hat;
      EXPECT_LE(p.delta * (pw.adjoint() * e1 - e1).norm(), 1.0 + 1e-9);
    }
    expect_chain(c.map, nf);
  }
}

TEST(EllipticU0, Errors) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = std::polar(1.0, 0.9);
  a(1, 1) = 0.5;
  EXPECT_EQ(kind_of([&] { elliptic_u0(BallMap::linear(a)); }), ErrorKind::WrongForm);
}

TEST(SiegelConditions, Translation) {
  const SiegelMap g(1.0, CMatrix::Identity(1, 1), vec({0}), cplx(0, 1), vec({0}));
  const auto cs = siegel_conditions(g);
  EXPECT_NEAR(margin_of(cs, "Q.psd"), 0.0, 1e-15);
  EXPECT_NEAR(margin_of(cs, "imb.bound"), 1.0, 1e-15);
  EXPECT_NEAR(margin_of(cs, "x.in.range"), 0.0, 1e-15);
  EXPECT_TRUE(all_pass(cs));
  // the same through the ball
  const SiegelReduction red = siegel_reduce(cayley_to_ball(g));
  EXPECT_TRUE(all_pass(red.conditions));
}

TEST(SiegelConditions, HeisenbergIsOnTheBoundary) {
  const CVector a = vec({cplx(0.3, -0.4)});
  const SiegelMap g = SiegelMap::from_homogeneous(heisenberg(a).homogeneous());
  const auto cs = siegel_conditions(g);
  EXPECT_NEAR(margin_of(cs, "imb.bound"), 0.0, 1e-14);
  EXPECT_TRUE(all_pass(cs));
}

TEST(SiegelConditions, SmallImbFails) {
  const SiegelMap g(1.0, CMatrix::Identity(1, 1) * 0.5, vec({0}), cplx(0, 0.1), vec({0.5}));
  const auto cs = siegel_conditions(g);
  EXPECT_FALSE(passes(cs, "imb.bound"));
  EXPECT_LT(margin_of(cs, "imb.bound"), 0.0);
  EXPECT_FALSE(all_pass(cs));
}

TEST(SiegelReduce, EllipticIsDomainError) {
  EXPECT_EQ(kind_of([] { siegel_reduce(BallMap::linear(CMatrix::Identity(2, 2) / 2.0)); }), ErrorKind::Form);
}

TEST(SiegelReduce, GenuineMapsPass) {
  corpus::Rng r(5);
  for (int k = 0; k < 20; ++k) {
    const BallMap f = k % 2 ? corpus::planted_parabolic(r, 3, true, true).map : corpus::planted_hyperbolic(r, 3, true).map;
    for (const auto& c : siegel_reduce(f).conditions) EXPECT_TRUE(c.pass) << c.condition << " " << c.margin;
  }
}

TEST(ParabolicForm, DiscAutomorphism) {
  const SiegelMap shift(1.0, CMatrix(0, 0), CVector(0), 1.0, CVector(0));
  const BallMap f = cayley_to_ball(shift);
  const NormalForm nf = parabolic_normal_form(f);
  const auto& p = std::get<ParabolicParams>(nf.params);
  EXPECT_EQ(p.blocks.total(), 0);
  EXPECT_GE(p.b.imag(), -1e-12);
  expect_chain(f, nf);
}

TEST(ParabolicForm, BallAutomorphismInTwoDimensions) {
  const CVector a = vec({cplx(0.4, 0.2)});
  const SiegelMap g(1.0, CMatrix::Identity(1, 1), a, cplx(0.3, a.squaredNorm()), a);
  const BallMap f = cayley_to_ball(g);
  ASSERT_TRUE(is_automorphism(f));
  const NormalForm nf = parabolic_normal_form(f);
  const auto& p = std::get<ParabolicParams>(nf.params);
  EXPECT_EQ(p.blocks.p, 1);
  EXPECT_EQ(p.blocks.r, 0);
  EXPECT_NEAR(p.b.imag() - p.a.squaredNorm(), 0.0, 1e-9);
  expect_chain(f, nf);
}

TEST(ParabolicForm, ContractionBlockConditions) {
  corpus::Rng r(6);
  for (int k = 0; k < 10; ++k) {
    const corpus::Case c = corpus::planted_parabolic(r, 2 + k % 3, true, true);
    const NormalForm nf = parabolic_normal_form(c.map);
    const auto& p = std::get<ParabolicParams>(nf.params);
    for (const auto& m : nf.conditions) EXPECT_GE(m.margin, -1e-10) << m.condition;
    for (Index j = 0; j < p.d.size(); ++j) EXPECT_GT(std::abs(p.d(j) - 1.0), 1e-9);
    if (p.blocks.r > 0) EXPECT_LT(spectral_radius(p.a_block), 1.0);
    expect_chain(c.map, nf);
  }
}

TEST(ParabolicForm, NonParabolicIsDomainError) {
  const BallMap f = BallMap::make(CMatrix::Constant(1, 1, 1.0), vec({0.5}), vec({0.5}), 1.0);
  EXPECT_EQ(kind_of([&] { parabolic_normal_form(f); }), ErrorKind::Domain);
}

TEST(HyperbolicForm, DiscAutomorphism) {
  const BallMap f = BallMap::make(CMatrix::Constant(1, 1, 1.0), vec({0.5}), vec({0.5}), 1.0);
  const NormalForm nf = hyperbolic_normal_form(f);
  const auto& p = std::get<HyperbolicParams>(nf.params);
  EXPECT_NEAR(p.lambda, 3.0, 1e-9);
  EXPECT_NEAR(std::abs(p.b), 0.0, 1e-9);
  expect_chain(f, nf);
}

TEST(HyperbolicForm, BallAutomorphismInTwoDimensions) {
  const double lam = 4.0;
  const SiegelMap g(lam, CMatrix::Constant(1, 1, 2.0 * std::polar(1.0, 1.3)), vec({0}), 0.7, vec({0}));
  const BallMap f = cayley_to_ball(g);
  ASSERT_TRUE(is_automorphism(f));
  const NormalForm nf = hyperbolic_normal_form(f);
  const auto& p = std::get<HyperbolicParams>(nf.params);
  EXPECT_NEAR(p.lambda, lam, 1e-9);
  EXPECT_NEAR(p.b.imag(), 0.0, 1e-9);
  EXPECT_EQ(p.blocks.q, 1);
  EXPECT_NEAR(std::abs(p.d(0)), 1.0, 1e-9);
  expect_chain(f, nf);
}

TEST(HyperbolicForm, SvdIdentityOnContractionBlock) {
  corpus::Rng r(7);
  int with_block = 0;
  for (int k = 0; k < 20; ++k) {
    const corpus::Case c = corpus::planted_hyperbolic(r, 2 + k % 4, true);
    const NormalForm nf = hyperbolic_normal_form(c.map);
    const auto& p = std::get<HyperbolicParams>(nf.params);
    EXPECT_GT(p.lambda, 1.0);
    for (const auto& m : nf.conditions) EXPECT_TRUE(m.pass) << m.condition << " " << m.margin;
    if (p.blocks.r > 0 && p.coupling.norm() == 0.0) {
      ++with_block;
      const Index n = p.blocks.r;
      const CMatrix& a = p.a_block;
      const CMatrix qp = pinv(CMatrix::Identity(n, n) - a.adjoint() * a);
      const CMatrix pp = pinv(CMatrix::Identity(n, n) - a * a.adjoint());
      const CVector ac = a.adjoint() * p.c;
      EXPECT_NEAR(inner(qp * ac, ac).real() + p.c.squaredNorm(), inner(pp * p.c, p.c).real(),
                  1e-9 * std::max(1.0, p.c.squaredNorm()));
    }
    expect_chain(c.map, nf);
  }
  EXPECT_GT(with_block, 0);
}

TEST(HyperbolicForm, NonHyperbolicIsDomainError) {
  EXPECT_EQ(kind_of([] { hyperbolic_normal_form(BallMap::linear(CMatrix::Identity(2, 2) / 2.0)); }),
            ErrorKind::Domain);
}

TEST(NormalForms, UnimodularBlockNeverHasOne) {
  corpus::Rng r(8);
  for (int k = 0; k < 20; ++k) {
    const corpus::Case c = k % 2 ? corpus::planted_hyperbolic(r, 4, true) : corpus::planted_parabolic(r, 4, true, true);
    const NormalForm nf = k % 2 ? hyperbolic_normal_form(c.map) : parabolic_normal_form(c.map);
    const CVector d = k % 2 ? std::get<HyperbolicParams>(nf.params).d : std::get<ParabolicParams>(nf.params).d;
    for (Index j = 0; j < d.size(); ++j) EXPECT_GT(std::abs(d(j) - 1.0), 1e-9);
  }
}
