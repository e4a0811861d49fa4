#include <gtest/gtest.h>

#include <cmath>

#include "calderon/atoms.hpp"

using namespace calderon;

TEST(MakeAtom, ValidatesForManySeeds) {
  const DomainBox box(1, 1.0, 1024);
  const auto p = ExponentFunction::radial_bump(1.5, 2.5, {0.2, 0.0}, 0.3, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double p0 = seed % 2 ? kInfinity : 3.0;
    const auto a = make_atom(box, p, Cube({-0.1, 0.0}, 0.5), p0, 2, seed);
    const auto rep = validate_atom(a, p, 1.2);
    EXPECT_TRUE(rep.pass()) << "seed " << seed;
    EXPECT_NEAR(rep.clause("a2").ratio, 0.9, 1e-12);
  }
}

TEST(MakeAtom, TwoDimensionalAtom) {
  const DomainBox box(2, 1.0, 64);
  const auto p = ExponentFunction::constant(0.8);
  const auto a = make_atom(box, p, Cube({0.1, -0.2}, 0.6), 2.0, min_moment_degree(p, 2) + 1, 4);
  EXPECT_TRUE(validate_atom(a, p).pass());
}

TEST(MakeAtom, ZeroMeanAndGenericHigherMoment) {
  const DomainBox box(1, 1.0, 512);
  const auto p = ExponentFunction::constant(2.0);
  const Cube Q({0.0, 0.0}, 1.0);
  const auto a = make_atom(box, p, Q, kInfinity, 0, 9);
  double mass = 0.0, first = 0.0, l1 = 0.0;
  for (std::size_t c = 0; c < box.size(); ++c) {
    const double x = box.center(c)[0];
    mass += a.data[c] * box.spacing();
    first += a.data[c] * x * box.spacing();
    l1 += std::abs(a.data[c]) * box.spacing();
  }
  EXPECT_LE(std::abs(mass), 1e-10 * l1);
  EXPECT_GT(std::abs(first), 1e-6 * l1);
}

TEST(MakeAtom, RejectsBadParameters) {
  const DomainBox box(1, 1.0, 256);
  const auto p = ExponentFunction::constant(3.0);
  EXPECT_THROW(make_atom(box, p, Cube({0.0, 0.0}, 0.5), 2.0, 1, 0), std::invalid_argument);
  const auto q = ExponentFunction::constant(0.5);  // d_{p} = 1 in one dimension
  EXPECT_THROW(make_atom(box, q, Cube({0.0, 0.0}, 0.5), 2.0, 0, 0), std::invalid_argument);
}

TEST(ValidateAtom, DetectsViolations) {
  const DomainBox box(1, 1.0, 512);
  const auto p = ExponentFunction::constant(2.0);
  const Cube Q({0.0, 0.0}, 0.5);
  const auto a = make_atom(box, p, Q, 4.0, 1, 3);

  Atom big = a;
  big.data *= 10.0;
  const auto r = validate_atom(big, p);
  EXPECT_FALSE(r.clause("a2").pass);
  EXPECT_TRUE(r.clause("a1").pass);
  EXPECT_NEAR(r.clause("a2").ratio, 9.0, 1e-9);  // 10 × the 90% saturation

  Atom shifted = a;
  std::rotate(shifted.data.samples.begin(), shifted.data.samples.begin() + 200, shifted.data.samples.end());
  const auto rs = validate_atom(shifted, p);
  EXPECT_FALSE(rs.clause("a1").pass);
  EXPECT_GT(rs.clause("a1").measured, 0.0);

  Atom tilted = a;
  for (std::size_t c = 0; c < box.size(); ++c)
    if (tilted.data[c] != 0.0) tilted.data[c] += 1e-3;
  EXPECT_FALSE(validate_atom(tilted, p).clause("a3").pass);
}

TEST(AQuantity, Examples) {
  const DomainBox box(1, 2.0, 512);
  const auto p = ExponentFunction::constant(1.0);
  AtomicDecomposition one;
  one.add(1.0, make_atom(box, p, Cube({0.0, 0.0}, 0.5), 2.0, 1, 1));
  EXPECT_NEAR(a_quantity(one, p, box), 1.0, 1e-7);

  AtomicDecomposition two;
  two.add(1.0, make_atom(box, p, Cube({-1.0, 0.0}, 0.5), 2.0, 1, 1));
  two.add(1.0, make_atom(box, p, Cube({1.0, 0.0}, 0.5), 2.0, 1, 2));
  EXPECT_NEAR(a_quantity(two, p, box), 2.0, 1e-7);

  AtomicDecomposition zero = two;
  zero.k = {0.0, 0.0};
  EXPECT_EQ(a_quantity(zero, p, box), 0.0);
}

TEST(AQuantity, MonotoneAndEllPComparison) {
  const DomainBox box(1, 2.0, 512);
  const auto p = ExponentFunction::radial_bump(0.6, 1.4, {0.3, 0.0}, 0.5, 1.0);
  DecompositionSpec spec;
  spec.count = 12;
  spec.d = min_moment_degree(p, 1);
  spec.p0 = 4.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto dec = random_decomposition(box, p, spec, seed);
    const double base = a_quantity(dec, p, box);
    dec.k[seed] *= 1.5;
    EXPECT_GE(a_quantity(dec, p, box), base * (1 - 1e-9));
    // Σ k χ/‖χ‖ <= ℓ^{p̲} aggregate pointwise when p̲ <= 1
    const auto agg = a_aggregate(dec, p, box);
    GridFunction lin(box);
    for (std::size_t j = 0; j < dec.size(); ++j) {
      const double v = dec.k[j] / indicator_norm(box, dec.atoms[j].Q, p);
      for (std::size_t c = 0; c < box.size(); ++c)
        if (dec.atoms[j].Q.contains(box.center(c), 1)) lin[c] += v;
    }
    for (std::size_t c = 0; c < box.size(); ++c) EXPECT_LE(lin[c], agg[c] * (1 + 1e-12) + 1e-300);
  }
}

TEST(Synthesize, LinearityAndScaling) {
  const DomainBox box(1, 2.0, 256);
  const auto p = ExponentFunction::constant(2.0);
  EXPECT_EQ(synthesize(AtomicDecomposition{}, box).samples, GridFunction(box).samples);
  const auto a = make_atom(box, p, Cube({0.5, 0.0}, 0.5), 4.0, 1, 5);
  AtomicDecomposition d1;
  d1.add(2.0, a);
  const auto f = synthesize(d1, box);
  for (std::size_t c = 0; c < box.size(); ++c) EXPECT_EQ(f[c], 2.0 * a.data[c]);
  AtomicDecomposition d2;
  d2.add(0.5, make_atom(box, p, Cube({-0.5, 0.0}, 0.25), 4.0, 1, 6));
  AtomicDecomposition both = d1;
  both.add(d2.k[0], d2.atoms[0]);
  const auto s = synthesize(both, box), t = synthesize(d1, box) + synthesize(d2, box);
  for (std::size_t c = 0; c < box.size(); ++c) EXPECT_NEAR(s[c], t[c], 1e-15);
}
