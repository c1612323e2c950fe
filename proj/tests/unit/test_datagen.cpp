#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "igh/datagen.hpp"
#include "oracle/brute_force.hpp"

using namespace igh;

TEST(ArcLength, KnownValueAndQuadrature) {
  EXPECT_NEAR(arc_length(1.0), 1.147793574696319, 1e-14);
  EXPECT_EQ(arc_length(0.0), 0.0);
  for (double t : {0.5, 2.0, std::numbers::pi, 10.0, 6.0 * std::numbers::pi}) {
    const double quad = oracle::simpson([](double u) { return std::sqrt(1.0 + u * u); }, 0.0, t);
    EXPECT_NEAR(arc_length(t), quad, 1e-9 * std::max(1.0, quad));
  }
  EXPECT_THROW(arc_length(-1.0), Error);
}

TEST(ArcLength, InverseRoundTrip) {
  for (double t : {0.0, 1e-6, 0.3, 1.0, 3.14, 9.0, 18.85, 50.0}) {
    EXPECT_NEAR(arc_length(arc_length_invert(arc_length(t))), arc_length(t), 1e-11);
    EXPECT_NEAR(arc_length_invert(arc_length(t)), t, 1e-9);
  }
  EXPECT_THROW(arc_length_invert(-0.5), Error);
}

TEST(SwissRoll, ShapeAndDeterminism) {
  SwissRollSpec spec;
  spec.points_per_spiral = 20;
  spec.spirals = 3;
  spec.ambient_dim = 8;
  const SwissRoll a = make_swiss_roll(spec);
  EXPECT_EQ(a.data.rows(), 60);
  EXPECT_EQ(a.data.cols(), 8);
  EXPECT_EQ(a.data.missing_count(), 0);
  EXPECT_EQ(a.truth, a.data.values);
  EXPECT_EQ(a.truth, make_swiss_roll(spec).truth);
  spec.seed = 1;
  EXPECT_NE(a.truth, make_swiss_roll(spec).truth);
}

TEST(SwissRoll, EqualArcLengthSpacingWithoutRotationOrNoise) {
  SwissRollSpec spec;
  spec.points_per_spiral = 30;
  spec.spirals = 2;
  spec.ambient_dim = 5;
  spec.rotations = 0;
  spec.noise_sigma = 0.0;
  const SwissRoll r = make_swiss_roll(spec);
  const double total = arc_length(spec.t_end) - arc_length(spec.t_start);
  for (int k = 1; k < 30; ++k) {
    const double step = arc_length(r.parameter(k)) - arc_length(r.parameter(k - 1));
    EXPECT_NEAR(step, total / 29.0, 1e-9);
  }
  EXPECT_NEAR(r.parameter(0), spec.t_start, 1e-9);
  EXPECT_NEAR(r.parameter(29), spec.t_end, 1e-9);
  for (Index i = 0; i < r.truth.rows(); ++i) {
    const double t = r.parameter(i);
    EXPECT_NEAR(r.truth(i, 0), t * std::cos(t), 1e-12);
    EXPECT_NEAR(r.truth(i, 1), t * std::sin(t), 1e-12);
    EXPECT_NEAR(r.truth(i, 2), static_cast<double>(i / 30) * spec.height_gap, 1e-12);
    EXPECT_EQ(r.truth.row(i).tail(2).norm(), 0.0);
  }
}

TEST(SwissRoll, RotationsPreservePairwiseDistances) {
  SwissRollSpec spec;
  spec.points_per_spiral = 10;
  spec.spirals = 2;
  spec.ambient_dim = 6;
  spec.noise_sigma = 0.0;
  spec.rotations = 0;
  const Matrix flat = make_swiss_roll(spec).truth;
  spec.rotations = 50;
  const Matrix rotated = make_swiss_roll(spec).truth;
  EXPECT_GT((rotated.rightCols(3)).norm(), 1e-3);
  for (Index a = 0; a < flat.rows(); ++a) {
    for (Index b = a + 1; b < flat.rows(); ++b) {
      EXPECT_NEAR((flat.row(a) - flat.row(b)).norm(), (rotated.row(a) - rotated.row(b)).norm(),
                  1e-9);
    }
  }
}

TEST(SwissRoll, RejectsBadSpec) {
  SwissRollSpec spec;
  spec.ambient_dim = 2;
  EXPECT_THROW(make_swiss_roll(spec), Error);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(make_swiss_roll(spec), Error);
  spec = {};
  spec.t_end = spec.t_start;
  EXPECT_THROW(make_swiss_roll(spec), Error);
}

TEST(Annihilate, FractionConcentrates) {
  const Dataset full = Dataset::complete(Matrix::Ones(250, 30));
  const Annihilation a = annihilate(full, 0.4, 3);
  const double frac = static_cast<double>(a.data.missing_count()) / (250.0 * 30.0);
  EXPECT_NEAR(frac, 0.4, 0.017);
}

TEST(Annihilate, EdgeRatesAndDeterminism) {
  const Dataset full = Dataset::complete(Matrix::Ones(10, 4));
  EXPECT_EQ(annihilate(full, 0.0, 1).data.missing_count(), 0);
  const Annihilation all = annihilate(full, 1.0, 1);
  EXPECT_EQ(all.data.missing_count(), 40);
  EXPECT_FALSE(all.report.ok());
  EXPECT_EQ(all.report.empty_rows.size(), 10u);
  EXPECT_TRUE((annihilate(full, 0.5, 9).data.mask == annihilate(full, 0.5, 9).data.mask).all());
  EXPECT_THROW(annihilate(full, 1.5, 1), Error);
  EXPECT_THROW(annihilate(full, -0.1, 1), Error);
}

TEST(Annihilate, OnlyRemovesAndKeepsValues) {
  Matrix v = Matrix::Random(20, 5);
  Mask m = Mask::Constant(20, 5, true);
  m(3, 2) = false;
  const Dataset d(v, m);
  const Annihilation a = annihilate(d, 0.3, 2);
  EXPECT_FALSE(a.data.mask(3, 2));
  for (Index i = 0; i < 20; ++i) {
    for (Index j = 0; j < 5; ++j) {
      if (a.data.mask(i, j)) EXPECT_EQ(a.data.values(i, j), v(i, j));
      else EXPECT_TRUE(std::isnan(a.data.values(i, j)));
    }
  }
}
