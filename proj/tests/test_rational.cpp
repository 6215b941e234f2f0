#include <gtest/gtest.h>

#include "spmalloc/rational.hpp"

using spmalloc::ConfigError;
using spmalloc::Rational;

TEST(ParseRational, DecimalsAreExact) {
  EXPECT_EQ(spmalloc::parse_rational("2.258"), Rational(2258, 1000));
  EXPECT_EQ(spmalloc::parse_rational("-0.083"), Rational(-83, 1000));
  EXPECT_EQ(spmalloc::parse_rational("+12"), Rational(12));
  EXPECT_EQ(spmalloc::parse_rational(".5"), Rational(1, 2));
}

TEST(ParseRational, ExponentsAndFractions) {
  EXPECT_EQ(spmalloc::parse_rational("8.4809e7"), Rational(84809000));
  EXPECT_EQ(spmalloc::parse_rational("1E-3"), Rational(1, 1000));
  EXPECT_EQ(spmalloc::parse_rational("1/3"), Rational(1, 3));
  EXPECT_EQ(spmalloc::parse_rational("0.5/0.25"), Rational(2));
}

TEST(ParseRational, RejectsGarbage) {
  for (const char* bad : {"", "-", "abc", "1.2.3", "1e", "1e+x", "1/0", "3 ", "1e99999"}) {
    EXPECT_THROW(spmalloc::parse_rational(bad), ConfigError) << bad;
  }
}

TEST(RationalFromDouble, UsesShortestDecimal) {
  EXPECT_EQ(spmalloc::rational_from_double(2.258), Rational(2258, 1000));
  EXPECT_EQ(spmalloc::rational_from_double(336.33), Rational(33633, 100));
  EXPECT_EQ(spmalloc::rational_from_double(0.0), Rational(0));
}

TEST(ToFixed, RoundsHalfAwayFromZero) {
  EXPECT_EQ(spmalloc::to_fixed(Rational(1, 2), 0), "1");
  EXPECT_EQ(spmalloc::to_fixed(Rational(-1, 2), 0), "-1");
  EXPECT_EQ(spmalloc::to_fixed(Rational(12345, 10000), 3), "1.235");
  EXPECT_EQ(spmalloc::to_fixed(Rational(1, 3), 6), "0.333333");
  EXPECT_EQ(spmalloc::to_fixed(Rational(-1, 10000), 3), "0.000");
  EXPECT_EQ(spmalloc::to_fixed(Rational(7), 2), "7.00");
}

TEST(ToExactString, TerminatingAndRepeating) {
  EXPECT_EQ(spmalloc::to_exact_string(Rational(412155969536, 1000)), "412155969.536");
  EXPECT_EQ(spmalloc::to_exact_string(Rational(5)), "5");
  EXPECT_EQ(spmalloc::to_exact_string(Rational(-1, 8)), "-0.125");
  EXPECT_EQ(spmalloc::to_exact_string(Rational(2, 3)), "2/3");
}

TEST(ToExactString, RoundTripsThroughParse) {
  for (const Rational& r : {Rational(1, 3), Rational(-7, 40), Rational(195251, 1000), Rational(0)}) {
    EXPECT_EQ(spmalloc::parse_rational(spmalloc::to_exact_string(r)), r);
  }
}
