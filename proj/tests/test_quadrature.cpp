#include <gtest/gtest.h>

#include <cmath>

#include "fsi/basis.hpp"
#include "fsi/quadrature.hpp"

using namespace fsi;

namespace {

double factorial(int k) { return std::tgamma(k + 1.0); }

// Integral of x^a y^b over the unit right triangle.
double monomial_triangle(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST(IntervalQuadrature, EightPointsIntegrateDegreeFifteen) {
  const IntervalRule r = gauss_legendre(8);
  EXPECT_EQ(r.size(), 8u);
  double acc = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) acc += r.weights[q] * std::pow(r.points[q][0], 15);
  EXPECT_NEAR(acc, 1.0 / 16.0, 1e-15);
}

TEST(IntervalQuadrature, ExactUpToDeclaredDegree) {
  for (int deg = 0; deg <= 40; ++deg) {
    const IntervalRule r = interval_quadrature(deg);
    EXPECT_GE(r.degree, deg);
    for (int k = 0; k <= deg; ++k) {
      double acc = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) acc += r.weights[q] * std::pow(r.points[q][0], k);
      EXPECT_NEAR(acc, 1.0 / (k + 1), 1e-14) << "degree " << deg << " monomial " << k;
    }
  }
}

TEST(IntervalQuadrature, PointsAscendInsideUnitInterval) {
  const IntervalRule r = gauss_legendre(12);
  for (std::size_t q = 0; q < r.size(); ++q) {
    EXPECT_GT(r.points[q][0], 0.0);
    EXPECT_LT(r.points[q][0], 1.0);
    if (q > 0) {
      EXPECT_LT(r.points[q - 1][0], r.points[q][0]);
    }
  }
}

TEST(IntervalQuadrature, UnsupportedCountsThrow) {
  EXPECT_THROW(gauss_legendre(0), CapabilityError);
  EXPECT_THROW(gauss_legendre(33), CapabilityError);
  EXPECT_THROW(interval_quadrature(-1), CapabilityError);
  EXPECT_THROW(interval_quadrature(kMaxIntervalDegree + 1), CapabilityError);
}

TEST(TriangleQuadrature, DegreeTwoIntegratesXY) {
  const TriangleRule r = triangle_quadrature(2);
  double acc = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) acc += r.weights[q] * r.points[q][0] * r.points[q][1];
  EXPECT_NEAR(acc, 1.0 / 24.0, 1e-16);
}

TEST(TriangleQuadrature, WeightsSumToReferenceArea) {
  for (int deg = 0; deg <= kMaxTriangleDegree; ++deg) {
    const TriangleRule r = triangle_quadrature(deg);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    EXPECT_NEAR(sum, TriangleRule::reference_measure(), 1e-15) << "degree " << deg;
  }
}

TEST(TriangleQuadrature, ExactForAllMonomialsUpToDegree) {
  for (int deg = 0; deg <= kMaxTriangleDegree; ++deg) {
    const TriangleRule r = triangle_quadrature(deg);
    EXPECT_GE(r.degree, deg);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q)
          acc += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
        const double exact = monomial_triangle(a, b);
        EXPECT_NEAR(acc, exact, 1e-14 * (1.0 + exact)) << deg << ": x^" << a << " y^" << b;
      }
    }
  }
}

TEST(TriangleQuadrature, UnsupportedDegreeThrows) {
  EXPECT_THROW(triangle_quadrature(-1), CapabilityError);
  EXPECT_THROW(triangle_quadrature(kMaxTriangleDegree + 1), CapabilityError);
}

TEST(TriangleQuadrature, PointsInsideReferenceTriangle) {
  for (int deg : {1, 2, 5, 10, 15}) {
    for (const auto& p : triangle_quadrature(deg).points) {
      EXPECT_GE(p[0], 0.0);
      EXPECT_GE(p[1], 0.0);
      EXPECT_LE(p[0] + p[1], 1.0 + 1e-15);
    }
  }
}

TEST(FundamentalTheorem, HermiteDerivativesIntegrateToEndpointDifference) {
  const IntervalRule r = interval_quadrature(15);
  for (int order = 0; order <= 2; ++order) {
    std::array<double, 6> integral{};
    for (std::size_t q = 0; q < r.size(); ++q) {
      const auto d = HermiteQuintic::eval(r.points[q][0], order + 1);
      for (int i = 0; i < 6; ++i) integral[i] += r.weights[q] * d[i];
    }
    const auto right = HermiteQuintic::eval(1.0, order);
    const auto left = HermiteQuintic::eval(0.0, order);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(integral[i], right[i] - left[i], 1e-12);
  }
}

TEST(FundamentalTheorem, P2DerivativeAlongEdgeIntegratesToEndpointDifference) {
  // On the edge y = 0 the x-derivative integrates to phi(1,0) - phi(0,0).
  const IntervalRule r = interval_quadrature(4);
  for (int i = 0; i < 6; ++i) {
    double acc = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) acc += r.weights[q] * p2_grad({r.points[q][0], 0.0})[i][0];
    EXPECT_NEAR(acc, p2_shape({1.0, 0.0})[i] - p2_shape({0.0, 0.0})[i], 1e-14);
  }
}

TEST(Exactness, HermiteBendingProductsAndPicardTriple) {
  // Products of second derivatives (degree 6) and the quintic triple product
  // (degree 15) are integrated exactly by the plate rule: compare against a
  // 16-point rule.
  const IntervalRule plate = interval_quadrature(15);
  const IntervalRule fine = gauss_legendre(16);
  const auto integrate = [](const IntervalRule& r, auto&& f) {
    double acc = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) acc += r.weights[q] * f(r.points[q][0]);
    return acc;
  };
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const auto bend = [&](double t) {
        const auto d = HermiteQuintic::eval(t, 2);
        return d[i] * d[j];
      };
      EXPECT_NEAR(integrate(plate, bend), integrate(fine, bend), 1e-11);
      const auto triple = [&](double t) {
        const auto v = HermiteQuintic::eval(t, 0);
        return v[0] * v[i] * v[j];
      };
      EXPECT_NEAR(integrate(plate, triple), integrate(fine, triple), 1e-14);
    }
  }
}
