#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dosm/error.hpp"
#include "dosm/geometry.hpp"

namespace dosm::localization {

template <typename Scalar>
struct Range {
  geometry::Point2<Scalar> beacon;
  Scalar distance;
};

template <typename Scalar>
struct Trilateration {
  geometry::Point2<Scalar> position;
  Scalar residual_rms;
  int iterations;  // Gauss-Newton steps taken
};

inline constexpr double kCollinearTolerance = 1e-6;
inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr int kMaxGaussNewtonSteps = 20;

namespace detail {

template <typename Scalar>
Scalar sum_squared_residuals(std::span<const Range<Scalar>> ranges, const geometry::Point2<Scalar>& p) {
  Scalar total(0);
  for (const auto& r : ranges) {
    const Scalar e = (p - r.beacon).norm() - r.distance;
    total += e * e;
  }
  return total;
}

// Max distance of any beacon from the line through the two most separated beacons.
template <typename Scalar>
Scalar spread_off_axis(std::span<const Range<Scalar>> ranges) {
  std::size_t a = 0, b = 0;
  Scalar widest(0);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    for (std::size_t j = i + 1; j < ranges.size(); ++j) {
      const Scalar d = (ranges[i].beacon - ranges[j].beacon).norm();
      if (d > widest) {
        widest = d;
        a = i;
        b = j;
      }
    }
  }
  if (widest == Scalar(0)) return Scalar(0);
  const geometry::Point2<Scalar> axis = (ranges[b].beacon - ranges[a].beacon) / widest;
  Scalar off(0);
  for (const auto& r : ranges) {
    off = std::max(off, std::abs(geometry::cross<Scalar>(axis, r.beacon - ranges[a].beacon)));
  }
  return off;
}

}  // namespace detail

/// Least-squares position from beacon ranges: the circle equations are linearized against the
/// first entry and solved, then refined by damped Gauss-Newton on the range residuals.
template <typename Scalar>
Trilateration<Scalar> trilaterate(std::span<const Range<Scalar>> ranges) {
  using Point = geometry::Point2<Scalar>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using MatrixX2 = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const auto m = static_cast<Eigen::Index>(ranges.size());
  if (m < 3) {
    throw Error(ErrorCode::InsufficientBeacons,
                "trilateration needs at least 3 ranges, got " + std::to_string(m));
  }
  for (const auto& r : ranges) {
    if (!r.beacon.allFinite() || !std::isfinite(r.distance) || r.distance < Scalar(0)) {
      throw Error(ErrorCode::InvalidArgument, "trilateration input is not finite and non-negative");
    }
  }
  if (detail::spread_off_axis(ranges) <= Scalar(kCollinearTolerance)) {
    throw Error(ErrorCode::DegenerateGeometry, "beacon positions are collinear");
  }

  // (x - xi)^2 + (y - yi)^2 = di^2 minus the first equation is linear in (x, y).
  const Point& p0 = ranges[0].beacon;
  const Scalar d0 = ranges[0].distance;
  MatrixX2 a(m - 1, 2);
  VectorX rhs(m - 1);
  for (Eigen::Index i = 1; i < m; ++i) {
    const Point& pi = ranges[static_cast<std::size_t>(i)].beacon;
    const Scalar di = ranges[static_cast<std::size_t>(i)].distance;
    a.row(i - 1) = Scalar(2) * (pi - p0).transpose();
    rhs(i - 1) = pi.squaredNorm() - p0.squaredNorm() - di * di + d0 * d0;
  }
  const Matrix2 normal = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix2> eig(normal, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues()(0);
  const Scalar hi = eig.eigenvalues()(1);
  if (!(lo > Scalar(0)) || hi / lo > Scalar(kMaxConditionNumber)) {
    throw Error(ErrorCode::SingularSystem, "normal matrix is too ill-conditioned to solve");
  }
  Point p = a.colPivHouseholderQr().solve(rhs);

  Scalar cost = detail::sum_squared_residuals(ranges, p);
  int steps = 0;
  for (; steps < kMaxGaussNewtonSteps; ++steps) {
    MatrixX2 jac(m, 2);
    VectorX res(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& r = ranges[static_cast<std::size_t>(i)];
      const Point diff = p - r.beacon;
      const Scalar dist = diff.norm();
      res(i) = dist - r.distance;
      // The range gradient is undefined on top of a beacon; that row contributes nothing.
      if (dist > Scalar(1e-12)) {
        jac.row(i) = (diff / dist).transpose();
      } else {
        jac.row(i).setZero();
      }
    }
    const Matrix2 jtj = jac.transpose() * jac;
    const Point grad = jac.transpose() * res;
    if (std::abs(jtj.determinant()) <= Scalar(1e-300)) break;
    const Point step = -jtj.ldlt().solve(grad);
    if (!step.allFinite() || step.norm() <= Scalar(1e-15) * (Scalar(1) + p.norm())) break;

    Scalar t(1);
    bool improved = false;
    for (int halvings = 0; halvings < 30; ++halvings, t /= Scalar(2)) {
      const Point candidate = p + t * step;
      const Scalar c = detail::sum_squared_residuals(ranges, candidate);
      if (c <= cost) {
        p = candidate;
        cost = c;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  return {p, std::sqrt(cost / Scalar(m)), steps};
}

template <typename Scalar>
Trilateration<Scalar> trilaterate(const std::vector<Range<Scalar>>& ranges) {
  return trilaterate(std::span<const Range<Scalar>>(ranges));
}

}  // namespace dosm::localization
