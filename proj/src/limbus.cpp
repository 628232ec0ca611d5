#include "corneal/limbus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "corneal/error.hpp"

namespace corneal {

namespace {

// Translate to the centroid and scale to unit RMS radius; improves conditioning
// of the quadratic design matrices at pixel coordinates in the thousands.
struct Normalizer {
  Vec2 mean = Vec2::Zero();
  double scale = 1.0;

  explicit Normalizer(std::span<const Vec2> pts) {
    for (const Vec2& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double ss = 0.0;
    for (const Vec2& p : pts) ss += (p - mean).squaredNorm();
    scale = std::sqrt(ss / static_cast<double>(pts.size()));
    if (!(scale > 0.0)) scale = 1.0;
  }
  Vec2 apply(const Vec2& p) const { return (p - mean) / scale; }
  Ellipse restore(Ellipse e) const {
    e.cx = e.cx * scale + mean.x();
    e.cy = e.cy * scale + mean.y();
    e.a *= scale;
    e.b *= scale;
    return e;
  }
};

double bilinear(const std::vector<float>& img, int w, int h, double x, double y) {
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const int x0 = std::min(static_cast<int>(x), w - 2);
  const int y0 = std::min(static_cast<int>(y), h - 2);
  const double fx = x - x0, fy = y - y0;
  const float* r0 = &img[static_cast<std::size_t>(y0) * w + x0];
  const float* r1 = r0 + w;
  return (1 - fy) * ((1 - fx) * r0[0] + fx * r0[1]) + fy * ((1 - fx) * r1[0] + fx * r1[1]);
}

bool within_radius(const Ellipse& e, double r_min, double r_max) {
  return e.b >= r_min && e.a <= r_max;
}

}  // namespace

bool RansacParams::valid() const {
  return iterations >= 1 && inlier_threshold > 0.0 && min_inlier_fraction >= 0.0 &&
         min_inlier_fraction <= 1.0 && r_min > 0.0 && r_min < r_max;
}

RansacParams LimbusSettings::resolve(int width, int height, double scale) const {
  RansacParams p;
  p.iterations = iterations;
  p.inlier_threshold = std::max(inlier_threshold * scale, inlier_threshold_floor);
  p.min_inlier_fraction = min_inlier_fraction;
  p.gradient_threshold = gradient_threshold;
  const double side = std::min(width, height);
  p.r_min = r_min_fraction * side;
  p.r_max = r_max_fraction * side;
  p.max_normal_angle = max_normal_angle_deg * std::numbers::pi / 180.0;
  return p;
}

ImageBuffer select_eye_region(const ImageBuffer& img, const std::optional<RegionOfInterest>& roi) {
  if (roi) return crop(img, *roi);
  const int side = std::min(img.width(), img.height());
  return crop(img, {(img.width() - side) / 2, (img.height() - side) / 2, side, side});
}

std::vector<EdgePoint> extract_edges(const ImageBuffer& img, const RansacParams& params) {
  const int w = img.width();
  const int h = img.height();
  std::vector<float> gray(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) gray[static_cast<std::size_t>(v) * w + u] = static_cast<float>(luma(img.at(u, v)));
  }
  std::vector<float> gx(gray.size(), 0.f), gy(gray.size(), 0.f), mag(gray.size(), 0.f);
  const auto at = [&](int u, int v) { return gray[static_cast<std::size_t>(v) * w + u]; };
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      // Sobel scaled by 1/4 so that a sharp step of contrast c has magnitude c.
      const float sx = (at(u + 1, v - 1) + 2 * at(u + 1, v) + at(u + 1, v + 1) - at(u - 1, v - 1) -
                        2 * at(u - 1, v) - at(u - 1, v + 1)) * 0.25f;
      const float sy = (at(u - 1, v + 1) + 2 * at(u, v + 1) + at(u + 1, v + 1) - at(u - 1, v - 1) -
                        2 * at(u, v - 1) - at(u + 1, v - 1)) * 0.25f;
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      gx[i] = sx;
      gy[i] = sy;
      mag[i] = std::hypot(sx, sy);
    }
  }

  std::vector<EdgePoint> edges;
  for (int v = 2; v < h - 2; ++v) {
    for (int u = 2; u < w - 2; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      const double m0 = mag[i];
      if (!(m0 > params.gradient_threshold)) continue;
      const double nx = gx[i] / m0;
      const double ny = gy[i] / m0;
      const double m_minus = bilinear(mag, w, h, u - nx, v - ny);
      const double m_plus = bilinear(mag, w, h, u + nx, v + ny);
      // Strict on one side so that two-pixel plateaus yield a single point.
      if (!(m0 > m_minus && m0 >= m_plus)) continue;
      const double denom = m_minus - 2.0 * m0 + m_plus;
      double offset = denom < 0.0 ? 0.5 * (m_minus - m_plus) / denom : 0.0;
      offset = std::clamp(offset, -0.5, 0.5);
      edges.push_back({u + offset * nx, v + offset * ny, std::atan2(ny, nx), m0});
    }
  }
  if (edges.size() < 5) throw Error(Stage::Limbus, "too few edge points for an ellipse fit");
  return edges;
}

std::optional<Ellipse> fit_ellipse_minimal(std::span<const Vec2> points, double r_min, double r_max) {
  if (points.size() != 5) return std::nullopt;
  const Normalizer norm(points);
  Eigen::Matrix<double, 5, 6> design;
  for (int i = 0; i < 5; ++i) {
    const Vec2 p = norm.apply(points[i]);
    design.row(i) << p.x() * p.x(), p.x() * p.y(), p.y() * p.y(), p.x(), p.y(), 1.0;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 6>> svd(design, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A second null direction means the five points do not pin down a unique conic.
  if (!(sv(4) > 1e-9 * sv(0))) return std::nullopt;
  const Eigen::Matrix<double, 6, 1> c = svd.matrixV().col(5);
  const auto e = from_conic({c(0), c(1), c(2), c(3), c(4), c(5)});
  if (!e) return std::nullopt;
  const Ellipse out = norm.restore(*e);
  if (!within_radius(out, r_min, r_max)) return std::nullopt;
  return out;
}

std::optional<Ellipse> fit_ellipse_minimal(std::span<const EdgePoint> points, double r_min, double r_max) {
  if (points.size() != 5) return std::nullopt;
  std::array<Vec2, 5> pts;
  for (int i = 0; i < 5; ++i) pts[i] = {points[i].u, points[i].v};
  return fit_ellipse_minimal(std::span<const Vec2>(pts), r_min, r_max);
}

std::optional<Ellipse> fit_ellipse_least_squares(std::span<const Vec2> points) {
  if (points.size() < 5) return std::nullopt;
  const Normalizer norm(points);
  Eigen::Matrix3d s1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d s2 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d s3 = Eigen::Matrix3d::Zero();
  for (const Vec2& raw : points) {
    const Vec2 p = norm.apply(raw);
    const Eigen::Vector3d quad(p.x() * p.x(), p.x() * p.y(), p.y() * p.y());
    const Eigen::Vector3d lin(p.x(), p.y(), 1.0);
    s1 += quad * quad.transpose();
    s2 += quad * lin.transpose();
    s3 += lin * lin.transpose();
  }
  // Reduced scatter matrix (Halir & Flusser's numerically stable form).
  const Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
  if (!s3_lu.isInvertible()) return std::nullopt;
  const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;
  const Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::Matrix3d vecs = es.eigenvectors().real();
  int pick = -1;
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d v = vecs.col(i);
    const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond > best) {
      best = cond;
      pick = i;
    }
  }
  if (pick < 0) return std::nullopt;
  const Eigen::Vector3d a1 = vecs.col(pick);
  const Eigen::Vector3d a2 = t * a1;
  const auto e = from_conic({a1(0), a1(1), a1(2), a2(0), a2(1), a2(2)});
  if (!e) return std::nullopt;
  return norm.restore(*e);
}

double approx_distance(const Conic& q, double u, double v) {
  const double g = conic_gradient(q, u, v).norm();
  const double val = std::abs(conic_value(q, u, v));
  if (g == 0.0) return val == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return val / g;
}

namespace {

int count_inliers(const Conic& q_raw, std::span<const EdgePoint> edges, const RansacParams& params,
                  std::vector<char>* mask) {
  const Conic q = normalize_conic(q_raw);
  const bool polarity = params.max_normal_angle < std::numbers::pi;
  const double min_cos = std::cos(params.max_normal_angle);
  int count = 0;
  if (mask) mask->assign(edges.size(), 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const EdgePoint& p = edges[i];
    const Vec2 grad = conic_gradient(q, p.u, p.v);
    const double gn = grad.norm();
    if (gn == 0.0) continue;
    if (std::abs(conic_value(q, p.u, p.v)) > params.inlier_threshold * gn) continue;
    if (polarity) {
      // Outward normal of the normalized conic is +grad; image gradient must agree.
      const double c = (grad.x() * std::cos(p.direction) + grad.y() * std::sin(p.direction)) / gn;
      if (c < min_cos) continue;
    }
    ++count;
    if (mask) (*mask)[i] = 1;
  }
  return count;
}

}  // namespace

LimbusDetection detect_limbus(std::span<const EdgePoint> edges, const RansacParams& params,
                              std::uint64_t seed) {
  if (!params.valid()) throw Error(Stage::Config, "invalid RANSAC parameters");
  if (edges.size() < 5) throw Error(Stage::Limbus, "too few edge points for an ellipse fit");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);

  std::optional<Ellipse> best;
  int best_count = -1;
  std::array<EdgePoint, 5> sample;
  std::array<std::size_t, 5> idx{};
  for (int it = 0; it < params.iterations; ++it) {
    for (int k = 0; k < 5; ++k) {
      bool fresh;
      do {
        idx[k] = pick(rng);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      } while (!fresh);
      sample[k] = edges[idx[k]];
    }
    const auto model = fit_ellipse_minimal(std::span<const EdgePoint>(sample), params.r_min, params.r_max);
    if (!model) continue;
    const int n = count_inliers(to_conic(*model), edges, params, nullptr);
    if (n > best_count) {  // ties keep the earliest model
      best_count = n;
      best = model;
    }
  }
  if (!best) throw Error(Stage::Limbus, "no ellipse hypothesis within the radius range");

  std::vector<char> mask;
  count_inliers(to_conic(*best), edges, params, &mask);
  std::vector<Vec2> inlier_pts;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (mask[i]) inlier_pts.emplace_back(edges[i].u, edges[i].v);
  }
  if (const auto refined = fit_ellipse_least_squares(inlier_pts);
      refined && within_radius(*refined, params.r_min, params.r_max)) {
    const int n = count_inliers(to_conic(*refined), edges, params, nullptr);
    if (n >= best_count) {
      best = refined;
      best_count = n;
    }
  }

  LimbusDetection det;
  det.ellipse = *best;
  det.inliers = best_count;
  det.support = static_cast<double>(best_count) / static_cast<double>(edges.size());
  det.seed = seed;
  if (det.support < params.min_inlier_fraction) {
    throw Error(Stage::Limbus, "no consensus: best support below the minimum inlier fraction");
  }
  return det;
}

LimbusDetection detect_limbus(const ImageBuffer& img, const RansacParams& params, std::uint64_t seed) {
  const auto edges = extract_edges(img, params);
  return detect_limbus(std::span<const EdgePoint>(edges), params, seed);
}

}  // namespace corneal
