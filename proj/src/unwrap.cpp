#include "corneal/unwrap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "corneal/error.hpp"

namespace corneal {

namespace {

constexpr double kPi = std::numbers::pi;

struct PixelBox {
  int u0, u1, v0, v1;
};

PixelBox ellipse_box(const Ellipse& e, int width, int height) {
  const double c = std::cos(e.theta), s = std::sin(e.theta);
  const double hx = std::sqrt(e.a * e.a * c * c + e.b * e.b * s * s);
  const double hy = std::sqrt(e.a * e.a * s * s + e.b * e.b * c * c);
  return {std::max(0, static_cast<int>(std::floor(e.cx - hx))),
          std::min(width - 1, static_cast<int>(std::ceil(e.cx + hx))),
          std::max(0, static_cast<int>(std::floor(e.cy - hy))),
          std::min(height - 1, static_cast<int>(std::ceil(e.cy + hy)))};
}

std::int64_t cross(const std::pair<int, int>& o, const std::pair<int, int>& a, const std::pair<int, int>& b) {
  return static_cast<std::int64_t>(a.first - o.first) * (b.second - o.second) -
         static_cast<std::int64_t>(a.second - o.second) * (b.first - o.first);
}

// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
std::vector<std::pair<int, int>> convex_hull(std::vector<std::pair<int, int>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<std::pair<int, int>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

EnvironmentMap::EnvironmentMap(int width, int height)
    : width_(width),
      height_(height),
      color_(static_cast<std::size_t>(width) * height),
      hits_(color_.size(), 0),
      filled_(color_.size(), 0),
      origin_(color_.size(), Vec3::Zero()) {}

Vec3 EnvironmentMap::texel_direction(int i, int j) const {
  const double lon = 2.0 * kPi * (i + 0.5) / width_ - kPi;
  const double lat = kPi * (j + 0.5) / height_ - kPi / 2.0;
  return {std::cos(lat) * std::sin(lon), std::sin(lat), -std::cos(lat) * std::cos(lon)};
}

std::pair<int, int> EnvironmentMap::texel_of(const Vec3& dir_in) const {
  const Vec3 d = dir_in.normalized();
  const double lon = std::atan2(d.x(), -d.z());
  const double lat = std::asin(std::clamp(d.y(), -1.0, 1.0));
  const int i = static_cast<int>(std::floor((lon + kPi) / (2.0 * kPi) * width_));
  const int j = static_cast<int>(std::floor((lat + kPi / 2.0) / kPi * height_));
  return {std::clamp(i, 0, width_ - 1), std::clamp(j, 0, height_ - 1)};
}

std::size_t EnvironmentMap::observed_count() const {
  return static_cast<std::size_t>(std::count_if(hits_.begin(), hits_.end(), [](auto h) { return h > 0; }));
}

std::size_t EnvironmentMap::filled_count() const {
  return static_cast<std::size_t>(std::count(filled_.begin(), filled_.end(), std::uint8_t{1}));
}

std::uint64_t EnvironmentMap::total_hits() const {
  std::uint64_t n = 0;
  for (auto h : hits_) n += h;
  return n;
}

ImageBuffer EnvironmentMap::to_image() const {
  ImageBuffer img(width_, height_);
  for (int j = 0; j < height_; ++j) {
    for (int i = 0; i < width_; ++i) {
      if (covered(i, j)) img.set(i, j, color(i, j));
    }
  }
  return img;
}

std::optional<CornealSample> back_project(const PinholeCamera& cam, const EyePose& pose, int u, int v) {
  const Ray ray = pixel_ray(cam, u, v);
  const auto hit = intersect_sphere(ray, pose.cornea);
  if (!hit) return std::nullopt;
  if (hit->normal.dot(ray.dir) >= 0.0) return std::nullopt;  // back-facing
  if (pose.axis.dot(hit->point - pose.limbus_center) < 0.0) return std::nullopt;  // behind the limbus plane
  CornealSample s;
  s.u = u;
  s.v = v;
  s.point = hit->point;
  s.normal = hit->normal;
  s.reflected = reflect(ray.dir, hit->normal);
  return s;
}

std::vector<CornealSample> corneal_samples(const ImageBuffer& img, const Ellipse& e, const EyePose& pose,
                                           const PinholeCamera& cam) {
  const Conic q = normalize_conic(to_conic(e));
  const PixelBox box = ellipse_box(e, img.width(), img.height());
  std::vector<CornealSample> out;
  for (int v = box.v0; v <= box.v1; ++v) {
    for (int u = box.u0; u <= box.u1; ++u) {
      if (!(conic_value(q, u, v) < 0.0)) continue;
      auto s = back_project(cam, pose, u, v);
      if (!s) continue;
      s->color = img.at(u, v);
      out.push_back(*s);
    }
  }
  if (out.empty()) throw Error(Stage::Unwrap, "no limbus pixel hits the corneal cap");
  return out;
}

EnvironmentMap unwrap(std::span<const CornealSample> samples, int width, int height) {
  if (width < 64 || height < 64) throw Error(Stage::Config, "environment map must be at least 64x64");
  EnvironmentMap map(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::array<double, 3>> sum(n, {0.0, 0.0, 0.0});
  std::vector<Vec3> origin_sum(n, Vec3::Zero());

  for (const CornealSample& s : samples) {
    const auto [i, j] = map.texel_of(s.reflected);
    const std::size_t k = map.index(i, j);
    sum[k][0] += s.color.r;
    sum[k][1] += s.color.g;
    sum[k][2] += s.color.b;
    origin_sum[k] += s.point;
    ++map.hits_[k];
  }

  std::vector<std::pair<int, int>> observed;
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const std::size_t k = map.index(i, j);
      const auto h = map.hits_[k];
      if (h == 0) continue;
      map.color_[k] = {static_cast<std::uint8_t>(std::lround(sum[k][0] / h)),
                       static_cast<std::uint8_t>(std::lround(sum[k][1] / h)),
                       static_cast<std::uint8_t>(std::lround(sum[k][2] / h))};
      map.origin_[k] = origin_sum[k] / static_cast<double>(h);
      observed.emplace_back(i, j);
    }
  }
  if (observed.size() < 3) return map;

  // Row spans of the convex hull of the observed texel centers.
  const auto hull = convex_hull(observed);
  std::vector<double> lo(height, std::numeric_limits<double>::infinity());
  std::vector<double> hi(height, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const auto [x0, y0] = hull[e];
    const auto [x1, y1] = hull[(e + 1) % hull.size()];
    const int ya = std::min(y0, y1), yb = std::max(y0, y1);
    for (int y = ya; y <= yb; ++y) {
      const double x = y0 == y1 ? 0.0 : x0 + (x1 - x0) * static_cast<double>(y - y0) / (y1 - y0);
      if (y0 == y1) {
        lo[y] = std::min({lo[y], static_cast<double>(x0), static_cast<double>(x1)});
        hi[y] = std::max({hi[y], static_cast<double>(x0), static_cast<double>(x1)});
      } else {
        lo[y] = std::min(lo[y], x);
        hi[y] = std::max(hi[y], x);
      }
    }
  }
  const auto in_hull = [&](int i, int j) { return i >= lo[j] - 1e-9 && i <= hi[j] + 1e-9; };

  // Multi-source breadth-first propagation of the observed texels into the holes.
  std::vector<std::size_t> source(n, std::numeric_limits<std::size_t>::max());
  std::deque<std::pair<int, int>> queue;
  for (const auto& [i, j] : observed) {
    source[map.index(i, j)] = map.index(i, j);
    queue.emplace_back(i, j);
  }
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const std::size_t from = source[map.index(i, j)];
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ni = i + di, nj = j + dj;
        if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= width || nj >= height) continue;
        const std::size_t k = map.index(ni, nj);
        if (source[k] != std::numeric_limits<std::size_t>::max() || !in_hull(ni, nj)) continue;
        source[k] = from;
        map.color_[k] = map.color_[from];
        map.origin_[k] = map.origin_[from];
        map.filled_[k] = 1;
        queue.emplace_back(ni, nj);
      }
    }
  }
  return map;
}

double angular_resolution(const Ellipse& e, const EyePose& pose, const PinholeCamera& cam) {
  const Conic q = normalize_conic(to_conic(e));
  // Only pixels of the grid count; a camera without a size is unbounded.
  const int big = std::numeric_limits<int>::max() / 2;
  const PixelBox box = ellipse_box(e, cam.width > 0 ? cam.width : big, cam.height > 0 ? cam.height : big);
  std::vector<double> angles;
  for (int v = box.v0; v <= box.v1; ++v) {
    std::optional<CornealSample> prev;
    for (int u = box.u0; u <= box.u1; ++u) {
      std::optional<CornealSample> cur;
      if (conic_value(q, u, v) < 0.0) cur = back_project(cam, pose, u, v);
      if (cur && prev) angles.push_back(angle_between(prev->reflected, cur->reflected));
      prev = cur;
    }
  }
  if (angles.empty()) return 0.0;
  auto mid = angles.begin() + static_cast<std::ptrdiff_t>(angles.size() / 2);
  std::nth_element(angles.begin(), mid, angles.end());
  return *mid * 180.0 / kPi;
}

}  // namespace corneal
