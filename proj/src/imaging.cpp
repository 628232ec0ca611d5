#include "corneal/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "corneal/error.hpp"

namespace corneal {

namespace {

struct Tap {
  int index;
  double weight;
};

// Box-filter taps for each output sample along one axis.
std::vector<std::vector<Tap>> box_taps(int in_size, int out_size) {
  const double ratio = static_cast<double>(in_size) / out_size;
  std::vector<std::vector<Tap>> taps(out_size);
  for (int k = 0; k < out_size; ++k) {
    const double lo = k * ratio;
    const double hi = (k + 1) * ratio;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in_size - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int i = first; i <= last; ++i) {
      const double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (w > 0.0) taps[k].push_back({i, w / ratio});
    }
  }
  return taps;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

ImageBuffer load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(Stage::Io, "corrupt PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(Stage::Io, "corrupt PNG '" + path.string() + "': " + msg);
  }
  return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw Error(Stage::Io, "cannot write PNG '" + path.string() + "': " + image.message);
  }
}

// Next whitespace-delimited PPM header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

ImageBuffer load_ppm(std::ifstream& in, const std::filesystem::path& path) {
  const auto bad = [&](const std::string& why) {
    return Error(Stage::Io, "corrupt PPM header in '" + path.string() + "': " + why);
  };
  if (ppm_token(in) != "P6") throw bad("expected P6");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(in));
    h = std::stoi(ppm_token(in));
    maxval = std::stoi(ppm_token(in));
  } catch (const std::exception&) {
    throw bad("non-numeric field");
  }
  if (w < 1 || h < 1) throw bad("non-positive size");
  if (maxval != 255) throw bad("only 8-bit PPM is supported");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) throw bad("truncated pixel data");
  return ImageBuffer(w, h, std::move(pixels));
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(Stage::Io, "image dimensions must be positive");
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> pixels, double scale)
    : width_(width), height_(height), scale_(scale), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw Error(Stage::Io, "image dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(Stage::Io, "pixel buffer size does not match dimensions");
  }
}

RegionOfInterest RegionOfInterest::scaled(double factor) const {
  return {static_cast<int>(std::lround(u0 * factor)), static_cast<int>(std::lround(v0 * factor)),
          static_cast<int>(std::lround(w * factor)), static_cast<int>(std::lround(h * factor))};
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::Io, "cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  const auto got = in.gcount();
  if (got >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) {
    in.close();
    return load_png(path);
  }
  if (got >= 2 && magic[0] == 'P' && magic[1] == '6') {
    in.clear();
    in.seekg(0);
    return load_ppm(in, path);
  }
  throw Error(Stage::Io, "unsupported image format: '" + path.string() + "'");
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.empty()) throw Error(Stage::Io, "cannot save an empty image");
  const std::string ext = lower_ext(path);
  if (ext == ".png") {
    save_png(img, path);
    return;
  }
  if (ext == ".ppm" || ext == ".pnm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Stage::Io, "cannot write '" + path.string() + "'");
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.data().size()));
    if (!out) throw Error(Stage::Io, "cannot write '" + path.string() + "'");
    return;
  }
  throw Error(Stage::Io, "unsupported image format: '" + path.string() + "'");
}

ImageBuffer crop(const ImageBuffer& img, const RegionOfInterest& roi) {
  if (!roi.inside(img.width(), img.height())) {
    throw Error(Stage::Eye, "region of interest exceeds the image bounds");
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(roi.w) * roi.h * 3);
  const auto src = img.data();
  for (int v = 0; v < roi.h; ++v) {
    const std::size_t from = (static_cast<std::size_t>(roi.v0 + v) * img.width() + roi.u0) * 3;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), roi.w * 3,
                out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(v) * roi.w * 3));
  }
  return ImageBuffer(roi.w, roi.h, std::move(out), img.scale());
}

ImageBuffer rescale(const ImageBuffer& img, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw Error(Stage::Config, "rescale factor must lie in (0, 1]");
  const int ow = static_cast<int>(std::lround(img.width() * factor));
  const int oh = static_cast<int>(std::lround(img.height() * factor));
  if (ow < 8 || oh < 8) throw Error(Stage::Eye, "rescaled image would be smaller than 8 px");
  if (ow == img.width() && oh == img.height()) {
    ImageBuffer copy = img;
    copy.set_scale(img.scale() * factor);
    return copy;
  }
  const auto xt = box_taps(img.width(), ow);
  const auto yt = box_taps(img.height(), oh);
  const auto src = img.data();

  // Horizontal pass into a float buffer, then vertical pass.
  std::vector<float> tmp(static_cast<std::size_t>(ow) * img.height() * 3);
  for (int v = 0; v < img.height(); ++v) {
    const std::size_t row = static_cast<std::size_t>(v) * img.width() * 3;
    for (int k = 0; k < ow; ++k) {
      double acc[3] = {0, 0, 0};
      for (const Tap& t : xt[k]) {
        const std::size_t i = row + static_cast<std::size_t>(t.index) * 3;
        acc[0] += t.weight * src[i];
        acc[1] += t.weight * src[i + 1];
        acc[2] += t.weight * src[i + 2];
      }
      float* dst = &tmp[(static_cast<std::size_t>(v) * ow + k) * 3];
      dst[0] = static_cast<float>(acc[0]);
      dst[1] = static_cast<float>(acc[1]);
      dst[2] = static_cast<float>(acc[2]);
    }
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(ow) * oh * 3);
  std::vector<double> acc(static_cast<std::size_t>(ow) * 3);
  for (int k = 0; k < oh; ++k) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const Tap& t : yt[k]) {
      const float* row = &tmp[static_cast<std::size_t>(t.index) * ow * 3];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.weight * row[i];
    }
    std::uint8_t* dst = &out[static_cast<std::size_t>(k) * ow * 3];
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = to_byte(acc[i]);
  }
  return ImageBuffer(ow, oh, std::move(out), img.scale() * factor);
}

Hsv rgb_to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) return out;  // gray: h = 0
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / delta + 2.0);
  } else {
    h = 60.0 * ((r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Rgb hsv_to_rgb(const Hsv& c) {
  const double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0) / 60.0;
  const double chroma = c.v * c.s;
  const double x = chroma * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = c.v - chroma;
  return {to_byte((r + m) * 255.0), to_byte((g + m) * 255.0), to_byte((b + m) * 255.0)};
}

}  // namespace corneal
