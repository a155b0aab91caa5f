#include "glnn/synth_digits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glnn {

namespace {

struct Pt {
    double x, y;
};
using Path = std::vector<Pt>;

// sampled elliptic arc, angles in radians, y axis pointing down
Path arc(double cx, double cy, double rx, double ry, double a0, double a1, int n) {
    Path p;
    for (int i = 0; i <= n; ++i) {
        const double t = a0 + (a1 - a0) * i / n;
        p.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    return p;
}

Path line(std::initializer_list<Pt> pts) {
    return Path(pts);
}

// glyph skeletons in a unit box, y down
std::vector<Path> glyph(int digit) {
    constexpr double pi = std::numbers::pi;
    switch (digit) {
        case 0:
            return {arc(0.50, 0.50, 0.26, 0.36, 0, 2 * pi, 20)};
        case 1:
            return {line({{0.36, 0.30}, {0.54, 0.15}}),
                    line({{0.54, 0.15}, {0.54, 0.84}}),
                    line({{0.38, 0.84}, {0.68, 0.84}})};
        case 2: {
            Path top = arc(0.50, 0.33, 0.23, 0.18, -pi, 0, 10);
            top.push_back({0.30, 0.82});
            top.push_back({0.74, 0.82});
            return {top};
        }
        case 3:
            return {arc(0.48, 0.33, 0.20, 0.16, -0.80 * pi, 0.55 * pi, 12),
                    arc(0.48, 0.66, 0.22, 0.18, -0.50 * pi, 0.80 * pi, 12)};
        case 4:
            return {line({{0.62, 0.14}, {0.28, 0.60}}),
                    line({{0.28, 0.60}, {0.78, 0.60}}),
                    line({{0.62, 0.14}, {0.62, 0.86}})};
        case 5: {
            Path bowl = line({{0.34, 0.46}});
            const Path a = arc(0.48, 0.64, 0.21, 0.19, -0.55 * pi, 0.80 * pi, 12);
            bowl.insert(bowl.end(), a.begin(), a.end());
            return {line({{0.72, 0.16}, {0.34, 0.16}}),
                    line({{0.34, 0.16}, {0.34, 0.46}}), bowl};
        }
        case 6: {
            Path sweep = line({{0.64, 0.14}, {0.48, 0.28}, {0.38, 0.44}, {0.335, 0.60}});
            return {sweep, arc(0.50, 0.66, 0.17, 0.16, -pi, pi, 16)};
        }
        case 7:
            return {line({{0.26, 0.17}, {0.74, 0.17}, {0.44, 0.84}})};
        case 8:
            return {arc(0.50, 0.33, 0.16, 0.14, 0, 2 * pi, 16),
                    arc(0.50, 0.66, 0.20, 0.17, 0, 2 * pi, 16)};
        case 9: {
            return {arc(0.50, 0.34, 0.17, 0.15, 0, 2 * pi, 16),
                    line({{0.67, 0.38}, {0.64, 0.60}, {0.55, 0.84}})};
        }
        default:
            throw std::out_of_range("glyph: digit must lie in 0..9");
    }
}

double dist_to_segment(double px, double py, Pt a, Pt b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0);
    }
    const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

LabeledImage render_digit(int digit, SplitMix64& stream) {
    std::vector<Path> paths = glyph(digit);

    // per-image jitter: placement, size, ink, pen, and pointwise wobble
    const double scale = stream.uniform(0.86, 1.08) * 21.0;
    const double tx = 13.5 + stream.uniform(-1.4, 1.4);
    const double ty = 13.5 + stream.uniform(-1.4, 1.4);
    const double pen = stream.uniform(1.00, 1.55);
    const double ink = stream.uniform(0.85, 1.0);
    for (Path& p : paths) {
        for (Pt& pt : p) {
            pt.x = tx + (pt.x - 0.5 + stream.uniform(-0.018, 0.018)) * scale;
            pt.y = ty + (pt.y - 0.5 + stream.uniform(-0.018, 0.018)) * scale;
        }
    }

    LabeledImage img;
    img.label = digit;
    img.pixels.assign(kImagePixels, 0.0);
    constexpr double aa = 0.9;  // antialias band, pixels
    for (std::size_t r = 0; r < kImageSide; ++r) {
        for (std::size_t c = 0; c < kImageSide; ++c) {
            double best = 1e9;
            for (const Path& p : paths) {
                for (std::size_t i = 0; i + 1 < p.size(); ++i) {
                    best = std::min(best, dist_to_segment(static_cast<double>(c),
                                                          static_cast<double>(r), p[i], p[i + 1]));
                }
            }
            const double v = std::clamp((pen + aa / 2.0 - best) / aa, 0.0, 1.0);
            img.pixels[r * kImageSide + c] = ink * v;
        }
    }

    // faint sensor noise
    for (double& p : img.pixels) {
        p = std::clamp(p + stream.uniform(0.0, 0.03), 0.0, 1.0);
    }
    return img;
}

std::vector<LabeledImage> synth_digits(std::size_t count, std::uint64_t seed) {
    std::vector<LabeledImage> out(count);
    SplitMix64 root(seed);
    const std::int64_t n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        SplitMix64 stream = root.derive(static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = render_digit(static_cast<int>(i % 10), stream);
    }
    return out;
}

IdxImages quantize_images(const std::vector<LabeledImage>& dataset) {
    IdxImages idx;
    idx.count = dataset.size();
    idx.rows = kImageSide;
    idx.cols = kImageSide;
    idx.pixels.resize(dataset.size() * kImagePixels);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t p = 0; p < kImagePixels; ++p) {
            const double v = std::clamp(dataset[i].pixels[p], 0.0, 1.0);
            idx.pixels[i * kImagePixels + p] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    return idx;
}

}  // namespace glnn
