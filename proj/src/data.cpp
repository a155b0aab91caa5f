#include "glnn/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "glnn/rng.hpp"

namespace glnn {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in) {
    z_stream strm{};
    if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK) {
        throw std::runtime_error("zlib: inflateInit2 failed");
    }
    std::vector<unsigned char> out;
    unsigned char buf[1 << 16];
    strm.next_in = const_cast<unsigned char*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = buf;
        strm.avail_out = sizeof(buf);
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw LengthError("gzip stream damaged or truncated");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - strm.avail_out));
    }
    inflateEnd(&strm);
    return out;
}

std::vector<unsigned char> read_maybe_gzip(const std::string& path) {
    std::vector<unsigned char> bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
        return gunzip(bytes);
    }
    return bytes;
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void put_be32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

IdxImages load_idx_images(const std::string& path) {
    const auto bytes = read_maybe_gzip(path);
    if (bytes.size() < 16) {
        throw LengthError(path + ": too short for an IDX image header");
    }
    const std::uint32_t magic = be32(bytes, 0);
    if (magic != kImagesMagic) {
        throw FormatError(path + ": bad image magic");
    }
    IdxImages out;
    out.count = be32(bytes, 4);
    out.rows = be32(bytes, 8);
    out.cols = be32(bytes, 12);
    const std::size_t need = 16 + out.count * out.rows * out.cols;
    if (bytes.size() < need) {
        throw LengthError(path + ": image data truncated");
    }
    out.pixels.assign(bytes.begin() + 16, bytes.begin() + static_cast<std::ptrdiff_t>(need));
    return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    const auto bytes = read_maybe_gzip(path);
    if (bytes.size() < 8) {
        throw LengthError(path + ": too short for an IDX label header");
    }
    const std::uint32_t magic = be32(bytes, 0);
    if (magic != kLabelsMagic) {
        throw FormatError(path + ": bad label magic");
    }
    const std::size_t count = be32(bytes, 4);
    if (bytes.size() < 8 + count) {
        throw LengthError(path + ": label data truncated");
    }
    return std::vector<std::uint8_t>(bytes.begin() + 8,
                                     bytes.begin() + static_cast<std::ptrdiff_t>(8 + count));
}

void write_idx_images(const std::string& path, const IdxImages& images) {
    if (images.pixels.size() != images.count * images.rows * images.cols) {
        throw LengthError("write_idx_images: pixel buffer does not match header");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    put_be32(os, kImagesMagic);
    put_be32(os, static_cast<std::uint32_t>(images.count));
    put_be32(os, static_cast<std::uint32_t>(images.rows));
    put_be32(os, static_cast<std::uint32_t>(images.cols));
    os.write(reinterpret_cast<const char*>(images.pixels.data()),
             static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    put_be32(os, kLabelsMagic);
    put_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
}

std::vector<LabeledImage> make_dataset(const IdxImages& images,
                                       const std::vector<std::uint8_t>& labels) {
    if (images.count != labels.size()) {
        throw PairingError("dataset: " + std::to_string(images.count) + " images vs " +
                           std::to_string(labels.size()) + " labels");
    }
    if (images.rows != kImageSide || images.cols != kImageSide) {
        throw FormatError("dataset: expected 28x28 images, got " + std::to_string(images.rows) +
                          "x" + std::to_string(images.cols));
    }
    std::vector<LabeledImage> out(images.count);
    for (std::size_t i = 0; i < images.count; ++i) {
        if (labels[i] > 9) {
            throw FormatError("dataset: label " + std::to_string(labels[i]) + " out of range");
        }
        out[i].label = labels[i];
        out[i].pixels.resize(kImagePixels);
        const std::uint8_t* src = &images.pixels[i * kImagePixels];
        for (std::size_t p = 0; p < kImagePixels; ++p) {
            out[i].pixels[p] = src[p] / 255.0;
        }
    }
    return out;
}

std::vector<double> rotate_square(const std::vector<double>& pixels, std::size_t side,
                                  double degrees) {
    if (pixels.size() != side * side) {
        throw std::invalid_argument("rotate_square: pixel count does not match side");
    }
    const double theta = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double mid = (static_cast<double>(side) - 1.0) / 2.0;

    std::vector<double> out(side * side, 0.0);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t col = 0; col < side; ++col) {
            // inverse mapping: rotate the output coordinate back by theta
            const double dy = static_cast<double>(r) - mid;
            const double dx = static_cast<double>(col) - mid;
            const double sy = mid + (c * dy - s * dx);
            const double sx = mid + (s * dy + c * dx);

            const double fy = std::floor(sy), fx = std::floor(sx);
            const double wy = sy - fy, wx = sx - fx;
            const auto sample = [&](double y, double x) -> double {
                if (y < 0.0 || x < 0.0 || y >= static_cast<double>(side) ||
                    x >= static_cast<double>(side)) {
                    return 0.0;
                }
                return pixels[static_cast<std::size_t>(y) * side + static_cast<std::size_t>(x)];
            };
            out[r * side + col] = (1.0 - wy) * ((1.0 - wx) * sample(fy, fx) +
                                                wx * sample(fy, fx + 1.0)) +
                                  wy * ((1.0 - wx) * sample(fy + 1.0, fx) +
                                        wx * sample(fy + 1.0, fx + 1.0));
        }
    }
    return out;
}

LabeledImage rotate_image(const LabeledImage& img, double degrees) {
    if (!(degrees >= -45.0 && degrees <= 45.0)) {
        throw std::domain_error("rotate_image: angle must lie in [-45, 45] degrees");
    }
    LabeledImage out;
    out.label = img.label;
    out.pixels = rotate_square(img.pixels, kImageSide, degrees);
    return out;
}

std::vector<LabeledImage> augment_rotate(const std::vector<LabeledImage>& dataset,
                                         double angle_range, std::uint64_t seed) {
    if (!(angle_range >= 0.0 && angle_range <= 45.0)) {
        throw std::domain_error("augment_rotate: angle range must lie in [0, 45] degrees");
    }
    std::vector<LabeledImage> out(dataset.size());
    SplitMix64 root(seed);
    const std::int64_t n = static_cast<std::int64_t>(dataset.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        SplitMix64 stream = root.derive(static_cast<std::uint64_t>(i));
        const double angle = stream.uniform(-angle_range, angle_range);
        out[static_cast<std::size_t>(i)] = rotate_image(dataset[static_cast<std::size_t>(i)], angle);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("kfold_split: need at least 2 folds");
    }
    if (k > n) {
        throw std::invalid_argument("kfold_split: more folds than examples");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(seed);
    rng.shuffle(order.data(), order.size());

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.resize(n);
    // first n%k folds take one extra example
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::size_t len = base + (fold < extra ? 1 : 0);
        for (std::size_t j = 0; j < len; ++j) {
            plan.assignments[order[pos++]] = fold;
        }
    }
    return plan;
}

std::vector<double> one_hot(int label) {
    if (label < 0 || label > 9) {
        throw std::out_of_range("one_hot: label must lie in 0..9");
    }
    std::vector<double> v(kClasses, 0.0);
    v[static_cast<std::size_t>(label)] = 1.0;
    return v;
}

Tensor images_to_batch(const std::vector<LabeledImage>& dataset,
                       const std::vector<std::size_t>& indices) {
    Tensor batch({indices.size(), 1, kImageSide, kImageSide});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& img = dataset.at(indices[i]);
        std::copy(img.pixels.begin(), img.pixels.end(), batch.data.begin() + i * kImagePixels);
    }
    return batch;
}

Tensor labels_to_targets(const std::vector<LabeledImage>& dataset,
                         const std::vector<std::size_t>& indices) {
    Tensor targets({indices.size(), kClasses});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto row = one_hot(dataset.at(indices[i]).label);
        std::copy(row.begin(), row.end(), targets.data.begin() + i * kClasses);
    }
    return targets;
}

// ---- native cache -----------------------------------------------------------

namespace {

constexpr char kCacheMagic[4] = {'G', 'L', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

void put_le32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_le64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t le64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

void save_cache(const std::string& path, const std::vector<LabeledImage>& dataset) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    os.write(kCacheMagic, 4);
    put_le32(os, kCacheVersion);
    put_le64(os, dataset.size());
    for (const auto& img : dataset) {
        const unsigned char lbl = static_cast<unsigned char>(img.label);
        os.write(reinterpret_cast<const char*>(&lbl), 1);
        for (double p : img.pixels) {
            std::uint64_t bits;
            std::memcpy(&bits, &p, 8);
            put_le64(os, bits);
        }
    }
    if (!os) {
        throw std::runtime_error("cache write failed for " + path);
    }
}

std::vector<LabeledImage> load_cache(const std::string& path) {
    const auto bytes = read_all(path);
    if (bytes.size() < 16) {
        throw LengthError(path + ": too short for a cache header");
    }
    if (std::memcmp(bytes.data(), kCacheMagic, 4) != 0) {
        throw FormatError(path + ": bad cache magic");
    }
    std::uint32_t version = 0;
    for (int i = 3; i >= 0; --i) version = (version << 8) | bytes[4 + i];
    if (version != kCacheVersion) {
        throw FormatError(path + ": unsupported cache version " + std::to_string(version));
    }
    const std::uint64_t count = le64(&bytes[8]);
    const std::size_t stride = 1 + kImagePixels * 8;
    if (bytes.size() < 16 + count * stride) {
        throw LengthError(path + ": cache data truncated");
    }
    std::vector<LabeledImage> out(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* rec = &bytes[16 + i * stride];
        if (rec[0] > 9) {
            throw FormatError(path + ": cached label out of range");
        }
        out[i].label = rec[0];
        out[i].pixels.resize(kImagePixels);
        for (std::size_t p = 0; p < kImagePixels; ++p) {
            const std::uint64_t bits = le64(rec + 1 + p * 8);
            double v;
            std::memcpy(&v, &bits, 8);
            out[i].pixels[p] = v;
        }
    }
    return out;
}

}  // namespace glnn
