#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glnn/data.hpp"
#include "glnn/rng.hpp"
#include "glnn/synth_digits.hpp"

using namespace glnn;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void append_be32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v >> 24));
    s.push_back(static_cast<char>(v >> 16));
    s.push_back(static_cast<char>(v >> 8));
    s.push_back(static_cast<char>(v));
}

void gzip_file(const std::string& src, const std::string& dst) {
    const std::string raw = slurp(src);
    z_stream strm{};
    REQUIRE(deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8,
                         Z_DEFAULT_STRATEGY) == Z_OK);
    std::vector<unsigned char> out(raw.size() + 1024);
    strm.next_in = reinterpret_cast<unsigned char*>(const_cast<char*>(raw.data()));
    strm.avail_in = static_cast<uInt>(raw.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    REQUIRE(deflate(&strm, Z_FINISH) == Z_STREAM_END);
    const std::size_t n = out.size() - strm.avail_out;
    deflateEnd(&strm);
    spit(dst, std::string(reinterpret_cast<char*>(out.data()), n));
}

// four 3x2 images with distinct byte patterns, assembled by hand
std::string tiny_idx_fixture() {
    std::string s;
    append_be32(s, 0x00000803);
    append_be32(s, 4);
    append_be32(s, 3);
    append_be32(s, 2);
    for (int img = 0; img < 4; ++img) {
        for (int p = 0; p < 6; ++p) {
            s.push_back(static_cast<char>(img * 50 + p));
        }
    }
    return s;
}

}  // namespace

TEST_CASE("idx image fixture parses and round-trips byte for byte") {
    const std::string path = "data_fixture.idx";
    const std::string bytes = tiny_idx_fixture();
    spit(path, bytes);

    const IdxImages imgs = load_idx_images(path);
    CHECK(imgs.count == 4);
    CHECK(imgs.rows == 3);
    CHECK(imgs.cols == 2);
    REQUIRE(imgs.pixels.size() == 24);
    for (std::size_t img = 0; img < 4; ++img) {
        for (std::size_t p = 0; p < 6; ++p) {
            CHECK(imgs.pixels[img * 6 + p] == img * 50 + p);
        }
    }

    const std::string out_path = "data_fixture_out.idx";
    write_idx_images(out_path, imgs);
    CHECK(slurp(out_path) == bytes);
    std::remove(path.c_str());
    std::remove(out_path.c_str());
}

TEST_CASE("idx label round trip") {
    const std::string path = "data_labels.idx";
    const std::vector<std::uint8_t> labels = {3, 1, 4, 1, 5, 9};
    write_idx_labels(path, labels);
    CHECK(load_idx_labels(path) == labels);

    // byte-level layout: magic, count, then raw labels
    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 8 + labels.size());
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);
    CHECK(static_cast<unsigned char>(bytes[7]) == 6);
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);
    std::remove(path.c_str());
}

TEST_CASE("idx loaders reject malformed files") {
    const std::string path = "data_bad.idx";

    spit(path, "");
    CHECK_THROWS_AS(load_idx_images(path), LengthError);
    CHECK_THROWS_AS(load_idx_labels(path), LengthError);

    // wrong magic (vector-of-bytes type code)
    std::string bad;
    append_be32(bad, 0x00000802);
    append_be32(bad, 0);
    append_be32(bad, 0);
    append_be32(bad, 0);
    spit(path, bad);
    CHECK_THROWS_AS(load_idx_images(path), FormatError);
    CHECK_THROWS_AS(load_idx_labels(path), FormatError);

    // header promises more pixels than the file holds
    std::string trunc = tiny_idx_fixture();
    trunc.resize(trunc.size() - 10);
    spit(path, trunc);
    CHECK_THROWS_AS(load_idx_images(path), LengthError);

    std::string lab;
    append_be32(lab, 0x00000801);
    append_be32(lab, 100);
    lab.push_back('\x01');
    spit(path, lab);
    CHECK_THROWS_AS(load_idx_labels(path), LengthError);

    std::remove(path.c_str());
    CHECK_THROWS_AS(load_idx_images("data_no_such.idx"), std::runtime_error);
}

TEST_CASE("gzip-compressed idx files load transparently") {
    const std::string plain = "data_gz_plain.idx";
    const std::string packed = "data_gz.idx.gz";
    spit(plain, tiny_idx_fixture());
    gzip_file(plain, packed);

    const IdxImages a = load_idx_images(plain);
    const IdxImages b = load_idx_images(packed);
    CHECK(a.count == b.count);
    CHECK(a.pixels == b.pixels);

    // a damaged gzip stream reads as truncation
    std::string gz = slurp(packed);
    gz.resize(gz.size() / 2);
    spit(packed, gz);
    CHECK_THROWS_AS(load_idx_images(packed), LengthError);

    std::remove(plain.c_str());
    std::remove(packed.c_str());
}

TEST_CASE("dataset assembly pairs, validates and normalizes") {
    IdxImages imgs;
    imgs.count = 2;
    imgs.rows = 28;
    imgs.cols = 28;
    imgs.pixels.assign(2 * 784, 0);
    imgs.pixels[0] = 255;
    imgs.pixels[1] = 128;
    imgs.pixels[784] = 51;

    const std::vector<LabeledImage> ds = make_dataset(imgs, {7, 0});
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].label == 7);
    CHECK(ds[1].label == 0);
    CHECK(ds[0].pixels[0] == 1.0);
    CHECK(ds[0].pixels[1] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(ds[1].pixels[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(ds[1].pixels[1] == 0.0);

    CHECK_THROWS_AS(make_dataset(imgs, {7}), PairingError);
    CHECK_THROWS_AS(make_dataset(imgs, {7, 10}), FormatError);
    IdxImages odd = imgs;
    odd.rows = 27;
    odd.pixels.resize(2 * 27 * 28);
    CHECK_THROWS_AS(make_dataset(odd, {7, 0}), FormatError);
}

TEST_CASE("zero rotation is the identity") {
    SplitMix64 rng(5);
    std::vector<double> img(784);
    for (double& v : img) v = rng.uniform(0.0, 1.0);
    const std::vector<double> out = rotate_square(img, 28, 0.0);
    CHECK(out == img);
}

TEST_CASE("rotation centers on the middle pixel") {
    // odd side: the exact center must be a fixed point at any angle
    std::vector<double> img(27 * 27, 0.0);
    img[13 * 27 + 13] = 1.0;
    const std::vector<double> out = rotate_square(img, 27, 45.0);
    CHECK(out[13 * 27 + 13] == 1.0);
    double off_center = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i != 13 * 27 + 13) off_center = std::max(off_center, out[i]);
    }
    CHECK(off_center < 0.5);
}

TEST_CASE("rotating forward and back approximately restores a smooth image") {
    // gaussian bump, smooth enough for bilinear interpolation to track
    std::vector<double> img(784);
    for (std::size_t r = 0; r < 28; ++r) {
        for (std::size_t c = 0; c < 28; ++c) {
            const double dy = static_cast<double>(r) - 13.5;
            const double dx = static_cast<double>(c) - 13.5;
            img[r * 28 + c] = std::exp(-(dx * dx + dy * dy) / (2.0 * 16.0));
        }
    }
    const std::vector<double> there = rotate_square(img, 28, 17.0);
    const std::vector<double> back = rotate_square(there, 28, -17.0);
    double max_err = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        max_err = std::max(max_err, std::abs(back[i] - img[i]));
    }
    CHECK(max_err < 0.15);
}

TEST_CASE("rotation preserves label and pixel range") {
    SplitMix64 rng(13);
    LabeledImage img;
    img.label = 4;
    img.pixels.resize(784);
    for (double& v : img.pixels) v = rng.uniform(0.0, 1.0);

    const LabeledImage out = rotate_image(img, 30.0);
    CHECK(out.label == 4);
    for (double v : out.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(rotate_image(img, 45.1), std::domain_error);
    CHECK_THROWS_AS(rotate_image(img, -45.1), std::domain_error);
}

TEST_CASE("rotation augmentation is deterministic and label-preserving") {
    const std::vector<LabeledImage> base = synth_digits(20, 99);
    const auto a = augment_rotate(base, 30.0, 7);
    const auto b = augment_rotate(base, 30.0, 7);
    REQUIRE(a.size() == base.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].label == base[i].label);
        CHECK(a[i].pixels == b[i].pixels);
    }

    // another seed rotates differently
    const auto c = augment_rotate(base, 30.0, 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i) {
        any_diff = a[i].pixels != c[i].pixels;
    }
    CHECK(any_diff);

    // zero range degenerates to the identity
    const auto d = augment_rotate(base, 0.0, 7);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].pixels == base[i].pixels);

    CHECK_THROWS_AS(augment_rotate(base, 45.5, 7), std::domain_error);
    CHECK_THROWS_AS(augment_rotate(base, -1.0, 7), std::domain_error);
}

TEST_CASE("k-fold split partitions the dataset") {
    const FoldPlan plan = kfold_split(10000, 10, 42);
    CHECK(plan.k == 10);
    std::size_t total = 0;
    for (std::size_t f = 0; f < 10; ++f) {
        const auto test = plan.test_indices(f);
        CHECK(test.size() == 1000);
        const auto train = plan.train_indices(f);
        CHECK(train.size() == 9000);
        total += test.size();

        // train and test are disjoint and together cover everything
        std::set<std::size_t> seen(test.begin(), test.end());
        for (std::size_t idx : train) CHECK(seen.insert(idx).second);
        CHECK(seen.size() == 10000);
    }
    CHECK(total == 10000);
}

TEST_CASE("k-fold split handles remainders and edge sizes") {
    const FoldPlan plan = kfold_split(10, 3, 1);
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < 3; ++f) sizes.push_back(plan.test_indices(f).size());
    CHECK(sizes == std::vector<std::size_t>{4, 3, 3});

    const FoldPlan unit = kfold_split(10, 10, 1);
    for (std::size_t f = 0; f < 10; ++f) CHECK(unit.test_indices(f).size() == 1);

    CHECK_THROWS_AS(kfold_split(5, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(kfold_split(5, 1, 1), std::invalid_argument);
}

TEST_CASE("k-fold split is deterministic in the seed") {
    const FoldPlan a = kfold_split(500, 5, 11);
    const FoldPlan b = kfold_split(500, 5, 11);
    CHECK(a.assignments == b.assignments);
    const FoldPlan c = kfold_split(500, 5, 12);
    CHECK(a.assignments != c.assignments);
}

TEST_CASE("one-hot encoding") {
    const std::vector<double> v = one_hot(3);
    REQUIRE(v.size() == 10);
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sum += v[i];
        CHECK(v[i] == (i == 3 ? 1.0 : 0.0));
    }
    CHECK(sum == 1.0);
    CHECK_THROWS_AS(one_hot(-1), std::out_of_range);
    CHECK_THROWS_AS(one_hot(10), std::out_of_range);
}

TEST_CASE("batch assembly from dataset rows") {
    const std::vector<LabeledImage> ds = synth_digits(6, 3);
    const std::vector<std::size_t> idx = {4, 0, 2};
    const Tensor batch = images_to_batch(ds, idx);
    const Tensor targets = labels_to_targets(ds, idx);
    CHECK(batch.shape == std::vector<std::size_t>{3, 1, 28, 28});
    CHECK(targets.shape == std::vector<std::size_t>{3, 10});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t p = 0; p < 784; ++p) {
            CHECK(batch.data[i * 784 + p] == ds[idx[i]].pixels[p]);
        }
        for (std::size_t k = 0; k < 10; ++k) {
            const double expect = (static_cast<int>(k) == ds[idx[i]].label) ? 1.0 : 0.0;
            CHECK(targets.at(i, k) == expect);
        }
    }
}

TEST_CASE("dataset cache round trip is exact") {
    const std::vector<LabeledImage> ds = augment_rotate(synth_digits(12, 17), 25.0, 17);
    const std::string path = "data_cache.glds";
    save_cache(path, ds);
    const std::vector<LabeledImage> back = load_cache(path);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back[i].label == ds[i].label);
        CHECK(back[i].pixels == ds[i].pixels);
    }
    std::remove(path.c_str());
}

TEST_CASE("dataset cache rejects malformed files") {
    const std::string path = "data_cache_bad.glds";

    spit(path, "GLXXjunkjunkjunk");
    CHECK_THROWS_AS(load_cache(path), FormatError);

    const std::vector<LabeledImage> ds = synth_digits(2, 1);
    save_cache(path, ds);
    std::string bytes = slurp(path);

    // bump the version field
    std::string versioned = bytes;
    versioned[4] = 2;
    spit(path, versioned);
    CHECK_THROWS_AS(load_cache(path), FormatError);

    // cut off mid-record
    std::string trunc = bytes;
    trunc.resize(trunc.size() - 100);
    spit(path, trunc);
    CHECK_THROWS_AS(load_cache(path), LengthError);

    // corrupt a stored label
    std::string badlabel = bytes;
    badlabel[16] = 11;
    spit(path, badlabel);
    CHECK_THROWS_AS(load_cache(path), FormatError);

    std::remove(path.c_str());
}

TEST_CASE("synthetic digits are deterministic and balanced") {
    const std::vector<LabeledImage> a = synth_digits(30, 123);
    const std::vector<LabeledImage> b = synth_digits(30, 123);
    REQUIRE(a.size() == 30);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].label == static_cast<int>(i % 10));
        CHECK(a[i].pixels == b[i].pixels);
    }

    const std::vector<LabeledImage> c = synth_digits(30, 124);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i) {
        any_diff = a[i].pixels != c[i].pixels;
    }
    CHECK(any_diff);
}

TEST_CASE("synthetic digits look like pen strokes") {
    const std::vector<LabeledImage> ds = synth_digits(50, 7);
    for (const auto& img : ds) {
        REQUIRE(img.pixels.size() == 784);
        std::size_t ink = 0;
        for (double v : img.pixels) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (v > 0.5) ++ink;
        }
        // a glyph should paint something, but not flood the canvas
        CHECK(ink > 15);
        CHECK(ink < 400);
    }

    // two draws of the same digit differ by jitter
    CHECK(ds[0].pixels != ds[10].pixels);
}

TEST_CASE("quantized export matches the idx layout") {
    const std::vector<LabeledImage> ds = synth_digits(5, 31);
    const IdxImages imgs = quantize_images(ds);
    CHECK(imgs.count == 5);
    CHECK(imgs.rows == 28);
    CHECK(imgs.cols == 28);
    REQUIRE(imgs.pixels.size() == 5 * 784);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t p = 0; p < 784; ++p) {
            const double expect = std::round(ds[i].pixels[p] * 255.0);
            CHECK(imgs.pixels[i * 784 + p] == static_cast<std::uint8_t>(expect));
        }
    }
}
