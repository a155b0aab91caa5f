#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "glnn/tensor.hpp"

namespace glnn {

// wrong magic or malformed structure
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// file shorter than its header promises
struct LengthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// image and label files disagree on the example count
struct PairingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;
inline constexpr std::size_t kClasses = 10;

// one 28x28 grayscale digit, pixels normalized to [0, 1]
struct LabeledImage {
    std::vector<double> pixels;  // kImagePixels, row-major
    int label = 0;               // 0..9
};

// raw contents of an IDX image file before normalization
struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count*rows*cols
};

// Big-endian IDX readers. Gzip-compressed files (magic 0x1f 0x8b) are
// decompressed transparently. Throw FormatError on a wrong magic,
// LengthError on truncation.
IdxImages load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

// plain (uncompressed) IDX writers; parsing round-trips byte for byte
void write_idx_images(const std::string& path, const IdxImages& images);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// pair images with labels and normalize bytes to [0, 1]; PairingError on
// count mismatch, FormatError unless every image is 28x28 and labels are 0..9
std::vector<LabeledImage> make_dataset(const IdxImages& images,
                                       const std::vector<std::uint8_t>& labels);

// bilinear rotation of a side x side grid about its center ((side-1)/2 both
// axes); samples falling outside read as background 0
std::vector<double> rotate_square(const std::vector<double>& pixels, std::size_t side,
                                  double degrees);

// rotation with the label carried through; degrees must lie in [-45, 45]
LabeledImage rotate_image(const LabeledImage& img, double degrees);

// every image rotated by an angle drawn uniformly from [-range, range], one
// derived stream per index so the result is order- and thread-independent
std::vector<LabeledImage> augment_rotate(const std::vector<LabeledImage>& dataset,
                                         double angle_range, std::uint64_t seed);

// k-fold assignment by seeded shuffle + contiguous blocks
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignments;  // per example, fold index in [0, k)

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// requires n >= k >= 2; deterministic in (n, k, seed)
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

// unit basis vector of length 10; std::out_of_range unless 0 <= label <= 9
std::vector<double> one_hot(int label);

// assemble {N, 1, 28, 28} inputs and {N, 10} one-hot targets for the given
// dataset rows
Tensor images_to_batch(const std::vector<LabeledImage>& dataset,
                       const std::vector<std::size_t>& indices);
Tensor labels_to_targets(const std::vector<LabeledImage>& dataset,
                         const std::vector<std::size_t>& indices);

// native cache of an augmented dataset: magic "GLDS", version u32 LE,
// count u64 LE, then per example label u8 + 784 f64 LE
void save_cache(const std::string& path, const std::vector<LabeledImage>& dataset);
std::vector<LabeledImage> load_cache(const std::string& path);

}  // namespace glnn
