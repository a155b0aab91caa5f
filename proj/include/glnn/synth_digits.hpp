#pragma once

#include <cstdint>
#include <vector>

#include "glnn/data.hpp"
#include "glnn/rng.hpp"

namespace glnn {

// Procedurally rendered 28x28 digit corpus: each glyph is a set of stroke
// paths drawn with an antialiased round pen, with per-image jitter in
// placement, scale, stroke width, point wobble and pixel noise. Labels cycle
// 0..9 so classes stay balanced. Deterministic in (count, seed).
std::vector<LabeledImage> synth_digits(std::size_t count, std::uint64_t seed);

// one glyph, jittered from the given stream
LabeledImage render_digit(int digit, SplitMix64& stream);

// quantize normalized pixels back to bytes for IDX export
IdxImages quantize_images(const std::vector<LabeledImage>& dataset);

}  // namespace glnn
