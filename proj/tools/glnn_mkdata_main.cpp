#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "glnn/data.hpp"
#include "glnn/synth_digits.hpp"

// Emits a synthetic digit corpus in IDX form (upright glyphs; rotation
// augmentation happens at training time), or as a pre-rotated native cache.
int main(int argc, char** argv) {
    CLI::App app{"synthetic digit corpus generator"};

    std::size_t count = 10000;
    std::uint64_t seed = 1;
    std::string images = "digits-images.idx";
    std::string labels = "digits-labels.idx";
    std::string cache;
    double angle_range = 45.0;

    app.add_option("--count", count, "number of images")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "corpus seed");
    app.add_option("--images", images, "output IDX image path");
    app.add_option("--labels", labels, "output IDX label path");
    app.add_option("--cache", cache,
                   "also write a rotated .glds cache (uses --angle-range and --seed)");
    app.add_option("--angle-range", angle_range, "cache rotation range in degrees")
        ->check(CLI::Range(0.0, 45.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const auto dataset = glnn::synth_digits(count, seed);
        glnn::write_idx_images(images, glnn::quantize_images(dataset));
        std::vector<std::uint8_t> raw_labels;
        raw_labels.reserve(dataset.size());
        for (const auto& img : dataset) {
            raw_labels.push_back(static_cast<std::uint8_t>(img.label));
        }
        glnn::write_idx_labels(labels, raw_labels);
        std::cerr << "wrote " << images << " and " << labels << " (" << count << " images)\n";

        if (!cache.empty()) {
            auto rotated = angle_range > 0.0
                               ? glnn::augment_rotate(dataset, angle_range, seed)
                               : dataset;
            glnn::save_cache(cache, rotated);
            std::cerr << "wrote " << cache << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
