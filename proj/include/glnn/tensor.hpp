#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace glnn {

// Dense N-dimensional array of doubles, row-major. The single carrier type
// for activations, weights and gradients.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims);

    static Tensor zeros_like(const Tensor& other);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    // 2-d accessors (row, col); layers index higher ranks by explicit offsets
    double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    // reinterpret the same elements under a new shape; element count must match
    void reshape(std::vector<std::size_t> dims);

    std::string shape_str() const;
};

std::size_t shape_product(const std::vector<std::size_t>& dims);

// throws std::invalid_argument naming `where` when shapes differ
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace glnn
