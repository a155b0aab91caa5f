#include "glnn/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace glnn {

std::size_t shape_product(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            throw std::invalid_argument("Tensor: zero dimension");
        }
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(shape_product(shape), 0.0) {}

Tensor Tensor::zeros_like(const Tensor& other) {
    Tensor t;
    t.shape = other.shape;
    t.data.assign(other.data.size(), 0.0);
    return t;
}

void Tensor::reshape(std::vector<std::size_t> dims) {
    if (shape_product(dims) != data.size()) {
        throw std::invalid_argument("Tensor::reshape: element count mismatch");
    }
    shape = std::move(dims);
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
    }
}

}  // namespace glnn
