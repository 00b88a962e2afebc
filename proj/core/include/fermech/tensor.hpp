#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fermech {

// Dense row-major tensor of doubles. The single value type carrying feature
// maps, feature vectors, weight matrices and score vectors.
//
// Invariants: data().size() == product(shape()); public operations keep all
// entries finite when fed finite inputs.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor vec(std::vector<double> values);
    static Tensor mat(std::size_t rows, std::size_t cols, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // rank-2 access (rows x cols)
    double& operator()(std::size_t i, std::size_t j);
    double operator()(std::size_t i, std::size_t j) const;

    // rank-3 access (channels x height x width)
    double& operator()(std::size_t c, std::size_t h, std::size_t w);
    double operator()(std::size_t c, std::size_t h, std::size_t w) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    std::string shape_str() const;  // e.g. "[3x4]"

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Elementwise helpers, shape-checked.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, double c);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor transposed(const Tensor& m);  // rank-2 only
Tensor reshaped(const Tensor& t, std::vector<std::size_t> shape);
double dot(const Tensor& a, const Tensor& b);
double norm(const Tensor& a);

}  // namespace fermech
