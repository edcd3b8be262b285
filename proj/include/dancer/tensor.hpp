#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "dancer/common.hpp"

namespace dancer {

// Dense row-major tensor. Rank 1 and 2 are all the models need.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}
    Tensor(std::vector<int64_t> shape, std::vector<real_t> values)
        : shape_(std::move(shape)), data_(std::move(values)) {
        if (count(shape_) != static_cast<int64_t>(data_.size()))
            throw UsageError("tensor shape does not match value count");
    }

    static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
    static Tensor scalar(real_t v) { return Tensor({1}, {v}); }

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    int64_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    int64_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    real_t* data() { return data_.data(); }
    const real_t* data() const { return data_.data(); }
    real_t& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    real_t operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
    real_t& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols() + c)]; }
    real_t at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols() + c)]; }

    void fill(real_t v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (real_t v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    static int64_t count(const std::vector<int64_t>& shape) {
        int64_t n = 1;
        for (int64_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

  private:
    std::vector<int64_t> shape_;
    std::vector<real_t> data_;
};

}  // namespace dancer
