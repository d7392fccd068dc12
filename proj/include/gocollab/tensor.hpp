#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <vector>

namespace gocollab {

// Dense row-major f64 array. Activations are rank-3 (height, width, channels)
// or rank-1 (length); parameter blocks may be rank-2 (fc weights) or rank-4
// (conv weights).
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape);
    static Tensor zeros1(int n) { return zeros({n}); }
    static Tensor zeros3(int h, int w, int c) { return zeros({h, w, c}); }
    static Tensor scalar(double v);
    static Tensor from_flat(std::vector<int> shape, std::vector<double> data);

    int rank() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }

    // rank-3 accessors
    int height() const { assert(rank() == 3); return shape_[0]; }
    int width() const { assert(rank() == 3); return shape_[1]; }
    int channels() const { assert(rank() == 3); return shape_[2]; }

    int length() const { assert(rank() == 1); return shape_[0]; }

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    double& at(int i) {
        assert(rank() == 1 && i >= 0 && i < shape_[0]);
        return data_[static_cast<std::size_t>(i)];
    }
    double at(int i) const { return const_cast<Tensor*>(this)->at(i); }

    double& at(int r, int c, int ch) {
        assert(rank() == 3);
        assert(r >= 0 && r < shape_[0] && c >= 0 && c < shape_[1] && ch >= 0 && ch < shape_[2]);
        return data_[(static_cast<std::size_t>(r) * shape_[1] + c) * shape_[2] + ch];
    }
    double at(int r, int c, int ch) const { return const_cast<Tensor*>(this)->at(r, c, ch); }

    double& at4(int a, int b, int c, int d) {
        assert(rank() == 4);
        return data_[((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    double at4(int a, int b, int c, int d) const { return const_cast<Tensor*>(this)->at4(a, b, c, d); }

    double& at2(int r, int c) {
        assert(rank() == 2);
        return data_[static_cast<std::size_t>(r) * shape_[1] + c];
    }
    double at2(int r, int c) const { return const_cast<Tensor*>(this)->at2(r, c); }

    void fill(double v);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    double sum() const;
    double abs_sum() const;
    double max_abs() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double s);

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// 90-degree counterclockwise rotations of a rank-3 tensor (spatial dims only).
Tensor rotate_ccw(const Tensor& t, int quarter_turns);

// Index mapping used by rotate_ccw: position (r, c) in an h x w grid lands at
// the returned position after `quarter_turns` CCW rotations.
std::array<int, 2> rotate_coord_ccw(int r, int c, int h, int w, int quarter_turns);

}  // namespace gocollab
