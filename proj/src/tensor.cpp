#include "gocollab/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "gocollab/errors.hpp"

namespace gocollab {

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ConfigError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    t.shape_ = std::move(shape);
    t.data_.assign(n, 0.0);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t = zeros({1});
    t.data_[0] = v;
    return t;
}

Tensor Tensor::from_flat(std::vector<int> shape, std::vector<double> data) {
    Tensor t = zeros(std::move(shape));
    if (data.size() != t.data_.size()) throw ConfigError("tensor data length does not match shape");
    t.data_ = std::move(data);
    return t;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double Tensor::sum() const {
    double s = 0.0;
    for (double x : data_) s += x;
    return s;
}

double Tensor::abs_sum() const {
    double s = 0.0;
    for (double x : data_) s += std::abs(x);
    return s;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (!same_shape(other)) throw ConfigError("tensor shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

std::array<int, 2> rotate_coord_ccw(int r, int c, int h, int w, int quarter_turns) {
    int q = ((quarter_turns % 4) + 4) % 4;
    int rr = r, cc = c, hh = h, ww = w;
    for (int t = 0; t < q; ++t) {
        // one CCW turn of an hh x ww grid: (r, c) -> (ww - 1 - c, r)
        const int nr = ww - 1 - cc;
        const int nc = rr;
        rr = nr;
        cc = nc;
        std::swap(hh, ww);
    }
    return {rr, cc};
}

Tensor rotate_ccw(const Tensor& t, int quarter_turns) {
    if (t.rank() != 3) throw ConfigError("rotate_ccw expects a rank-3 tensor");
    const int q = ((quarter_turns % 4) + 4) % 4;
    if (q == 0) return t;
    const int h = t.height(), w = t.width(), c = t.channels();
    const bool swap_dims = (q % 2) == 1;
    Tensor out = Tensor::zeros3(swap_dims ? w : h, swap_dims ? h : w, c);
    for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
            const auto [nr, nc] = rotate_coord_ccw(r, col, h, w, q);
            for (int ch = 0; ch < c; ++ch) out.at(nr, nc, ch) = t.at(r, col, ch);
        }
    }
    return out;
}

}  // namespace gocollab
