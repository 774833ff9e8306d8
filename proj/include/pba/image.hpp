#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace pba {

// Row-major grid with interleaved channels. Row 0 is the top image row.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels = 1, T fill = T(0))
        : w_(width), h_(height), c_(channels),
          data_(static_cast<size_t>(width) * static_cast<size_t>(height) * channels, fill) {}

    int width() const { return w_; }
    int height() const { return h_; }
    int channels() const { return c_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    bool contains(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }

    T& at(int x, int y, int ch = 0) {
        assert(contains(x, y) && ch >= 0 && ch < c_);
        return data_[(static_cast<size_t>(y) * w_ + x) * c_ + ch];
    }
    const T& at(int x, int y, int ch = 0) const {
        assert(contains(x, y) && ch >= 0 && ch < c_);
        return data_[(static_cast<size_t>(y) * w_ + x) * c_ + ch];
    }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * w_ * c_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_ * c_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool same_shape(const Image& o) const {
        return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
    }

private:
    int w_ = 0, h_ = 0, c_ = 1;
    std::vector<T> data_;
};

using ImageF = Image<float>;

}  // namespace pba
