#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

namespace stereodiff {

/// Row-major, channel-interleaved float image with 1 or 3 channels.
class FrameBuffer {
public:
    FrameBuffer() = default;
    FrameBuffer(int width, int height, int channels, float fill = 0.0f);
    FrameBuffer(int width, int height, int channels, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return std::size_t(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    float at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
    float& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    bool same_shape(const FrameBuffer& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    /// True when every sample is finite.
    bool all_finite() const noexcept;

    friend bool operator==(const FrameBuffer&, const FrameBuffer&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept
    {
        return (std::size_t(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Single-channel per-pixel depth. Units are whatever the loader produced until normalized.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height, float fill = 0.0f);
    DepthMap(int width, int height, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    float at(int x, int y) const noexcept { return data_[std::size_t(y) * width_ + x]; }
    float& at(int x, int y) noexcept { return data_[std::size_t(y) * width_ + x]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    friend bool operator==(const DepthMap&, const DepthMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Dense optical flow in pixels: a pixel at (x, y) moves to (x + u, y + v).
class FlowField {
public:
    FlowField() = default;
    FlowField(int width, int height);
    FlowField(int width, int height, std::vector<float> u, std::vector<float> v);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    float u(int x, int y) const noexcept { return u_[std::size_t(y) * width_ + x]; }
    float v(int x, int y) const noexcept { return v_[std::size_t(y) * width_ + x]; }
    float& u(int x, int y) noexcept { return u_[std::size_t(y) * width_ + x]; }
    float& v(int x, int y) noexcept { return v_[std::size_t(y) * width_ + x]; }

    std::span<const float> u_data() const noexcept { return u_; }
    std::span<const float> v_data() const noexcept { return v_; }

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> u_;
    std::vector<float> v_;
};

/// 1 = known (valid warped content), 0 = disoccluded.
class DisocclusionMask {
public:
    DisocclusionMask() = default;
    DisocclusionMask(int width, int height, std::uint8_t fill = 0);
    DisocclusionMask(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::uint8_t at(int x, int y) const noexcept { return data_[std::size_t(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) noexcept { return data_[std::size_t(y) * width_ + x]; }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::size_t count_known() const noexcept;
    std::size_t count_unknown() const noexcept { return data_.size() - count_known(); }
    bool all_known() const noexcept { return count_known() == data_.size(); }

    friend bool operator==(const DisocclusionMask&, const DisocclusionMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Non-owning strided view over one row or column of a Grid.
template <class T>
class GridLine {
public:
    GridLine(T* base, std::size_t count, std::size_t stride) noexcept
        : base_(base), count_(count), stride_(stride)
    {
    }

    std::size_t size() const noexcept { return count_; }
    T& operator[](std::size_t i) const noexcept { return base_[i * stride_]; }

    class iterator {
    public:
        using value_type = std::remove_const_t<T>;
        using difference_type = std::ptrdiff_t;
        using reference = T&;

        iterator() = default;
        iterator(T* p, std::size_t stride) : p_(p), stride_(stride) {}
        T& operator*() const noexcept { return *p_; }
        T* operator->() const noexcept { return p_; }
        iterator& operator++() noexcept
        {
            p_ += stride_;
            return *this;
        }
        iterator operator++(int) noexcept
        {
            auto tmp = *this;
            ++*this;
            return tmp;
        }
        bool operator==(const iterator& o) const noexcept { return p_ == o.p_; }

    private:
        T* p_ = nullptr;
        std::size_t stride_ = 1;
    };

    iterator begin() const noexcept { return {base_, stride_}; }
    iterator end() const noexcept { return {base_ + count_ * stride_, stride_}; }

    std::vector<std::remove_const_t<T>> to_vector() const
    {
        std::vector<std::remove_const_t<T>> out;
        out.reserve(count_);
        for (std::size_t i = 0; i < count_; ++i) out.push_back((*this)[i]);
        return out;
    }

private:
    T* base_;
    std::size_t count_;
    std::size_t stride_;
};

/// Row-major rows x cols container. Rows are fixed-time sweeps, columns fixed-camera videos.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols) {}
    Grid(std::size_t rows, std::size_t cols, const T& fill)
        : rows_(rows), cols_(cols), cells_(rows * cols, fill)
    {
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return cells_.size(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return cells_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return cells_[r * cols_ + c]; }

    GridLine<T> row(std::size_t r) noexcept { return {cells_.data() + r * cols_, cols_, 1}; }
    GridLine<const T> row(std::size_t r) const noexcept { return {cells_.data() + r * cols_, cols_, 1}; }
    GridLine<T> col(std::size_t c) noexcept { return {cells_.data() + c, rows_, cols_}; }
    GridLine<const T> col(std::size_t c) const noexcept { return {cells_.data() + c, rows_, cols_}; }

    std::span<T> cells() noexcept { return cells_; }
    std::span<const T> cells() const noexcept { return cells_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> cells_;
};

}  // namespace stereodiff
