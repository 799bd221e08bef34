#pragma once

#include "fz/errors.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fz {

/// Grid extents of rank 1 to 3, slowest-varying first.
class Dims {
  public:
    Dims() = default;

    Dims(std::initializer_list<std::size_t> extents) : Dims(std::span<const std::size_t>(extents.begin(), extents.size())) {}

    explicit Dims(std::span<const std::size_t> extents) {
        if (extents.empty() || extents.size() > 3) {
            throw InvalidArgument("rank must be 1, 2 or 3 (got " + std::to_string(extents.size()) + ")");
        }
        rank_ = static_cast<int>(extents.size());
        for (std::size_t i = 0; i < extents.size(); ++i) { extents_[i] = extents[i]; }
    }

    int rank() const noexcept { return rank_; }

    /// Extent along axis `axis` (0 = slowest); axes beyond the rank report 1.
    std::size_t operator[](std::size_t axis) const { return axis < static_cast<std::size_t>(rank_) ? extents_[axis] : 1; }

    std::size_t count() const noexcept {
        std::size_t n = 1;
        for (int i = 0; i < rank_; ++i) { n *= extents_[i]; }
        return n;
    }

    /// Extents padded at the slow end to three axes: {planes, rows, columns}.
    std::array<std::size_t, 3> shape3() const noexcept {
        std::array<std::size_t, 3> s{1, 1, 1};
        for (int i = 0; i < rank_; ++i) { s[3 - rank_ + i] = extents_[i]; }
        return s;
    }

    std::string to_string() const {
        std::string s;
        for (int i = 0; i < rank_; ++i) {
            if (i) s += 'x';
            s += std::to_string(extents_[i]);
        }
        return s;
    }

    friend bool operator==(const Dims &a, const Dims &b) {
        if (a.rank_ != b.rank_) return false;
        for (int i = 0; i < a.rank_; ++i) {
            if (a.extents_[i] != b.extents_[i]) return false;
        }
        return true;
    }

  private:
    std::array<std::size_t, 3> extents_{0, 1, 1};
    int rank_ = 1;
};

/// Row-major single-precision grid.
struct Field {
    std::vector<float> values;
    Dims dims;

    Field() = default;
    Field(std::vector<float> v, Dims d) : values(std::move(v)), dims(d) {
        if (values.size() != dims.count()) {
            throw InvalidArgument("field has " + std::to_string(values.size()) + " values but dims " + dims.to_string()
                                  + " describe " + std::to_string(dims.count()));
        }
    }

    std::size_t size() const noexcept { return values.size(); }
};

} // namespace fz
