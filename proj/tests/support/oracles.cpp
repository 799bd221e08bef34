#include "oracles.hpp"

#include <cmath>
#include <cstring>

namespace fz::oracle {

Tile naive_bit_gather(const Tile &in) {
    Tile out{};
    for (std::size_t r = 0; r < 32; ++r) {
        for (std::size_t c = 0; c < 32; ++c) {
            for (std::size_t j = 0; j < 32; ++j) {
                const std::uint32_t bit = (in[c * 32 + j] >> r) & 1u;
                out[r * 32 + c] |= bit << j;
            }
        }
    }
    return out;
}

namespace {

std::int64_t at(std::span<const std::int32_t> q, const std::array<std::size_t, 3> &s, long p, long r, long c) {
    if (p < 0 || r < 0 || c < 0) return 0;
    return q[(static_cast<std::size_t>(p) * s[1] + static_cast<std::size_t>(r)) * s[2] + static_cast<std::size_t>(c)];
}

std::int64_t at64(const std::vector<std::int64_t> &q, const std::array<std::size_t, 3> &s, long p, long r, long c) {
    if (p < 0 || r < 0 || c < 0) return 0;
    return q[(static_cast<std::size_t>(p) * s[1] + static_cast<std::size_t>(r)) * s[2] + static_cast<std::size_t>(c)];
}

} // namespace

std::vector<std::int64_t> lorenzo_stencil(std::span<const std::int32_t> q, std::array<std::size_t, 3> s) {
    std::vector<std::int64_t> out(q.size());
    std::size_t i = 0;
    for (long p = 0; p < static_cast<long>(s[0]); ++p) {
        for (long r = 0; r < static_cast<long>(s[1]); ++r) {
            for (long c = 0; c < static_cast<long>(s[2]); ++c) {
                const std::int64_t pred = at(q, s, p - 1, r, c) + at(q, s, p, r - 1, c) + at(q, s, p, r, c - 1)
                                          - at(q, s, p - 1, r - 1, c) - at(q, s, p - 1, r, c - 1)
                                          - at(q, s, p, r - 1, c - 1) + at(q, s, p - 1, r - 1, c - 1);
                out[i++] = at(q, s, p, r, c) - pred;
            }
        }
    }
    return out;
}

std::vector<std::int64_t> lorenzo_reconstruct(std::span<const std::int32_t> deltas, std::array<std::size_t, 3> s) {
    std::vector<std::int64_t> q(deltas.size(), 0);
    std::size_t i = 0;
    for (long p = 0; p < static_cast<long>(s[0]); ++p) {
        for (long r = 0; r < static_cast<long>(s[1]); ++r) {
            for (long c = 0; c < static_cast<long>(s[2]); ++c) {
                const std::int64_t pred = at64(q, s, p - 1, r, c) + at64(q, s, p, r - 1, c) + at64(q, s, p, r, c - 1)
                                          - at64(q, s, p - 1, r - 1, c) - at64(q, s, p - 1, r, c - 1)
                                          - at64(q, s, p, r - 1, c - 1) + at64(q, s, p - 1, r - 1, c - 1);
                q[i] = deltas[i] + pred;
                ++i;
            }
        }
    }
    return q;
}

std::vector<std::uint64_t> sequential_exclusive_scan(std::span<const std::uint64_t> sizes) {
    std::vector<std::uint64_t> out;
    std::uint64_t acc = 0;
    for (auto v : sizes) {
        out.push_back(acc);
        acc += v;
    }
    return out;
}

std::vector<std::uint8_t> naive_compact(std::span<const std::uint32_t> tiles) {
    std::vector<std::uint8_t> out;
    for (std::size_t b = 0; b * 4 < tiles.size(); ++b) {
        bool any = false;
        for (std::size_t w = 0; w < 4; ++w) any = any || tiles[b * 4 + w] != 0;
        if (!any) continue;
        for (std::size_t w = 0; w < 4; ++w) {
            for (std::size_t k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(tiles[b * 4 + w] >> (8 * k)));
        }
    }
    return out;
}

double ssim_direct(std::span<const float> x, std::span<const float> y, std::size_t rows, std::size_t cols,
        double dynamic_range) {
    const double c1 = std::pow(0.01 * dynamic_range, 2);
    const double c2 = std::pow(0.03 * dynamic_range, 2);
    double total = 0;
    std::size_t windows = 0;
    for (std::size_t r = 0; r + 8 <= rows; ++r) {
        for (std::size_t c = 0; c + 8 <= cols; ++c) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < 8; ++i) {
                for (std::size_t j = 0; j < 8; ++j) {
                    mx += x[(r + i) * cols + c + j];
                    my += y[(r + i) * cols + c + j];
                }
            }
            mx /= 64;
            my /= 64;
            double vx = 0, vy = 0, cov = 0;
            for (std::size_t i = 0; i < 8; ++i) {
                for (std::size_t j = 0; j < 8; ++j) {
                    const double dx = x[(r + i) * cols + c + j] - mx;
                    const double dy = y[(r + i) * cols + c + j] - my;
                    vx += dx * dx;
                    vy += dy * dy;
                    cov += dx * dy;
                }
            }
            vx /= 64;
            vy /= 64;
            cov /= 64;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(std::span<const float> values) {
    return fnv1a(std::span(reinterpret_cast<const std::uint8_t *>(values.data()), values.size() * sizeof(float)));
}

Tile random_tile(std::mt19937_64 &rng) {
    Tile t;
    for (auto &w : t) w = static_cast<std::uint32_t>(rng());
    return t;
}

Tile random_sparse_tile(std::mt19937_64 &rng, double density) {
    Tile t{};
    std::bernoulli_distribution keep(density);
    for (std::size_t b = 0; b < 256; ++b) {
        if (!keep(rng)) continue;
        for (std::size_t w = 0; w < 4; ++w) {
            // sparse bits inside a kept block; force at least one set bit
            t[b * 4 + w] = static_cast<std::uint32_t>(rng() & rng());
        }
        t[b * 4 + (rng() % 4)] |= 1u << (rng() % 32);
    }
    return t;
}

} // namespace fz::oracle
