#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fz {

inline constexpr std::size_t kTileSide = 32;
inline constexpr std::size_t kTileWords = kTileSide * kTileSide;
inline constexpr std::size_t kTileBytes = kTileWords * sizeof(std::uint32_t);
inline constexpr std::size_t kCodesPerTile = 2 * kTileWords;

/// 32x32 matrix of words A[r][c] = words[32 r + c]. Each word carries two 16-bit codes,
/// the even-indexed one in bits 0..15.
using ShuffleTile = std::array<std::uint32_t, kTileWords>;

/// In-place transpose of a 32x32 bit matrix where bit k of rows[i] is element (i, k).
void transpose_bits(std::array<std::uint32_t, 32> &rows) noexcept;

/// Bit-plane transpose of one tile: bit j of out[r][c] == bit r of in[c][j]. Row r of the
/// output is bit plane r of all 1024 input words.
void shuffle_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out);
ShuffleTile shuffle_tile(const ShuffleTile &tile);

/// Inverse of shuffle_tile: bit b of out[x][y] == bit y of in[b][x].
void unshuffle_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out);
ShuffleTile unshuffle_tile(const ShuffleTile &tile);

/// Packs codes two per word (little-endian halves) into whole tiles, zero-padded.
std::vector<std::uint32_t> pack_words(std::span<const std::uint16_t> codes);

/// Inverse of pack_words, truncated to code_count.
std::vector<std::uint16_t> unpack_words(std::span<const std::uint32_t> words, std::size_t code_count);

struct ShuffledStream {
    std::vector<std::uint32_t> words;
    std::size_t tile_count = 0;
    std::size_t code_count = 0;
    std::size_t pad_codes = 0;
};

inline constexpr std::size_t tiles_for_codes(std::size_t code_count) {
    return (code_count + kCodesPerTile - 1) / kCodesPerTile;
}

ShuffledStream shuffle_stream(std::span<const std::uint16_t> codes, std::size_t workers = 1);
std::vector<std::uint16_t> unshuffle_stream(const ShuffledStream &stream, std::size_t workers = 1);

} // namespace fz
