#pragma once

#include "fz/bitshuffle.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fz {

inline constexpr std::size_t kBlockWords = 4;
inline constexpr std::size_t kBlockBytes = kBlockWords * sizeof(std::uint32_t);
inline constexpr std::size_t kBlocksPerTile = kTileWords / kBlockWords;
inline constexpr std::size_t kFlagWordsPerTile = kBlocksPerTile / 32;
inline constexpr std::size_t kFlagBytesPerTile = kFlagWordsPerTile * sizeof(std::uint32_t);

/// Zero/nonzero markers for the 256 blocks of one shuffled tile. Block b covers words
/// 4b..4b+3; its bit lives at bit (b % 32) of bit_flags[b / 32].
struct TileFlags {
    std::array<std::uint8_t, kBlocksPerTile> byte_flags{};
    std::array<std::uint32_t, kFlagWordsPerTile> bit_flags{};
    std::uint32_t nonzero_count = 0;
};

TileFlags flag_tile(std::span<const std::uint32_t> shuffled_tile);

/// shuffle_tile followed by flag_tile while the tile is still hot in cache.
TileFlags shuffle_and_flag_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out);

struct OffsetTable {
    std::vector<std::uint64_t> offsets;
    std::uint64_t total = 0;
};

/// out[0] = 0, out[i] = out[i-1] + sizes[i-1]. Chunked two-level scan; the result does not
/// depend on the worker count.
OffsetTable exclusive_prefix_sum(std::span<const std::uint64_t> sizes, std::size_t workers = 1);

/// Concatenates the nonzero blocks of every tile, tile order then block order.
std::vector<std::uint8_t> compact_tiles(
        std::span<const std::uint32_t> tiles, std::span<const TileFlags> flags, std::size_t workers = 1);

/// Rebuilds shuffled tiles from packed bit flags (8 words per tile) and a compacted payload.
/// Throws CorruptStream when the payload length disagrees with the flags.
std::vector<std::uint32_t> scatter_tiles(std::span<const std::uint32_t> bit_flags, std::span<const std::uint8_t> payload,
        std::size_t workers = 1);

/// Output of the full lossless stage over a code stream.
struct EncodedStream {
    std::size_t tile_count = 0;
    std::vector<std::uint32_t> bit_flags;
    std::vector<std::uint8_t> payload;
    std::uint64_t nonzero_blocks = 0;
};

struct EncodeTimings {
    double shuffle_flag_seconds = 0;
    double scan_seconds = 0;
    double compact_seconds = 0;
};

/// Tiling, fused shuffle + flagging (phase 1), offset scan, then compaction (phase 2).
EncodedStream encode_codes(std::span<const std::uint16_t> codes, std::size_t workers = 1, EncodeTimings *timings = nullptr);

/// scatter -> unshuffle -> unpack, truncated to code_count.
std::vector<std::uint16_t> decode_codes(std::span<const std::uint32_t> bit_flags, std::span<const std::uint8_t> payload,
        std::size_t code_count, std::size_t workers = 1);

} // namespace fz
