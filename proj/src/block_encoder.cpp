#include "fz/block_encoder.hpp"

#include "fz/errors.hpp"
#include "fz/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <chrono>
#include <cstring>
#include <string>

namespace fz {

static_assert(std::endian::native == std::endian::little, "payload blocks are copied as little-endian words");

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint32_t tile_popcount(std::span<const std::uint32_t> bit_flags) {
    std::uint32_t n = 0;
    for (auto w : bit_flags) n += static_cast<std::uint32_t>(std::popcount(w));
    return n;
}

} // namespace

TileFlags flag_tile(std::span<const std::uint32_t> tile) {
    if (tile.size() != kTileWords) {
        throw InvalidArgument("tile must hold exactly " + std::to_string(kTileWords) + " words");
    }
    TileFlags f;
    for (std::size_t b = 0; b < kBlocksPerTile; ++b) {
        const std::uint32_t *w = tile.data() + b * kBlockWords;
        const bool nonzero = (w[0] | w[1] | w[2] | w[3]) != 0;
        f.byte_flags[b] = nonzero ? 1 : 0;
        f.bit_flags[b / 32] |= static_cast<std::uint32_t>(nonzero) << (b % 32);
    }
    f.nonzero_count = tile_popcount(f.bit_flags);
    return f;
}

TileFlags shuffle_and_flag_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out) {
    shuffle_tile(in, out);
    return flag_tile(out);
}

OffsetTable exclusive_prefix_sum(std::span<const std::uint64_t> sizes, std::size_t workers) {
    OffsetTable t;
    t.offsets.resize(sizes.size());
    const std::size_t chunks = chunk_count(workers, sizes.size());
    std::vector<std::uint64_t> chunk_totals(chunks, 0);

    parallel_chunks(workers, sizes.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::uint64_t acc = 0;
        for (std::size_t i = begin; i < end; ++i) {
            t.offsets[i] = acc;
            acc += sizes[i];
        }
        chunk_totals[c] = acc;
    });

    std::vector<std::uint64_t> chunk_base(chunks, 0);
    for (std::size_t c = 0; c < chunks; ++c) {
        chunk_base[c] = t.total;
        t.total += chunk_totals[c];
    }

    parallel_chunks(workers, sizes.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) t.offsets[i] += chunk_base[c];
    });
    return t;
}

namespace {

void compact_one(const std::uint32_t *tile, const TileFlags &f, std::uint8_t *dst) {
    // block offsets inside the tile are the running sum of the byte flags
    std::size_t offset = 0;
    for (std::size_t b = 0; b < kBlocksPerTile; ++b) {
        if (f.byte_flags[b]) {
            std::memcpy(dst + offset, tile + b * kBlockWords, kBlockBytes);
            offset += kBlockBytes;
        }
    }
    assert(offset == std::size_t{f.nonzero_count} * kBlockBytes);
}

/// Fills one tile from its bit flags and the tile's slice of the payload.
void scatter_one(const std::uint32_t *bit_flags, const std::uint8_t *src, std::uint32_t *tile) {
    std::size_t offset = 0;
    for (std::size_t b = 0; b < kBlocksPerTile; ++b) {
        std::uint32_t *dst = tile + b * kBlockWords;
        if ((bit_flags[b / 32] >> (b % 32)) & 1u) {
            std::memcpy(dst, src + offset, kBlockBytes);
            offset += kBlockBytes;
        } else {
            std::memset(dst, 0, kBlockBytes);
        }
    }
}

/// Byte offset of each tile's payload slice; throws if the payload length disagrees.
OffsetTable payload_offsets(std::span<const std::uint32_t> bit_flags, std::size_t payload_bytes, std::size_t workers) {
    if (bit_flags.size() % kFlagWordsPerTile != 0) {
        throw CorruptStream("bit-flag section is not a whole number of tiles");
    }
    const std::size_t tiles = bit_flags.size() / kFlagWordsPerTile;
    std::vector<std::uint64_t> sizes(tiles);
    for (std::size_t t = 0; t < tiles; ++t) {
        sizes[t] = std::uint64_t{tile_popcount(bit_flags.subspan(t * kFlagWordsPerTile, kFlagWordsPerTile))} * kBlockBytes;
    }
    OffsetTable offsets = exclusive_prefix_sum(sizes, workers);
    if (offsets.total != payload_bytes) {
        throw CorruptStream("payload holds " + std::to_string(payload_bytes) + " bytes but the bit flags require "
                            + std::to_string(offsets.total));
    }
    return offsets;
}

} // namespace

std::vector<std::uint8_t> compact_tiles(
        std::span<const std::uint32_t> tiles, std::span<const TileFlags> flags, std::size_t workers) {
    if (tiles.size() != flags.size() * kTileWords) {
        throw InvalidArgument("compact_tiles: " + std::to_string(flags.size()) + " flag sets for "
                              + std::to_string(tiles.size()) + " words");
    }
    std::vector<std::uint64_t> sizes(flags.size());
    for (std::size_t t = 0; t < flags.size(); ++t) sizes[t] = std::uint64_t{flags[t].nonzero_count} * kBlockBytes;
    const OffsetTable offsets = exclusive_prefix_sum(sizes, workers);

    std::vector<std::uint8_t> payload(offsets.total);
    parallel_for(workers, flags.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            compact_one(tiles.data() + t * kTileWords, flags[t], payload.data() + offsets.offsets[t]);
        }
    });
    return payload;
}

std::vector<std::uint32_t> scatter_tiles(
        std::span<const std::uint32_t> bit_flags, std::span<const std::uint8_t> payload, std::size_t workers) {
    const OffsetTable offsets = payload_offsets(bit_flags, payload.size(), workers);
    const std::size_t tiles = offsets.offsets.size();
    std::vector<std::uint32_t> out(tiles * kTileWords);
    parallel_for(workers, tiles, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            scatter_one(bit_flags.data() + t * kFlagWordsPerTile, payload.data() + offsets.offsets[t],
                    out.data() + t * kTileWords);
        }
    });
    return out;
}

EncodedStream encode_codes(std::span<const std::uint16_t> codes, std::size_t workers, EncodeTimings *timings) {
    EncodedStream enc;
    enc.tile_count = tiles_for_codes(codes.size());
    std::vector<std::uint32_t> shuffled(enc.tile_count * kTileWords);
    std::vector<TileFlags> flags(enc.tile_count);

    // phase 1: tile, shuffle and flag while each tile is resident
    auto start = std::chrono::steady_clock::now();
    parallel_for(workers, enc.tile_count, [&](std::size_t begin, std::size_t end) {
        ShuffleTile words;
        for (std::size_t t = begin; t < end; ++t) {
            words.fill(0);
            const std::size_t first = t * kCodesPerTile;
            const std::size_t n = std::min(kCodesPerTile, codes.size() - first);
            for (std::size_t i = 0; i < n; ++i) {
                words[i / 2] |= static_cast<std::uint32_t>(codes[first + i]) << (16 * (i % 2));
            }
            flags[t] = shuffle_and_flag_tile(words, std::span(shuffled).subspan(t * kTileWords, kTileWords));
        }
    });
    if (timings) timings->shuffle_flag_seconds = seconds_since(start);

    // every tile's flags are final before any placement
    start = std::chrono::steady_clock::now();
    std::vector<std::uint64_t> sizes(enc.tile_count);
    enc.bit_flags.resize(enc.tile_count * kFlagWordsPerTile);
    for (std::size_t t = 0; t < enc.tile_count; ++t) {
        sizes[t] = std::uint64_t{flags[t].nonzero_count} * kBlockBytes;
        enc.nonzero_blocks += flags[t].nonzero_count;
        std::copy(flags[t].bit_flags.begin(), flags[t].bit_flags.end(), enc.bit_flags.begin() + t * kFlagWordsPerTile);
    }
    const OffsetTable offsets = exclusive_prefix_sum(sizes, workers);
    if (timings) timings->scan_seconds = seconds_since(start);

    // phase 2: disjoint writes at the scanned offsets
    start = std::chrono::steady_clock::now();
    enc.payload.resize(offsets.total);
    parallel_for(workers, enc.tile_count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            compact_one(shuffled.data() + t * kTileWords, flags[t], enc.payload.data() + offsets.offsets[t]);
        }
    });
    if (timings) timings->compact_seconds = seconds_since(start);
    return enc;
}

std::vector<std::uint16_t> decode_codes(std::span<const std::uint32_t> bit_flags, std::span<const std::uint8_t> payload,
        std::size_t code_count, std::size_t workers) {
    const std::size_t tiles = tiles_for_codes(code_count);
    if (bit_flags.size() != tiles * kFlagWordsPerTile) {
        throw CorruptStream("expected " + std::to_string(tiles) + " tiles of bit flags for " + std::to_string(code_count)
                            + " codes, found " + std::to_string(bit_flags.size() / kFlagWordsPerTile));
    }
    const OffsetTable offsets = payload_offsets(bit_flags, payload.size(), workers);
    std::vector<std::uint16_t> codes(code_count);
    parallel_for(workers, tiles, [&](std::size_t begin, std::size_t end) {
        ShuffleTile shuffled;
        ShuffleTile words;
        for (std::size_t t = begin; t < end; ++t) {
            scatter_one(bit_flags.data() + t * kFlagWordsPerTile, payload.data() + offsets.offsets[t], shuffled.data());
            unshuffle_tile(shuffled, words);
            const std::size_t first = t * kCodesPerTile;
            const std::size_t n = std::min(kCodesPerTile, code_count - first);
            for (std::size_t i = 0; i < n; ++i) {
                codes[first + i] = static_cast<std::uint16_t>(words[i / 2] >> (16 * (i % 2)));
            }
        }
    });
    return codes;
}

} // namespace fz
