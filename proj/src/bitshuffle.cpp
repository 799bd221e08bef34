#include "fz/bitshuffle.hpp"

#include "fz/errors.hpp"
#include "fz/parallel.hpp"

#include <algorithm>
#include <string>

namespace fz {

namespace {

void check_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out) {
    if (in.size() != kTileWords || out.size() != kTileWords) {
        throw InvalidArgument("tile must hold exactly " + std::to_string(kTileWords) + " words (got "
                              + std::to_string(in.size()) + " -> " + std::to_string(out.size()) + ")");
    }
}

} // namespace

void transpose_bits(std::array<std::uint32_t, 32> &x) noexcept {
    // swap the off-diagonal j x j sub-blocks, halving j each round
    std::uint32_t mask = 0x0000FFFFu;
    for (std::size_t j = 16; j != 0; j >>= 1, mask ^= mask << j) {
        for (std::size_t k = 0; k < 32; k = (k + j + 1) & ~j) {
            const std::uint32_t t = ((x[k] >> j) ^ x[k + j]) & mask;
            x[k] ^= t << j;
            x[k + j] ^= t;
        }
    }
}

void shuffle_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out) {
    check_tile(in, out);
    std::array<std::uint32_t, 32> m;
    for (std::size_t c = 0; c < kTileSide; ++c) {
        std::copy_n(in.begin() + c * kTileSide, kTileSide, m.begin());
        transpose_bits(m);
        for (std::size_t r = 0; r < kTileSide; ++r) { out[r * kTileSide + c] = m[r]; }
    }
}

ShuffleTile shuffle_tile(const ShuffleTile &tile) {
    ShuffleTile out;
    shuffle_tile(tile, out);
    return out;
}

void unshuffle_tile(std::span<const std::uint32_t> in, std::span<std::uint32_t> out) {
    check_tile(in, out);
    std::array<std::uint32_t, 32> m;
    for (std::size_t x = 0; x < kTileSide; ++x) {
        for (std::size_t b = 0; b < kTileSide; ++b) { m[b] = in[b * kTileSide + x]; }
        transpose_bits(m);
        std::copy(m.begin(), m.end(), out.begin() + x * kTileSide);
    }
}

ShuffleTile unshuffle_tile(const ShuffleTile &tile) {
    ShuffleTile out;
    unshuffle_tile(tile, out);
    return out;
}

std::vector<std::uint32_t> pack_words(std::span<const std::uint16_t> codes) {
    std::vector<std::uint32_t> words(tiles_for_codes(codes.size()) * kTileWords, 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        words[i / 2] |= static_cast<std::uint32_t>(codes[i]) << (16 * (i % 2));
    }
    return words;
}

std::vector<std::uint16_t> unpack_words(std::span<const std::uint32_t> words, std::size_t code_count) {
    if (code_count > 2 * words.size()) {
        throw InvalidArgument("word stream holds fewer than " + std::to_string(code_count) + " codes");
    }
    std::vector<std::uint16_t> codes(code_count);
    for (std::size_t i = 0; i < code_count; ++i) {
        codes[i] = static_cast<std::uint16_t>(words[i / 2] >> (16 * (i % 2)));
    }
    return codes;
}

ShuffledStream shuffle_stream(std::span<const std::uint16_t> codes, std::size_t workers) {
    ShuffledStream s;
    s.code_count = codes.size();
    s.tile_count = tiles_for_codes(codes.size());
    s.pad_codes = s.tile_count * kCodesPerTile - codes.size();
    s.words = pack_words(codes);
    parallel_for(workers, s.tile_count, [&](std::size_t begin, std::size_t end) {
        ShuffleTile tmp;
        for (std::size_t t = begin; t < end; ++t) {
            std::span<std::uint32_t> tile(s.words.data() + t * kTileWords, kTileWords);
            shuffle_tile(tile, tmp);
            std::copy(tmp.begin(), tmp.end(), tile.begin());
        }
    });
    return s;
}

std::vector<std::uint16_t> unshuffle_stream(const ShuffledStream &stream, std::size_t workers) {
    if (stream.words.size() != stream.tile_count * kTileWords) {
        throw InvalidArgument("shuffled stream size does not match its tile count");
    }
    std::vector<std::uint32_t> words(stream.words.size());
    parallel_for(workers, stream.tile_count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            unshuffle_tile(std::span(stream.words).subspan(t * kTileWords, kTileWords),
                    std::span(words).subspan(t * kTileWords, kTileWords));
        }
    });
    return unpack_words(words, stream.code_count);
}

} // namespace fz
