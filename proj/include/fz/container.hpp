#pragma once

#include "fz/field.hpp"
#include "fz/quantizer.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fz {

inline constexpr std::array<char, 4> kMagic{'F', 'Z', 'G', 'P'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 96;

namespace header_flags {
inline constexpr std::uint16_t strict = 1u << 0;
inline constexpr std::uint16_t relative_bound = 1u << 1;
inline constexpr std::uint16_t log_transform = 1u << 2;
/// Bins are 2 (eb_abs - 2^margin_exponent) instead of 2 eb_abs.
inline constexpr std::uint16_t narrowed_bins = 1u << 3;
inline constexpr std::uint16_t known = strict | relative_bound | log_transform | narrowed_bins;
} // namespace header_flags

/// Fixed 96-byte little-endian header.
///
///   offset  size  field
///        0     4  magic "FZGP"
///        4     2  format_version
///        6     2  flags
///        8     1  rank
///        9     3  reserved (zero)
///       12    24  dims[3], slowest first, unused = 1
///       36     8  element_count
///       44     8  eb_abs (f64)
///       52     8  eb_input (f64)
///       60     8  overflow_count
///       68     8  tile_count
///       76     8  nonzero_block_count
///       84     8  payload_byte_length
///       92     2  margin_exponent (signed; zero unless narrowed_bins is set)
///       94     2  reserved (zero)
struct Header {
    std::uint16_t version = kFormatVersion;
    std::uint16_t flags = 0;
    std::uint8_t rank = 1;
    std::array<std::uint64_t, 3> dims{1, 1, 1};
    std::uint64_t element_count = 0;
    double eb_abs = 0;
    double eb_input = 0;
    std::uint64_t overflow_count = 0;
    std::uint64_t tile_count = 0;
    std::uint64_t nonzero_block_count = 0;
    std::uint64_t payload_byte_length = 0;
    std::int16_t margin_exponent = 0;

    Dims field_dims() const;

    friend bool operator==(const Header &, const Header &) = default;
};

/// Header, one 32-byte bit-flag record per tile, then the compacted nonzero blocks.
struct Container {
    Header header;
    std::vector<std::uint32_t> bit_flags;
    std::vector<std::uint8_t> payload;

    std::uint64_t byte_size() const noexcept { return kHeaderBytes + 4 * bit_flags.size() + payload.size(); }
    std::uint64_t original_bytes() const noexcept { return header.element_count * sizeof(float); }
    /// Original bytes over compressed bytes.
    double compression_ratio() const noexcept {
        return static_cast<double>(original_bytes()) / static_cast<double>(byte_size());
    }
    /// Bits per value: 32 / compression_ratio.
    double bitrate() const noexcept { return 32.0 / compression_ratio(); }

    friend bool operator==(const Container &, const Container &) = default;
};

std::vector<std::uint8_t> serialize(const Container &c);

/// Parses and validates every structural law of the format. Throws CorruptStream.
Container parse(std::span<const std::uint8_t> bytes);

/// Structural validation shared by parse and decompress.
void validate(const Container &c);

struct CompressOptions {
    BoundMode mode = BoundMode::relative;
    double eb = 1e-3;
    bool strict = false;
    bool log_transform = false;
    std::size_t workers = 1;
};

struct StageTimings {
    double quantize_seconds = 0;
    double shuffle_flag_seconds = 0;
    double scan_seconds = 0;
    double compact_seconds = 0;
    double total_seconds = 0;
};

Container compress(const Field &field, const CompressOptions &opts, StageTimings *timings = nullptr);

/// Reconstructs the field. With apply_inverse_transform == false, a log-transformed container
/// is returned in the log domain, where the error bound applies.
Field decompress(const Container &c, std::size_t workers = 1, bool apply_inverse_transform = true);

enum class LogDirection { forward, inverse };

/// Natural log (forward, strictly positive input only) or exp (inverse), elementwise.
Field log_transform(const Field &field, LogDirection direction, std::size_t workers = 1);

} // namespace fz
