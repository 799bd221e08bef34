#pragma once

#include "fz/field.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace fz {

enum class BoundMode { absolute, relative };

/// User-facing error bound plus the absolute bound it resolves to on a given field.
/// 2 * resolved_abs is the quantization bin width.
struct ErrorBound {
    BoundMode mode = BoundMode::absolute;
    double value = 0.0;
    double resolved_abs = 0.0;

    static ErrorBound absolute(double eb) {
        if (!(eb > 0.0)) throw InvalidArgument("error bound must be positive");
        return {BoundMode::absolute, eb, eb};
    }
};

/// Relative bounds scale by the field's value range. A constant field falls back to
/// treating the relative value as absolute.
ErrorBound resolve_error_bound(const Field &field, BoundMode mode, double value);

/// Pre-quantized integers, or Lorenzo deltas of them.
struct IntGrid {
    std::vector<std::int32_t> codes;
    Dims dims;
};

/// Quantization codes must stay below this magnitude so that 3D Lorenzo sums are exact in 32 bits.
inline constexpr std::int64_t kMaxQuantMagnitude = std::int64_t{1} << 28;

inline constexpr std::uint16_t kCodeSignBit = 0x8000;
inline constexpr std::int32_t kMaxCodeMagnitude = 0x7FFF;

/// Value reconstructed from a quantization integer; shared by both directions so the
/// compressor can check exactly what the decompressor will produce.
inline float reconstruct_value(std::int32_t q, double bin_width) {
    return static_cast<float>(static_cast<double>(q) * bin_width);
}

/// Quantization grid for one field: bins of width 2 (eb - margin). The margin is zero when
/// every multiple of 2 eb the field can reach is exactly a float. Otherwise it is one float ulp
/// at the top binade of the field (a power of two), which keeps float reconstructions within
/// eb even where two neighbouring reconstructions round apart by more than 2 eb.
struct QuantGrid {
    double eb = 0.0;
    std::optional<int> margin_exponent;

    double margin() const;
    double bin_width() const;
    friend bool operator==(const QuantGrid &, const QuantGrid &) = default;
};

QuantGrid choose_quant_grid(const Field &field, const ErrorBound &eb, std::size_t workers = 1);

/// q_i = round(d_i / bin), halves away from zero. When the float reconstruction of that bin
/// lands outside eb (a bin edge within float rounding), the neighbouring bin on the side of
/// d_i is taken instead; an element that fits neither throws QuantizationRangeError.
IntGrid prequantize(const Field &field, const QuantGrid &grid, std::size_t workers = 1);
inline IntGrid prequantize(const Field &field, const ErrorBound &eb, std::size_t workers = 1) {
    return prequantize(field, choose_quant_grid(field, eb, workers), workers);
}

/// Order-1 Lorenzo residuals with implicit zeros outside the grid.
IntGrid lorenzo_deltas(const IntGrid &grid, std::size_t workers = 1);

/// Inverts lorenzo_deltas by an inclusive running sum along each axis in turn.
IntGrid inverse_lorenzo(IntGrid deltas, std::size_t workers = 1);

struct PackedCode {
    std::uint16_t code;
    bool saturated;
};

/// Sign-magnitude packing: bit 15 is the sign, bits 0..14 the magnitude, clamped to 32767.
constexpr PackedCode pack_code(std::int64_t delta) noexcept {
    const bool negative = delta < 0;
    const std::uint64_t magnitude = negative ? static_cast<std::uint64_t>(-(delta + 1)) + 1 : static_cast<std::uint64_t>(delta);
    const bool saturated = magnitude > static_cast<std::uint64_t>(kMaxCodeMagnitude);
    const auto clamped = static_cast<std::uint16_t>(saturated ? kMaxCodeMagnitude : magnitude);
    if (negative) return {static_cast<std::uint16_t>(kCodeSignBit | clamped), saturated};
    return {clamped, saturated};
}

constexpr std::int32_t unpack_code(std::uint16_t code) noexcept {
    const std::int32_t magnitude = code & kMaxCodeMagnitude;
    return (code & kCodeSignBit) ? -magnitude : magnitude;
}

struct QuantizedField {
    std::vector<std::uint16_t> codes;
    Dims dims;
    std::uint64_t overflow_count = 0;
    std::optional<std::size_t> first_overflow_index;
    std::optional<int> margin_exponent;
};

/// prequantize -> lorenzo_deltas -> pack_code, fused into one pass over the grid.
QuantizedField quantize_field(const Field &field, const ErrorBound &eb, std::size_t workers = 1);

/// unpack -> inverse_lorenzo -> scale by the bin width of {eb, qf.margin_exponent}. The error bound holds only when
/// overflow_count == 0.
Field dequantize_field(const QuantizedField &qf, const ErrorBound &eb, std::size_t workers = 1);

} // namespace fz
