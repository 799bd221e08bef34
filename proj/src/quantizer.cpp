#include "fz/quantizer.hpp"

#include "fz/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <span>

namespace fz {

namespace {

std::int32_t quantize_value(float d, double bin, double eb, std::size_t index) {
    if (!std::isfinite(d)) throw NonFiniteInput(index);
    const double x = std::round(static_cast<double>(d) / bin);
    if (std::abs(x) >= static_cast<double>(kMaxQuantMagnitude)) throw QuantizationRangeError(index);
    auto q = static_cast<std::int32_t>(x);
    const double r = reconstruct_value(q, bin);
    if (std::abs(r - d) > eb) {
        // d sits within float rounding of a bin edge; the neighbour toward d may still fit
        const std::int32_t alt = q + (d > r ? 1 : -1);
        if (std::abs(alt) >= kMaxQuantMagnitude || std::abs(static_cast<double>(reconstruct_value(alt, bin)) - d) > eb) {
            throw QuantizationRangeError(index);
        }
        q = alt;
    }
    return q;
}

/// True when k * bin is exactly a float for every |k| <= k_max.
bool float_exact_multiples(double bin, double k_max) {
    int exp = 0;
    const double frac = std::frexp(bin, &exp);
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
    const int shift = std::countr_zero(mantissa);
    mantissa >>= shift;
    const int low_exp = exp - 53 + shift;
    const double top = k_max * static_cast<double>(mantissa);
    return low_exp >= -149 && top < 0x1p24 && std::ldexp(top, low_exp) <= std::numeric_limits<float>::max();
}

double max_abs_finite(std::span<const float> values, std::size_t workers) {
    std::vector<float> partial(chunk_count(workers, values.size()), 0.0f);
    parallel_chunks(workers, values.size(), [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        float m = 0.0f;
        for (std::size_t i = begin; i < end; ++i) {
            if (std::isfinite(values[i])) m = std::max(m, std::abs(values[i]));
        }
        partial[chunk] = m;
    });
    return partial.empty() ? 0.0 : *std::max_element(partial.begin(), partial.end());
}

void check_grid(const IntGrid &grid) {
    if (grid.codes.size() != grid.dims.count()) {
        throw InvalidArgument("grid has " + std::to_string(grid.codes.size()) + " codes but dims "
                              + grid.dims.to_string() + " describe " + std::to_string(grid.dims.count()));
    }
}

inline std::uint32_t u(std::int32_t v) { return static_cast<std::uint32_t>(v); }

/// Lorenzo residuals of rows [row_begin, row_end) of a {planes, rows, cols} grid, computed as
/// the mixed difference over the two slow axes followed by an adjacent difference along the
/// row. All arithmetic is modulo 2^32, which is exact whenever the true residual fits in 32 bits.
template<typename Sink>
void lorenzo_rows(const std::int32_t *q, const std::array<std::size_t, 3> &shape, std::size_t row_begin,
        std::size_t row_end, Sink &&sink) {
    const std::size_t rows = shape[1];
    const std::size_t cols = shape[2];
    const std::size_t plane_stride = rows * cols;
    for (std::size_t row = row_begin; row < row_end; ++row) {
        const std::size_t p = row / rows;
        const std::size_t r = row % rows;
        const std::int32_t *cur = q + row * cols;
        const std::int32_t *up = r > 0 ? cur - cols : nullptr;
        const std::int32_t *back = p > 0 ? cur - plane_stride : nullptr;
        const std::int32_t *back_up = (p > 0 && r > 0) ? cur - plane_stride - cols : nullptr;
        std::uint32_t prev = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            std::uint32_t m = u(cur[c]);
            if (up) m -= u(up[c]);
            if (back) m -= u(back[c]);
            if (back_up) m += u(back_up[c]);
            sink(row * cols + c, static_cast<std::int32_t>(m - prev));
            prev = m;
        }
    }
}

} // namespace

ErrorBound resolve_error_bound(const Field &field, BoundMode mode, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgument("error bound must be a positive finite number");
    }
    if (field.values.empty()) throw InvalidArgument("cannot resolve an error bound on an empty field");
    if (mode == BoundMode::absolute) return {mode, value, value};

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const float v = field.values[i];
        if (!std::isfinite(v)) throw NonFiniteInput(i);
        lo = std::min<double>(lo, v);
        hi = std::max<double>(hi, v);
    }
    const double range = hi - lo;
    return {mode, value, range > 0.0 ? value * range : value};
}

double QuantGrid::margin() const { return margin_exponent ? std::ldexp(1.0, *margin_exponent) : 0.0; }

double QuantGrid::bin_width() const { return 2.0 * (eb - margin()); }

QuantGrid choose_quant_grid(const Field &field, const ErrorBound &eb, std::size_t workers) {
    if (!(eb.resolved_abs > 0.0)) throw InvalidArgument("error bound is not resolved");
    QuantGrid grid{eb.resolved_abs, std::nullopt};
    const double max_abs = max_abs_finite(field.values, workers);
    const double bin = 2.0 * eb.resolved_abs;
    const double reach = max_abs + eb.resolved_abs;
    if (!std::isfinite(reach) || float_exact_multiples(bin, std::floor(max_abs / bin + 0.5) + 1.0)) return grid;
    // every reconstruction lies below 2^top, where float spacing is at most 2^(top - 24)
    const int top = std::ilogb(reach) + 1;
    const int exponent = std::max(top - 24, -149);
    if (std::ldexp(1.0, exponent) * 4.0 <= eb.resolved_abs) grid.margin_exponent = exponent;
    return grid;
}

IntGrid prequantize(const Field &field, const QuantGrid &grid, std::size_t workers) {
    if (!(grid.eb > 0.0) || !(grid.margin() * 4.0 <= grid.eb)) throw InvalidArgument("invalid quantization grid");
    const double bin = grid.bin_width();
    IntGrid out{std::vector<std::int32_t>(field.values.size()), field.dims};
    parallel_for(workers, field.values.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out.codes[i] = quantize_value(field.values[i], bin, grid.eb, i);
        }
    });
    return out;
}

IntGrid lorenzo_deltas(const IntGrid &grid, std::size_t workers) {
    check_grid(grid);
    const auto shape = grid.dims.shape3();
    IntGrid out{std::vector<std::int32_t>(grid.codes.size()), grid.dims};
    parallel_for(workers, shape[0] * shape[1], [&](std::size_t begin, std::size_t end) {
        lorenzo_rows(grid.codes.data(), shape, begin, end,
                [&](std::size_t i, std::int32_t delta) { out.codes[i] = delta; });
    });
    return out;
}

IntGrid inverse_lorenzo(IntGrid deltas, std::size_t workers) {
    check_grid(deltas);
    const auto [planes, rows, cols] = deltas.dims.shape3();
    if (deltas.codes.empty()) return deltas;
    std::int32_t *a = deltas.codes.data();
    const std::size_t plane_stride = rows * cols;
    constexpr std::size_t span = 1024;

    // along columns, one row per work item
    parallel_for(workers, planes * rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
            std::int32_t *x = a + row * cols;
            for (std::size_t c = 1; c < cols; ++c) { x[c] = static_cast<std::int32_t>(u(x[c]) + u(x[c - 1])); }
        }
    });

    // along rows, one (plane, column strip) per work item
    const std::size_t strips = (cols + span - 1) / span;
    parallel_for(workers, planes * strips, [&](std::size_t begin, std::size_t end) {
        for (std::size_t item = begin; item < end; ++item) {
            const std::size_t p = item / strips;
            const std::size_t c0 = (item % strips) * span;
            const std::size_t c1 = std::min(cols, c0 + span);
            std::int32_t *plane = a + p * plane_stride;
            for (std::size_t r = 1; r < rows; ++r) {
                std::int32_t *x = plane + r * cols;
                const std::int32_t *prev = x - cols;
                for (std::size_t c = c0; c < c1; ++c) { x[c] = static_cast<std::int32_t>(u(x[c]) + u(prev[c])); }
            }
        }
    });

    // along planes, one strip of the plane per work item
    const std::size_t plane_strips = (plane_stride + span - 1) / span;
    parallel_for(workers, plane_strips, [&](std::size_t begin, std::size_t end) {
        const std::size_t e0 = begin * span;
        const std::size_t e1 = std::min(plane_stride, end * span);
        for (std::size_t p = 1; p < planes; ++p) {
            std::int32_t *x = a + p * plane_stride;
            const std::int32_t *prev = x - plane_stride;
            for (std::size_t e = e0; e < e1; ++e) { x[e] = static_cast<std::int32_t>(u(x[e]) + u(prev[e])); }
        }
    });
    return deltas;
}

QuantizedField quantize_field(const Field &field, const ErrorBound &eb, std::size_t workers) {
    const QuantGrid grid = choose_quant_grid(field, eb, workers);
    const IntGrid q = prequantize(field, grid, workers);
    const auto shape = q.dims.shape3();
    const std::size_t rows = shape[0] * shape[1];

    QuantizedField out;
    out.codes.resize(q.codes.size());
    out.dims = q.dims;
    out.margin_exponent = grid.margin_exponent;

    struct ChunkOverflow {
        std::uint64_t count = 0;
        std::optional<std::size_t> first;
    };
    std::vector<ChunkOverflow> overflow(chunk_count(workers, rows));
    parallel_chunks(workers, rows, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        ChunkOverflow &local = overflow[chunk];
        lorenzo_rows(q.codes.data(), shape, begin, end, [&](std::size_t i, std::int32_t delta) {
            const PackedCode p = pack_code(delta);
            out.codes[i] = p.code;
            if (p.saturated) {
                if (!local.first) local.first = i;
                ++local.count;
            }
        });
    });
    for (const auto &o : overflow) {
        out.overflow_count += o.count;
        if (!out.first_overflow_index && o.first) out.first_overflow_index = o.first;
    }
    return out;
}

Field dequantize_field(const QuantizedField &qf, const ErrorBound &eb, std::size_t workers) {
    if (qf.codes.size() != qf.dims.count()) {
        throw InvalidArgument("quantized field has " + std::to_string(qf.codes.size()) + " codes but dims "
                              + qf.dims.to_string() + " describe " + std::to_string(qf.dims.count()));
    }
    const QuantGrid grid{eb.resolved_abs, qf.margin_exponent};
    if (!(grid.eb > 0.0) || !(grid.margin() * 4.0 <= grid.eb)) throw InvalidArgument("invalid quantization grid");
    IntGrid deltas{std::vector<std::int32_t>(qf.codes.size()), qf.dims};
    parallel_for(workers, qf.codes.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) { deltas.codes[i] = unpack_code(qf.codes[i]); }
    });
    const IntGrid q = inverse_lorenzo(std::move(deltas), workers);

    const double bin = grid.bin_width();
    Field out;
    out.dims = qf.dims;
    out.values.resize(q.codes.size());
    parallel_for(workers, q.codes.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) { out.values[i] = reconstruct_value(q.codes[i], bin); }
    });
    return out;
}

} // namespace fz
