#include "fz/container.hpp"

#include "fz/block_encoder.hpp"
#include "fz/parallel.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace fz {

namespace {

class ByteWriter {
  public:
    explicit ByteWriter(std::vector<std::uint8_t> &out) : out_(out) {}

    template<typename T>
    void put(T value) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                std::conditional_t<sizeof(T) == 4, std::uint32_t, std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        const auto bits = std::bit_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }

    void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }

  private:
    std::vector<std::uint8_t> &out_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    template<typename T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                std::conditional_t<sizeof(T) == 4, std::uint32_t, std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }

    bool zeros(std::size_t n) {
        bool all_zero = true;
        for (std::size_t i = 0; i < n; ++i) all_zero &= in_[pos_ + i] == 0;
        pos_ += n;
        return all_zero;
    }

    std::size_t position() const { return pos_; }

  private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

Dims Header::field_dims() const {
    std::array<std::size_t, 3> extents{};
    for (int i = 0; i < rank; ++i) extents[i] = static_cast<std::size_t>(dims[i]);
    return Dims(std::span<const std::size_t>(extents.data(), rank));
}

void validate(const Container &c) {
    const Header &h = c.header;
    if (h.version != kFormatVersion) throw CorruptStream("unsupported format version " + std::to_string(h.version));
    if (h.flags & ~header_flags::known) throw CorruptStream("unknown header flag bits");
    if (h.rank < 1 || h.rank > 3) throw CorruptStream("rank " + std::to_string(h.rank) + " out of range");

    std::uint64_t product = 1;
    for (int i = 0; i < 3; ++i) {
        if (i >= h.rank && h.dims[i] != 1) throw CorruptStream("unused dimension is not 1");
        if (__builtin_mul_overflow(product, h.dims[i], &product)) throw CorruptStream("dimension product overflows");
    }
    if (product != h.element_count) throw CorruptStream("element_count does not match dims");
    if (!std::isfinite(h.eb_abs) || !(h.eb_abs > 0)) throw CorruptStream("eb_abs is not a positive finite number");
    if (!std::isfinite(h.eb_input) || !(h.eb_input > 0)) throw CorruptStream("eb_input is not a positive finite number");
    if (h.flags & header_flags::narrowed_bins) {
        if (h.margin_exponent < -149 || std::ldexp(1.0, h.margin_exponent) * 4.0 > h.eb_abs) {
            throw CorruptStream("bin margin out of range");
        }
    } else if (h.margin_exponent != 0) {
        throw CorruptStream("bin margin set without the narrowed-bins flag");
    }
    if (h.overflow_count > h.element_count) throw CorruptStream("overflow_count exceeds element_count");
    if ((h.flags & header_flags::strict) && h.overflow_count != 0) {
        throw CorruptStream("strict container reports overflowed codes");
    }

    if (h.tile_count != tiles_for_codes(h.element_count)) throw CorruptStream("tile_count does not match element_count");
    if (c.bit_flags.size() != h.tile_count * kFlagWordsPerTile) throw CorruptStream("bit-flag section size mismatch");

    std::uint64_t set = 0;
    for (auto w : c.bit_flags) set += static_cast<std::uint64_t>(std::popcount(w));
    if (set != h.nonzero_block_count) throw CorruptStream("nonzero_block_count does not match the bit flags");
    if (h.payload_byte_length != h.nonzero_block_count * kBlockBytes) {
        throw CorruptStream("payload_byte_length is not 16 x nonzero_block_count");
    }
    if (c.payload.size() != h.payload_byte_length) throw CorruptStream("payload length mismatch");
}

std::vector<std::uint8_t> serialize(const Container &c) {
    const Header &h = c.header;
    std::vector<std::uint8_t> out;
    out.reserve(c.byte_size());
    ByteWriter w(out);
    for (char ch : kMagic) w.put(static_cast<std::uint8_t>(ch));
    w.put(h.version);
    w.put(h.flags);
    w.put(h.rank);
    w.zeros(3);
    for (auto d : h.dims) w.put(d);
    w.put(h.element_count);
    w.put(h.eb_abs);
    w.put(h.eb_input);
    w.put(h.overflow_count);
    w.put(h.tile_count);
    w.put(h.nonzero_block_count);
    w.put(h.payload_byte_length);
    w.put(h.margin_exponent);
    w.zeros(kHeaderBytes - out.size());
    for (auto f : c.bit_flags) w.put(f);
    out.insert(out.end(), c.payload.begin(), c.payload.end());
    return out;
}

Container parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) {
        throw CorruptStream("truncated header (" + std::to_string(bytes.size()) + " bytes)");
    }
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) throw CorruptStream("bad magic");

    Container c;
    Header &h = c.header;
    ByteReader r(bytes.subspan(kMagic.size()));
    h.version = r.get<std::uint16_t>();
    h.flags = r.get<std::uint16_t>();
    h.rank = r.get<std::uint8_t>();
    if (!r.zeros(3)) throw CorruptStream("reserved header bytes are not zero");
    for (auto &d : h.dims) d = r.get<std::uint64_t>();
    h.element_count = r.get<std::uint64_t>();
    h.eb_abs = r.get<double>();
    h.eb_input = r.get<double>();
    h.overflow_count = r.get<std::uint64_t>();
    h.tile_count = r.get<std::uint64_t>();
    h.nonzero_block_count = r.get<std::uint64_t>();
    h.payload_byte_length = r.get<std::uint64_t>();
    h.margin_exponent = r.get<std::int16_t>();
    if (!r.zeros(kHeaderBytes - kMagic.size() - r.position())) throw CorruptStream("reserved header bytes are not zero");

    // size law, checked before anything is allocated
    const std::uint64_t body = bytes.size() - kHeaderBytes;
    if (h.tile_count > body / kFlagBytesPerTile) throw CorruptStream("file too short for its bit-flag section");
    const std::uint64_t flag_bytes = h.tile_count * kFlagBytesPerTile;
    if (body - flag_bytes != h.payload_byte_length) {
        throw CorruptStream("file size " + std::to_string(bytes.size()) + " does not match header ("
                            + std::to_string(kHeaderBytes) + " + " + std::to_string(flag_bytes) + " + "
                            + std::to_string(h.payload_byte_length) + ")");
    }

    c.bit_flags.resize(h.tile_count * kFlagWordsPerTile);
    ByteReader flags(bytes.subspan(kHeaderBytes, flag_bytes));
    for (auto &f : c.bit_flags) f = flags.get<std::uint32_t>();
    const auto payload = bytes.subspan(kHeaderBytes + flag_bytes);
    c.payload.assign(payload.begin(), payload.end());
    validate(c);
    return c;
}

Container compress(const Field &field, const CompressOptions &opts, StageTimings *timings) {
    if (field.values.size() != field.dims.count()) throw InvalidArgument("field size does not match its dims");
    const auto start = std::chrono::steady_clock::now();

    Field transformed;
    if (opts.log_transform) transformed = log_transform(field, LogDirection::forward, opts.workers);
    const Field &input = opts.log_transform ? transformed : field;

    const ErrorBound eb = resolve_error_bound(input, opts.mode, opts.eb);
    QuantizedField qf = quantize_field(input, eb, opts.workers);
    if (opts.strict && qf.overflow_count > 0) throw QuantizationOverflow(*qf.first_overflow_index);
    if (timings) timings->quantize_seconds = seconds_since(start);

    EncodeTimings et;
    EncodedStream enc = encode_codes(qf.codes, opts.workers, &et);

    Container c;
    Header &h = c.header;
    h.flags = static_cast<std::uint16_t>((opts.strict ? header_flags::strict : 0)
                                         | (opts.mode == BoundMode::relative ? header_flags::relative_bound : 0)
                                         | (opts.log_transform ? header_flags::log_transform : 0)
                                         | (qf.margin_exponent ? header_flags::narrowed_bins : 0));
    h.rank = static_cast<std::uint8_t>(field.dims.rank());
    for (int i = 0; i < 3; ++i) h.dims[i] = field.dims[i];
    h.element_count = field.values.size();
    h.eb_abs = eb.resolved_abs;
    h.eb_input = opts.eb;
    h.margin_exponent = static_cast<std::int16_t>(qf.margin_exponent.value_or(0));
    h.overflow_count = qf.overflow_count;
    h.tile_count = enc.tile_count;
    h.nonzero_block_count = enc.nonzero_blocks;
    h.payload_byte_length = enc.payload.size();
    c.bit_flags = std::move(enc.bit_flags);
    c.payload = std::move(enc.payload);

    if (timings) {
        timings->shuffle_flag_seconds = et.shuffle_flag_seconds;
        timings->scan_seconds = et.scan_seconds;
        timings->compact_seconds = et.compact_seconds;
        timings->total_seconds = seconds_since(start);
    }
    return c;
}

Field decompress(const Container &c, std::size_t workers, bool apply_inverse_transform) {
    validate(c);
    const Header &h = c.header;
    QuantizedField qf;
    qf.dims = h.field_dims();
    qf.overflow_count = h.overflow_count;
    if (h.flags & header_flags::narrowed_bins) qf.margin_exponent = h.margin_exponent;
    qf.codes = decode_codes(c.bit_flags, c.payload, h.element_count, workers);
    Field out = dequantize_field(qf, ErrorBound::absolute(h.eb_abs), workers);
    if (apply_inverse_transform && (h.flags & header_flags::log_transform)) {
        out = log_transform(out, LogDirection::inverse, workers);
    }
    return out;
}

Field log_transform(const Field &field, LogDirection direction, std::size_t workers) {
    Field out;
    out.dims = field.dims;
    out.values.resize(field.values.size());
    parallel_for(workers, field.values.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double v = field.values[i];
            if (direction == LogDirection::forward) {
                if (!(v > 0.0) || !std::isfinite(v)) {
                    throw InvalidInputData("log transform needs strictly positive finite values (index "
                                          + std::to_string(i) + ")");
                }
                out.values[i] = static_cast<float>(std::log(v));
            } else {
                out.values[i] = static_cast<float>(std::exp(v));
            }
        }
    });
    return out;
}

} // namespace fz
