#include "fz/io_corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <system_error>

namespace fz {

static_assert(std::endian::native == std::endian::little, "raw f32 files are read as native little-endian");

namespace {

double unit_uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error reading " + path.string());
    return bytes;
}

void write_file_atomic(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("error writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

Field read_raw_f32(const std::filesystem::path &path, const Dims &dims) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
    const std::uint64_t expected = dims.count() * sizeof(float);
    if (size != expected) {
        throw IoError("size mismatch for " + path.string() + ": dims " + dims.to_string() + " need " + std::to_string(expected)
                      + " bytes, file has " + std::to_string(size));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<float> values(dims.count());
    in.read(reinterpret_cast<char *>(values.data()), static_cast<std::streamsize>(expected));
    if (!in && expected != 0) throw IoError("short read from " + path.string());
    return Field(std::move(values), dims);
}

void write_raw_f32(const Field &field, const std::filesystem::path &path) {
    std::vector<std::uint8_t> bytes(field.values.size() * sizeof(float));
    if (!bytes.empty()) std::memcpy(bytes.data(), field.values.data(), bytes.size());
    write_file_atomic(path, bytes);
}

GeneratorKind parse_generator_kind(std::string_view name) {
    for (auto kind : kAllGenerators) {
        if (generator_name(kind) == name) return kind;
    }
    throw InvalidArgument("unknown generator kind '" + std::string(name)
                          + "' (expected constant, ramp, sine-product, uniform-noise or smooth-random-walk)");
}

std::string_view generator_name(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::constant: return "constant";
    case GeneratorKind::ramp: return "ramp";
    case GeneratorKind::sine_product: return "sine-product";
    case GeneratorKind::uniform_noise: return "uniform-noise";
    case GeneratorKind::smooth_random_walk: return "smooth-random-walk";
    }
    return "unknown";
}

Field generate(GeneratorKind kind, const Dims &dims, std::uint64_t seed) {
    const std::size_t n = dims.count();
    std::vector<float> v(n);
    std::mt19937_64 rng(seed);
    const auto shape = dims.shape3();

    switch (kind) {
    case GeneratorKind::constant: std::fill(v.begin(), v.end(), kConstantValue); break;

    case GeneratorKind::ramp:
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(static_cast<double>(i) * kRampStep);
        break;

    case GeneratorKind::sine_product: {
        // separable: one table per axis, values multiplied per point
        std::array<std::vector<double>, 3> axis;
        for (std::size_t a = 0; a < 3; ++a) {
            const double freq = 1.0 + 3.0 * unit_uniform(rng);
            const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
            axis[a].resize(shape[a]);
            for (std::size_t i = 0; i < shape[a]; ++i) {
                axis[a][i] = shape[a] == 1 ? 1.0
                                           : std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i)
                                                               / static_cast<double>(shape[a])
                                                       + phase);
            }
        }
        std::size_t i = 0;
        for (std::size_t p = 0; p < shape[0]; ++p) {
            for (std::size_t r = 0; r < shape[1]; ++r) {
                const double pr = axis[0][p] * axis[1][r];
                for (std::size_t c = 0; c < shape[2]; ++c) v[i++] = static_cast<float>(pr * axis[2][c]);
            }
        }
        break;
    }

    case GeneratorKind::uniform_noise:
        for (auto &x : v) x = static_cast<float>(2.0 * unit_uniform(rng) - 1.0);
        break;

    case GeneratorKind::smooth_random_walk: {
        std::vector<double> w(n);
        for (auto &x : w) x = 2.0 * unit_uniform(rng) - 1.0;
        const std::size_t cols = shape[2], plane = shape[1] * shape[2];
        for (std::size_t i = 0; i < n; ++i) {
            if (i % cols) w[i] += w[i - 1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i % plane >= cols) w[i] += w[i - cols];
        }
        for (std::size_t i = plane; i < n; ++i) w[i] += w[i - plane];
        if (n > 0) {
            const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
            const double mid = 0.5 * (*hi + *lo);
            const double half = 0.5 * (*hi - *lo);
            for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(half > 0 ? (w[i] - mid) / half : 0.0);
        }
        break;
    }
    }
    return Field(std::move(v), dims);
}

} // namespace fz
