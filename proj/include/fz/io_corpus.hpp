#pragma once

#include "fz/field.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fz {

/// Reads a headerless little-endian f32 array (SDRBench layout). The file size must be
/// exactly 4 x dims.count() bytes.
Field read_raw_f32(const std::filesystem::path &path, const Dims &dims);

/// Writes the values as a headerless little-endian f32 array, via a temporary file that is
/// renamed into place.
void write_raw_f32(const Field &field, const std::filesystem::path &path);

/// Writes bytes to `path` through `path.tmp` + rename; nothing is left behind on failure.
void write_file_atomic(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path &path);

enum class GeneratorKind { constant, ramp, sine_product, uniform_noise, smooth_random_walk };

inline constexpr GeneratorKind kAllGenerators[] = {GeneratorKind::constant, GeneratorKind::ramp,
        GeneratorKind::sine_product, GeneratorKind::uniform_noise, GeneratorKind::smooth_random_walk};

/// Kind names: constant, ramp, sine-product, uniform-noise, smooth-random-walk.
GeneratorKind parse_generator_kind(std::string_view name);
std::string_view generator_name(GeneratorKind kind);

/// Values of the constant generator.
inline constexpr float kConstantValue = 1.0f;
/// Increment per linear index of the ramp generator.
inline constexpr double kRampStep = 1e-3;

/// Deterministic synthetic field. Random kinds draw from std::mt19937_64 seeded with `seed`,
/// mapping the top 53 bits to [0, 1) by hand so results do not depend on the standard library's
/// distribution implementations.
///  - constant: every value kConstantValue
///  - ramp: value i = i * kRampStep over the linear index
///  - sine-product: product over axes of sin(2 pi f x / n + phase), seeded phases and f in [1, 4]
///  - uniform-noise: independent uniform values in [-1, 1)
///  - smooth-random-walk: uniform [-1, 1) increments integrated along every axis, scaled to [-1, 1]
Field generate(GeneratorKind kind, const Dims &dims, std::uint64_t seed);

} // namespace fz
