#pragma once

#include "fz/container.hpp"
#include "fz/field.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>

namespace fz {

/// Per-GPU host link bandwidth used as the default for the overall-throughput model, GB/s.
inline constexpr double kDefaultLinkBandwidthGBps = 11.4;

/// Exact sum of nonnegative doubles in a fixed-point accumulator wide enough for the whole
/// double range. The result is independent of summation order and of how partial sums are
/// grouped.
class ExactSum {
  public:
    void add(double v);
    void merge(const ExactSum &other);
    double value() const;

  private:
    void normalize();

    // 32-bit digits of a fixed-point number whose lowest bit is 2^-1074
    static constexpr std::size_t kDigits = 68;
    std::array<std::uint64_t, kDigits> digits_{};
    std::uint32_t pending_ = 0;
};

double max_abs_error(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers = 1);
double mse(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers = 1);

/// max - min of the values, in double.
double value_range(std::span<const float> values);

/// 10 log10(range^2 / MSE) with range = max - min of the original; +inf when MSE is 0.
double psnr(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers = 1);

inline constexpr std::size_t kSsimWindow = 8;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over all 8x8 windows (stride 1) of a rows x cols slice.
double ssim_2d(std::span<const float> original, std::span<const float> reconstructed, std::size_t rows, std::size_t cols,
        double dynamic_range);

/// SSIM of a 2D field, or the mean over the slowest-axis slices of a 3D field, with the
/// original's value range as dynamic range. Empty for 1D fields.
std::optional<double> ssim(const Field &original, const Field &reconstructed);

/// ((BW x CR)^-1 + T_compr^-1)^-1, all quantities positive.
double overall_throughput(double compress_throughput, double compression_ratio, double link_bandwidth);

struct MetricsReport {
    double max_abs_err = 0;
    double mse = 0;
    double psnr_db = 0;
    std::optional<double> ssim;
    double compression_ratio = 0;
    double bitrate_bits_per_value = 0;
    double compress_seconds = 0;
    double throughput_gb_per_s = 0;
    double overall_throughput_gb_per_s = 0;
};

MetricsReport evaluate(const Field &original, const Field &reconstructed, const Container &container,
        double compress_seconds, double link_bandwidth = kDefaultLinkBandwidthGBps, std::size_t workers = 1);

} // namespace fz
