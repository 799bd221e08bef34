#include "fz/metrics.hpp"

#include "fz/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fz {

void ExactSum::add(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("ExactSum accepts nonnegative finite values only");
    if (v == 0.0) return;
    int e = 0;
    const double m = std::frexp(v, &e);
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
    int position = e - 53 + 1074;
    if (position < 0) {
        // subnormal: the low bits shifted out are zero
        mantissa >>= -position;
        position = 0;
    }
    // mantissa << shift spans at most 85 bits: three 32-bit digits
    const int shift = position % 32;
    const std::uint64_t low = mantissa << shift;
    const std::size_t d = static_cast<std::size_t>(position / 32);
    digits_[d] += low & 0xFFFFFFFFu;
    digits_[d + 1] += low >> 32;
    digits_[d + 2] += shift ? mantissa >> (64 - shift) : 0;
    if (++pending_ == (1u << 30)) normalize();
}

void ExactSum::merge(const ExactSum &other) {
    ExactSum o = other;
    o.normalize();
    normalize();
    for (std::size_t i = 0; i < kDigits; ++i) digits_[i] += o.digits_[i];
    normalize();
}

void ExactSum::normalize() {
    for (std::size_t i = 0; i + 1 < kDigits; ++i) {
        digits_[i + 1] += digits_[i] >> 32;
        digits_[i] &= 0xFFFFFFFFu;
    }
    pending_ = 0;
}

double ExactSum::value() const {
    ExactSum n = *this;
    n.normalize();
    double out = 0.0;
    for (std::size_t i = kDigits; i-- > 0;) {
        if (n.digits_[i]) out += std::ldexp(static_cast<double>(n.digits_[i]), static_cast<int>(32 * i) - 1074);
    }
    return out;
}

namespace {

void check_lengths(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

} // namespace

double max_abs_error(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers) {
    check_lengths(original, reconstructed);
    std::vector<double> partial(chunk_count(workers, original.size()), 0.0);
    parallel_chunks(workers, original.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        double m = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            m = std::max(m, std::abs(static_cast<double>(original[i]) - static_cast<double>(reconstructed[i])));
        }
        partial[c] = m;
    });
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

double mse(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers) {
    check_lengths(original, reconstructed);
    if (original.empty()) throw InvalidArgument("mse of empty fields");
    std::vector<ExactSum> partial(chunk_count(workers, original.size()));
    parallel_chunks(workers, original.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double d = static_cast<double>(original[i]) - static_cast<double>(reconstructed[i]);
            partial[c].add(d * d);
        }
    });
    ExactSum total;
    for (const auto &p : partial) total.merge(p);
    return total.value() / static_cast<double>(original.size());
}

double value_range(std::span<const float> values) {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return static_cast<double>(*hi) - static_cast<double>(*lo);
}

double psnr(std::span<const float> original, std::span<const float> reconstructed, std::size_t workers) {
    const double m = mse(original, reconstructed, workers);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    const double range = value_range(original);
    return 10.0 * std::log10(range * range / m);
}

double ssim_2d(std::span<const float> original, std::span<const float> reconstructed, std::size_t rows, std::size_t cols,
        double dynamic_range) {
    check_lengths(original, reconstructed);
    if (original.size() != rows * cols) throw InvalidArgument("slice size does not match rows x cols");
    if (rows < kSsimWindow || cols < kSsimWindow) {
        throw InvalidArgument("SSIM needs slices of at least 8x8 (got " + std::to_string(rows) + "x"
                              + std::to_string(cols) + ")");
    }
    const double c1 = (kSsimK1 * dynamic_range) * (kSsimK1 * dynamic_range);
    const double c2 = (kSsimK2 * dynamic_range) * (kSsimK2 * dynamic_range);

    // summed-area tables over values shifted by a common offset to limit cancellation
    double shift = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        shift += static_cast<double>(original[i]) + static_cast<double>(reconstructed[i]);
    }
    shift /= 2.0 * static_cast<double>(original.size());

    const std::size_t w = cols + 1;
    std::vector<double> sx((rows + 1) * w, 0.0), sy(sx), sxx(sx), syy(sx), sxy(sx);
    for (std::size_t r = 0; r < rows; ++r) {
        double rx = 0, ry = 0, rxx = 0, ryy = 0, rxy = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = static_cast<double>(original[r * cols + c]) - shift;
            const double y = static_cast<double>(reconstructed[r * cols + c]) - shift;
            rx += x;
            ry += y;
            rxx += x * x;
            ryy += y * y;
            rxy += x * y;
            const std::size_t k = (r + 1) * w + c + 1;
            sx[k] = sx[k - w] + rx;
            sy[k] = sy[k - w] + ry;
            sxx[k] = sxx[k - w] + rxx;
            syy[k] = syy[k - w] + ryy;
            sxy[k] = sxy[k - w] + rxy;
        }
    }
    auto box = [&](const std::vector<double> &s, std::size_t r, std::size_t c) {
        const std::size_t r1 = r + kSsimWindow, c1_ = c + kSsimWindow;
        return s[r1 * w + c1_] - s[r * w + c1_] - s[r1 * w + c] + s[r * w + c];
    };

    const double n = static_cast<double>(kSsimWindow * kSsimWindow);
    double total = 0.0;
    for (std::size_t r = 0; r + kSsimWindow <= rows; ++r) {
        for (std::size_t c = 0; c + kSsimWindow <= cols; ++c) {
            const double mx = box(sx, r, c) / n;
            const double my = box(sy, r, c) / n;
            const double vx = box(sxx, r, c) / n - mx * mx;
            const double vy = box(syy, r, c) / n - my * my;
            const double cov = box(sxy, r, c) / n - mx * my;
            const double ux = mx + shift;
            const double uy = my + shift;
            const double num = (2.0 * (ux * uy) + c1) * (2.0 * cov + c2);
            const double den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
            total += num / den;
        }
    }
    const double windows = static_cast<double>((rows - kSsimWindow + 1) * (cols - kSsimWindow + 1));
    return total / windows;
}

std::optional<double> ssim(const Field &original, const Field &reconstructed) {
    if (!(original.dims == reconstructed.dims)) throw InvalidArgument("SSIM of fields with different dims");
    if (original.dims.rank() < 2) return std::nullopt;
    const auto [planes, rows, cols] = original.dims.shape3();
    const double range = value_range(original.values);
    const std::size_t slice = rows * cols;
    double sum = 0.0;
    for (std::size_t p = 0; p < planes; ++p) {
        sum += ssim_2d(std::span(original.values).subspan(p * slice, slice),
                std::span(reconstructed.values).subspan(p * slice, slice), rows, cols, range);
    }
    return sum / static_cast<double>(planes);
}

double overall_throughput(double compress_throughput, double compression_ratio, double link_bandwidth) {
    if (!(compress_throughput > 0) || !(compression_ratio > 0) || !(link_bandwidth > 0)) {
        throw InvalidArgument("overall throughput needs positive throughput, ratio and bandwidth");
    }
    return 1.0 / (1.0 / (link_bandwidth * compression_ratio) + 1.0 / compress_throughput);
}

MetricsReport evaluate(const Field &original, const Field &reconstructed, const Container &container,
        double compress_seconds, double link_bandwidth, std::size_t workers) {
    MetricsReport m;
    m.max_abs_err = max_abs_error(original.values, reconstructed.values, workers);
    m.mse = mse(original.values, reconstructed.values, workers);
    m.psnr_db = psnr(original.values, reconstructed.values, workers);
    if (original.dims.rank() >= 2) {
        const auto s = original.dims.shape3();
        if (s[1] >= kSsimWindow && s[2] >= kSsimWindow) m.ssim = ssim(original, reconstructed);
    }
    m.compression_ratio = container.compression_ratio();
    m.bitrate_bits_per_value = container.bitrate();
    m.compress_seconds = compress_seconds;
    if (compress_seconds > 0) {
        m.throughput_gb_per_s = static_cast<double>(container.original_bytes()) / compress_seconds / 1e9;
        m.overall_throughput_gb_per_s = overall_throughput(m.throughput_gb_per_s, m.compression_ratio, link_bandwidth);
    }
    return m;
}

} // namespace fz
