#include "cli_app.hpp"

#include "fz/container.hpp"
#include "fz/io_corpus.hpp"
#include "fz/metrics.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

namespace fz::cli {

namespace {

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The five relative bounds swept by default.
const std::vector<double> kDefaultSweepBounds{1e-2, 5e-3, 1e-3, 5e-4, 1e-4};

struct CliConfig {
    std::string input;
    std::string generator;
    std::uint64_t seed = 1;
    std::string dims;
    std::string output;
    std::string container;
    std::optional<double> eb;
    std::string eb_mode = "rel";
    bool strict = false;
    bool log_transform = false;
    std::size_t workers = 0;
    std::string report = "text";
    double bandwidth = kDefaultLinkBandwidthGBps;
    std::optional<std::string> ebs;
    int reps = 3;
};

Dims parse_dims(const std::string &text) {
    if (text.empty()) throw UsageError("--dims is required (e.g. --dims 100,500,500, slowest axis first)");
    std::vector<std::size_t> extents;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(part, &used);
        } catch (const std::exception &) { used = 0; }
        if (used == 0 || used != part.size()) throw UsageError("malformed --dims '" + text + "'");
        extents.push_back(static_cast<std::size_t>(v));
    }
    if (extents.empty() || extents.size() > 3) throw UsageError("--dims needs 1 to 3 extents, got '" + text + "'");
    return Dims(std::span<const std::size_t>(extents));
}

std::vector<double> parse_bounds(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception &) { used = 0; }
        if (used == 0 || used != part.size() || !(v > 0)) throw UsageError("malformed bound '" + part + "' in --ebs");
        out.push_back(v);
    }
    return out;
}

Field load_field(const CliConfig &cfg) {
    if (cfg.input.empty() == cfg.generator.empty()) {
        throw UsageError("give exactly one of --input PATH or --generate KIND");
    }
    const Dims dims = parse_dims(cfg.dims);
    if (!cfg.generator.empty()) {
        GeneratorKind kind;
        try {
            kind = parse_generator_kind(cfg.generator);
        } catch (const InvalidArgument &e) { throw UsageError(e.what()); }
        return generate(kind, dims, cfg.seed);
    }
    return read_raw_f32(cfg.input, dims);
}

/// Everything but the bound value.
CompressOptions base_options(const CliConfig &cfg) {
    CompressOptions o;
    o.mode = cfg.eb_mode == "abs" ? BoundMode::absolute : BoundMode::relative;
    o.strict = cfg.strict;
    o.log_transform = cfg.log_transform;
    o.workers = cfg.workers;
    return o;
}

CompressOptions compress_options(const CliConfig &cfg) {
    if (!cfg.eb) throw UsageError("--eb is required");
    CompressOptions o = base_options(cfg);
    o.eb = *cfg.eb;
    return o;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.10g}", v);
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::uint64_t fnv1a(const std::vector<std::uint8_t> &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_compress(const CliConfig &cfg, std::ostream &out) {
    const Field field = load_field(cfg);
    const CompressOptions opts = compress_options(cfg);
    StageTimings t;
    const Container c = compress(field, opts, &t);
    write_file_atomic(cfg.output, serialize(c));

    const double gbps = t.total_seconds > 0 ? static_cast<double>(c.original_bytes()) / t.total_seconds / 1e9 : 0.0;
    if (cfg.report == "csv") {
        out << "elements,bytes,compression_ratio,bitrate,throughput_gb_s,overflow_count,eb_abs\n";
        out << c.header.element_count << ',' << c.byte_size() << ',' << format_number(c.compression_ratio()) << ','
            << format_number(c.bitrate()) << ',' << format_number(gbps) << ',' << c.header.overflow_count << ','
            << format_number(c.header.eb_abs) << '\n';
    } else {
        fmt::print(out, "{} values ({}) -> {} bytes  CR={:.4f}  bitrate={:.4f} bits/value  throughput={:.3f} GB/s  "
                        "overflow={}  eb_abs={:.6g}\n",
                c.header.element_count, field.dims.to_string(), c.byte_size(), c.compression_ratio(), c.bitrate(), gbps,
                c.header.overflow_count, c.header.eb_abs);
    }
    return kOk;
}

int cmd_decompress(const CliConfig &cfg, std::ostream &out) {
    const Container c = parse(read_file(cfg.input));
    const Field field = decompress(c, cfg.workers);
    write_raw_f32(field, cfg.output);
    fmt::print(out, "{} values ({}) -> {}\n", field.values.size(), field.dims.to_string(), cfg.output);
    return kOk;
}

enum class BoundCheck { pass, fail, not_guaranteed };

void print_report(std::ostream &out, const std::string &format, const MetricsReport &m, const Container &c,
        BoundCheck check, bool log_domain) {
    const bool timed = m.compress_seconds > 0;
    const char *verdict = check == BoundCheck::pass ? "PASS" : check == BoundCheck::fail ? "FAIL" : "not guaranteed";
    if (format == "csv") {
        out << "max_abs_err,eb_abs,mse,psnr_db,ssim,compression_ratio,bitrate,compress_seconds,throughput_gb_s,"
               "overall_throughput_gb_s,overflow_count,bound_check\n";
        out << format_number(m.max_abs_err) << ',' << format_number(c.header.eb_abs) << ',' << format_number(m.mse) << ','
            << format_number(m.psnr_db) << ',' << (m.ssim ? format_number(*m.ssim) : "") << ','
            << format_number(m.compression_ratio) << ',' << format_number(m.bitrate_bits_per_value) << ',';
        if (timed) {
            out << format_number(m.compress_seconds) << ',' << format_number(m.throughput_gb_per_s) << ','
                << format_number(m.overall_throughput_gb_per_s);
        } else {
            out << ",,";
        }
        out << ',' << c.header.overflow_count << ',' << verdict << '\n';
        return;
    }
    if (log_domain) out << "(errors measured on log-transformed values)\n";
    fmt::print(out, "max abs error     {:.6g}\n", m.max_abs_err);
    fmt::print(out, "error bound       {:.6g}\n", c.header.eb_abs);
    fmt::print(out, "mse               {:.6g}\n", m.mse);
    fmt::print(out, "psnr              {} dB\n", format_number(m.psnr_db));
    fmt::print(out, "ssim              {}\n", m.ssim ? format_number(*m.ssim) : "n/a");
    fmt::print(out, "compression ratio {:.4f}\n", m.compression_ratio);
    fmt::print(out, "bitrate           {:.4f} bits/value\n", m.bitrate_bits_per_value);
    if (timed) {
        fmt::print(out, "compress time     {:.6f} s\n", m.compress_seconds);
        fmt::print(out, "throughput        {:.3f} GB/s\n", m.throughput_gb_per_s);
        fmt::print(out, "overall (modeled) {:.3f} GB/s\n", m.overall_throughput_gb_per_s);
    } else {
        out << "compress time     n/a (existing container)\n";
    }
    fmt::print(out, "overflow count    {}\n", c.header.overflow_count);
    fmt::print(out, "bound check       {}\n", verdict);
}

int cmd_verify(const CliConfig &cfg, std::ostream &out) {
    const Field original = load_field(cfg);
    Container c;
    double seconds = 0;
    if (!cfg.container.empty()) {
        c = parse(read_file(cfg.container));
        if (!(c.header.field_dims() == original.dims)) {
            throw CorruptStream("container dims " + c.header.field_dims().to_string() + " do not match the original "
                                + original.dims.to_string());
        }
    } else {
        StageTimings t;
        c = compress(original, compress_options(cfg), &t);
        seconds = t.total_seconds;
    }

    const bool log_domain = c.header.flags & header_flags::log_transform;
    const Field reference = log_domain ? log_transform(original, LogDirection::forward, cfg.workers) : original;
    const Field reconstructed = decompress(c, cfg.workers, false);
    const MetricsReport m = evaluate(reference, reconstructed, c, seconds, cfg.bandwidth, cfg.workers);

    BoundCheck check = BoundCheck::pass;
    if (c.header.overflow_count > 0) {
        check = BoundCheck::not_guaranteed;
    } else if (!(m.max_abs_err <= c.header.eb_abs)) {
        check = BoundCheck::fail;
    }
    print_report(out, cfg.report, m, c, check, log_domain);
    return check == BoundCheck::fail ? kVerificationFailed : kOk;
}

int cmd_sweep(const CliConfig &cfg, std::ostream &out, std::ostream &err) {
    const Field original = load_field(cfg);
    const std::vector<double> bounds = cfg.ebs ? parse_bounds(*cfg.ebs) : kDefaultSweepBounds;
    CompressOptions opts = base_options(cfg);
    const Field reference = cfg.log_transform ? log_transform(original, LogDirection::forward, cfg.workers) : original;

    std::ostringstream csv;
    csv << "eb,eb_abs,compression_ratio,bitrate,psnr_db,ssim,max_abs_err,overflow_count,status\n";
    for (double eb : bounds) {
        opts.eb = eb;
        try {
            const Container c = compress(original, opts);
            const Field reconstructed = decompress(c, cfg.workers, false);
            const MetricsReport m = evaluate(reference, reconstructed, c, 0.0, cfg.bandwidth, cfg.workers);
            csv << format_number(eb) << ',' << format_number(c.header.eb_abs) << ','
                << format_number(m.compression_ratio) << ',' << format_number(m.bitrate_bits_per_value) << ','
                << format_number(m.psnr_db) << ',' << (m.ssim ? format_number(*m.ssim) : "") << ','
                << format_number(m.max_abs_err) << ',' << c.header.overflow_count << ",ok\n";
        } catch (const Error &e) {
            err << "eb " << eb << ": " << e.what() << '\n';
            csv << format_number(eb) << ",,,,,,,,error: " << csv_safe(e.what()) << '\n';
        }
    }
    const std::string text = csv.str();
    if (cfg.output.empty()) {
        out << text;
    } else {
        write_file_atomic(cfg.output, std::vector<std::uint8_t>(text.begin(), text.end()));
    }
    return kOk;
}

int cmd_bench(const CliConfig &cfg, std::ostream &out) {
    const Field field = load_field(cfg);
    const CompressOptions opts = compress_options(cfg);
    if (cfg.reps < 1) throw UsageError("--reps must be at least 1");

    std::vector<double> quantize, shuffle_flag, scan, compact, total, serialize_s, decompress_s;
    std::vector<std::uint8_t> bytes;
    Container c;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        StageTimings t;
        c = compress(field, opts, &t);
        auto start = std::chrono::steady_clock::now();
        bytes = serialize(c);
        serialize_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        start = std::chrono::steady_clock::now();
        const Field back = decompress(c, opts.workers);
        decompress_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        quantize.push_back(t.quantize_seconds);
        shuffle_flag.push_back(t.shuffle_flag_seconds);
        scan.push_back(t.scan_seconds);
        compact.push_back(t.compact_seconds);
        total.push_back(t.total_seconds);
    }

    const double gb = static_cast<double>(c.original_bytes()) / 1e9;
    auto rate = [&](double s) { return s > 0 ? gb / s : 0.0; };
    const double end_to_end = median(total);
    const double overall = end_to_end > 0 ? overall_throughput(rate(end_to_end), c.compression_ratio(), cfg.bandwidth) : 0.0;
    const std::string hash = fmt::format("{:016x}", fnv1a(bytes));

    struct Row {
        const char *stage;
        double seconds;
    };
    const Row rows[] = {{"quantize", median(quantize)}, {"shuffle+flag", median(shuffle_flag)}, {"scan", median(scan)},
            {"compact", median(compact)}, {"compress", end_to_end}, {"serialize", median(serialize_s)},
            {"decompress", median(decompress_s)}};

    if (cfg.report == "csv") {
        out << "stage,median_seconds,gb_per_s\n";
        for (const auto &r : rows) out << r.stage << ',' << format_number(r.seconds) << ',' << format_number(rate(r.seconds)) << '\n';
        out << "overall_modeled,," << format_number(overall) << '\n';
        out << "# cr=" << format_number(c.compression_ratio()) << " bandwidth=" << format_number(cfg.bandwidth)
            << " workers=" << cfg.workers << " reps=" << cfg.reps << " container_fnv1a=" << hash << '\n';
        return kOk;
    }
    fmt::print(out, "{} values ({}), {} reps, workers={}\n", field.values.size(), field.dims.to_string(), cfg.reps, cfg.workers);
    for (const auto &r : rows) fmt::print(out, "  {:<13} {:10.6f} s  {:9.3f} GB/s\n", r.stage, r.seconds, rate(r.seconds));
    fmt::print(out, "compression ratio {:.4f}, bitrate {:.4f}\n", c.compression_ratio(), c.bitrate());
    fmt::print(out, "modeled overall throughput at {:.1f} GB/s link: {:.3f} GB/s\n", cfg.bandwidth, overall);
    fmt::print(out, "container fnv1a {}\n", hash);
    return kOk;
}

void add_source_options(CLI::App *sub, CliConfig &cfg) {
    sub->add_option("--input", cfg.input, "raw little-endian f32 input file");
    sub->add_option("--generate", cfg.generator,
            "synthetic input: constant|ramp|sine-product|uniform-noise|smooth-random-walk");
    sub->add_option("--seed", cfg.seed, "generator seed");
    sub->add_option("--dims", cfg.dims, "extents D1[,D2[,D3]], slowest axis first");
}

void add_bound_options(CLI::App *sub, CliConfig &cfg, bool with_value) {
    if (with_value) sub->add_option("--eb", cfg.eb, "error bound");
    sub->add_option("--eb-mode", cfg.eb_mode, "rel (value-range relative) or abs")->check(CLI::IsMember({"rel", "abs"}));
    sub->add_flag("--strict", cfg.strict, "fail on any saturated quantization code");
    sub->add_flag("--log-transform", cfg.log_transform, "compress ln(x) of strictly positive data");
}

void add_common_options(CLI::App *sub, CliConfig &cfg) {
    sub->add_option("--workers", cfg.workers, "worker threads (0 = all hardware threads)");
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CliConfig cfg;
    CLI::App app{"fzgp: error-bounded lossy compressor for f32 grids"};
    app.name("fzgp");
    app.require_subcommand(1);

    auto *compress_cmd = app.add_subcommand("compress", "compress a field into a .fz container");
    add_source_options(compress_cmd, cfg);
    add_bound_options(compress_cmd, cfg, true);
    add_common_options(compress_cmd, cfg);
    compress_cmd->add_option("--output", cfg.output, "container path")->required();
    compress_cmd->add_option("--report", cfg.report, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    auto *decompress_cmd = app.add_subcommand("decompress", "decompress a .fz container to raw f32");
    decompress_cmd->add_option("--input", cfg.input, "container path")->required();
    decompress_cmd->add_option("--output", cfg.output, "raw output path")->required();
    add_common_options(decompress_cmd, cfg);

    auto *verify_cmd = app.add_subcommand("verify", "compress, decompress and check the error bound");
    add_source_options(verify_cmd, cfg);
    add_bound_options(verify_cmd, cfg, true);
    add_common_options(verify_cmd, cfg);
    verify_cmd->add_option("--container", cfg.container, "check this existing container instead of compressing");
    verify_cmd->add_option("--report", cfg.report, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    verify_cmd->add_option("--bandwidth", cfg.bandwidth, "link bandwidth for the overall-throughput model, GB/s");

    auto *sweep_cmd = app.add_subcommand("sweep", "rate-distortion sweep over a list of error bounds (CSV)");
    add_source_options(sweep_cmd, cfg);
    add_bound_options(sweep_cmd, cfg, false);
    add_common_options(sweep_cmd, cfg);
    sweep_cmd->add_option("--ebs", cfg.ebs, "comma-separated bounds (default 1e-2,5e-3,1e-3,5e-4,1e-4)");
    sweep_cmd->add_option("--output", cfg.output, "CSV path (default stdout)");
    sweep_cmd->add_option("--bandwidth", cfg.bandwidth, "link bandwidth, GB/s");

    auto *bench_cmd = app.add_subcommand("bench", "per-stage timing and modeled overall throughput");
    add_source_options(bench_cmd, cfg);
    add_bound_options(bench_cmd, cfg, true);
    add_common_options(bench_cmd, cfg);
    bench_cmd->add_option("--reps", cfg.reps, "repetitions (median is reported)");
    bench_cmd->add_option("--bandwidth", cfg.bandwidth, "link bandwidth, GB/s");
    bench_cmd->add_option("--report", cfg.report, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    std::vector<const char *> argv{"fzgp"};
    for (const auto &a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (compress_cmd->parsed()) return cmd_compress(cfg, out);
        if (decompress_cmd->parsed()) return cmd_decompress(cfg, out);
        if (verify_cmd->parsed()) return cmd_verify(cfg, out);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, out, err);
        if (bench_cmd->parsed()) return cmd_bench(cfg, out);
    } catch (const UsageError &e) {
        err << "fzgp: " << e.what() << '\n';
        return kUsage;
    } catch (const QuantizationOverflow &e) {
        err << "fzgp: " << e.what() << '\n';
        return kStrictOverflow;
    } catch (const CorruptStream &e) {
        err << "fzgp: " << e.what() << '\n';
        return kCorruptContainer;
    } catch (const IoError &e) {
        err << "fzgp: " << e.what() << '\n';
        return kIoError;
    } catch (const InvalidArgument &e) {
        err << "fzgp: " << e.what() << '\n';
        return kUsage;
    } catch (const Error &e) {
        err << "fzgp: " << e.what() << '\n';
        return kInvalidData;
    }
    return kUsage;
}

} // namespace fz::cli
