#include "nlq/cache.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "nlq/state_io.hpp"

namespace nlq {

namespace {

std::mutex cache_mutex;

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string build_key(const DensityMatrix& rho, SettingsCount settings,
                      const QuantifyOptions& opts) {
    std::ostringstream os;
    os << "v1 dims " << rho.dims().a << ' ' << rho.dims().b << " mat";
    const auto& m = rho.mat();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            os << ' ' << format_double(m(i, j).real(), 17) << ' '
               << format_double(m(i, j).imag(), 17);
    os << " settings " << settings.ma << ' ' << settings.mb << " mode " << to_string(opts.mode)
       << " bisect " << (opts.bisect ? 1 : 0) << " gap_tol " << format_double(opts.gap_tol, 17)
       << " bisect_tol " << format_double(opts.bisect_tol, 17) << " max_iterations "
       << opts.max_iterations << " oracle_cap " << opts.oracle_cap;
    return os.str();
}

void serialize_result(std::ostream& os, const std::string& key, const QuantifyResult& r) {
    os << "nlqc1\n";
    os << "keylen " << key.size() << '\n' << key << '\n';
    os << "lambda " << format_double(r.lambda, 17) << '\n';
    os << "status " << int(r.status) << '\n';
    os << "settings " << r.settings.ma << ' ' << r.settings.mb << '\n';
    os << "mode " << int(r.mode) << '\n';
    os << "bisection " << (r.bisection ? 1 : 0) << '\n';
    os << "bracket " << format_double(r.bracket, 17) << '\n';
    os << "sizes " << r.nu << ' ' << r.mu << ' ' << r.compressed_side << '\n';
    os << "iterations " << r.iterations << '\n';
    os << "defects " << format_double(r.marginal_defect, 17) << ' '
       << format_double(r.invariance_defect, 17) << ' ' << format_double(r.psd_defect, 17)
       << '\n';
    os << "witness " << r.witness.rows() << '\n';
    for (std::size_t i = 0; i < r.witness.rows(); ++i) {
        for (std::size_t j = 0; j < r.witness.cols(); ++j)
            os << (j ? " " : "") << format_double(r.witness(i, j).real(), 17) << ' '
               << format_double(r.witness(i, j).imag(), 17);
        os << '\n';
    }
}

bool expect_tag(std::istream& is, const char* tag) {
    std::string t;
    return bool(is >> t) && t == tag;
}

// false = entry unusable (corrupt or key mismatch); key_matched separates the
// silent-miss case from real corruption
bool deserialize_result(std::istream& is, const std::string& key, QuantifyResult& r,
                        bool& key_matched) {
    key_matched = false;
    std::string magic;
    if (!std::getline(is, magic) || magic != "nlqc1") return false;

    std::size_t keylen = 0;
    if (!expect_tag(is, "keylen") || !(is >> keylen)) return false;
    if (is.get() != '\n') return false;
    std::string stored(keylen, '\0');
    if (!is.read(stored.data(), std::streamsize(keylen))) return false;
    if (is.get() != '\n') return false;
    if (stored != key) return true;  // readable entry for some other problem
    key_matched = true;

    int status = 0, mode = 0, bis = 0;
    std::size_t wside = 0;
    if (!expect_tag(is, "lambda") || !(is >> r.lambda)) return false;
    if (!expect_tag(is, "status") || !(is >> status)) return false;
    if (!expect_tag(is, "settings") || !(is >> r.settings.ma >> r.settings.mb)) return false;
    if (!expect_tag(is, "mode") || !(is >> mode)) return false;
    if (!expect_tag(is, "bisection") || !(is >> bis)) return false;
    if (!expect_tag(is, "bracket") || !(is >> r.bracket)) return false;
    if (!expect_tag(is, "sizes") || !(is >> r.nu >> r.mu >> r.compressed_side)) return false;
    if (!expect_tag(is, "iterations") || !(is >> r.iterations)) return false;
    if (!expect_tag(is, "defects") ||
        !(is >> r.marginal_defect >> r.invariance_defect >> r.psd_defect))
        return false;
    if (!expect_tag(is, "witness") || !(is >> wside)) return false;
    if (status < 0 || status > 4 || mode < 0 || mode > 1 || wside > 4096) return false;
    r.status = SolveStatus(status);
    r.mode = ExtensionMode(mode);
    r.bisection = bis != 0;
    r.witness = ComplexMatrix(wside, wside);
    for (std::size_t i = 0; i < wside; ++i)
        for (std::size_t j = 0; j < wside; ++j) {
            double re = 0.0, im = 0.0;
            if (!(is >> re >> im)) return false;
            r.witness(i, j) = {re, im};
        }
    return true;
}

}  // namespace

std::string cache_directory() {
    const char* dir = std::getenv("NLQ_CACHE_DIR");
    return dir ? std::string(dir) : std::string();
}

QuantifyResult cached_quantify(const DensityMatrix& rho, SettingsCount settings,
                               const QuantifyOptions& opts, bool* hit) {
    if (hit) *hit = false;
    const std::string dir = cache_directory();
    if (dir.empty()) return quantify(rho, settings, opts);

    const std::string key = build_key(rho, settings, opts);
    const std::filesystem::path path =
        std::filesystem::path(dir) / (fnv1a_hex(key) + ".nlqc");

    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        std::ifstream in(path, std::ios::binary);
        if (in) {
            QuantifyResult r;
            bool key_matched = false;
            if (deserialize_result(in, key, r, key_matched)) {
                if (key_matched) {
                    if (hit) *hit = true;
                    return r;
                }
                // other-problem entry at this digest: fall through, recompute
            } else {
                std::cerr << "nlq: cache entry " << path.string()
                          << " is corrupt; recomputing\n";
            }
        }
    }

    QuantifyResult r = quantify(rho, settings, opts);

    std::lock_guard<std::mutex> lock(cache_mutex);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return r;  // unwritable cache never blocks the answer
        serialize_result(out, key, r);
        if (!out.flush()) {
            std::filesystem::remove(tmp, ec);
            return r;
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
    return r;
}

}  // namespace nlq
