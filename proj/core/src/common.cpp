#include "offmoo/common.hpp"
#include "offmoo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <numbers>

namespace offmoo {

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw SizeError("Rng::below: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r > limit);
    return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return splitmix64(splitmix64(base) ^ (tag * 0xd6e8feb86659fd93ULL + 1));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    // FNV-1a over the tag.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(base, h);
}

std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace offmoo
