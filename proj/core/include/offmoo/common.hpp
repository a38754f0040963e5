#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace offmoo {

/// m objective values, minimization convention.
using ObjectiveVector = std::vector<double>;
using PointSet = std::vector<ObjectiveVector>;

/// A candidate solution. Continuous tasks store coordinates; permutation
/// tasks store the integers 0..n-1 as exact doubles so that datasets,
/// surrogates and operators share one representation.
using Genotype = std::vector<double>;

// Error kinds surfaced by the library. All derive from offmoo::Error so the
// CLI can catch them uniformly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class EmptyInputError : public Error { public: using Error::Error; };
class SizeError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class CapabilityError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class NumericError : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };

/// Seeded random source.
///
/// Wraps std::mt19937_64 but draws reals and bounded integers itself, since
/// the standard distributions are implementation-defined and we promise
/// byte-identical outputs for identical seeds.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derive an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

/// Decimal with 17 significant digits; parses back to the same double.
std::string format_double(double v);

bool all_finite(std::span<const double> v);

}  // namespace offmoo
