#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bsr {

// Configuration / input validation problems. CLI maps these to exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File and serialization problems.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric computation problems (e.g. nothing scoreable). CLI exit code 3.
struct eval_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, 64-bit. Used everywhere a platform-stable hash is needed
// (name picks, mock decisions, cache keys); std::hash is not stable.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b);

// Maps a 64-bit hash onto [0, 1).
double hash_unit(std::uint64_t h);

std::string hex64(std::uint64_t h);

// splitmix64: tiny deterministic generator for shuffles and seed derivation.
class StableRng {
public:
    explicit StableRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform in [0, n), n > 0. Modulo reduction: bias is irrelevant at our sizes.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

template <typename T>
void stable_shuffle(std::vector<T>& items, std::uint64_t seed) {
    StableRng rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);

// Collapses whitespace runs to single spaces and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::string read_text_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

std::string iso8601_now();

}  // namespace bsr
