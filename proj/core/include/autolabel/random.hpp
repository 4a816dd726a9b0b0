#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace autolabel {

/// Seed for a named sub-stream of a master seed. Every stochastic stage of a
/// run pulls from its own stream, so adding draws to one stage never shifts
/// the draws of another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index);

/// FNV-1a over raw bytes; used for dataset digests.
std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);

/// Deterministic random source. Scalar draws are hand-rolled on top of
/// std::mt19937_64 so sequences never depend on the standard library's
/// distribution implementations, which are not pinned by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller.
    double normal();

    /// Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace autolabel
