#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qdfg {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = stream ^ 0xD1B54A32D192ED03ULL;
    std::uint64_t b = splitmix64(s);
    s = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

} // namespace detail

/// Deterministic random source with cheap independent substreams.
///
/// All draw primitives are implemented on top of the raw mt19937_64 output so
/// results are identical across standard libraries and platforms. Substreams
/// derived with fork() are statistically independent, which lets parallel
/// work units (trees, folds, traces) produce the same results as a serial run.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed)
        , stream_(stream)
        , gen_(detail::mix_stream(seed, stream)) {}

    /// Derived generator for parallel work unit `index`.
    Rng fork(std::uint64_t index) const {
        std::uint64_t s = stream_;
        std::uint64_t child = detail::splitmix64(s) ^ (index + 1);
        return Rng(seed_, child);
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Unbiased draw in [0, n). Lemire's multiply-shift rejection.
    std::uint64_t below(std::uint64_t n) {
        assert(n > 0);
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        assert(lo <= hi);
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(span == 0 ? next_u64() : below(span));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    bool bernoulli(double p) { return uniform_real() < p; }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double normal() {
        const double u1 = 1.0 - uniform_real();
        const double u2 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        assert(!v.empty());
        return v[static_cast<std::size_t>(below(v.size()))];
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 gen_;
};

} // namespace qdfg
