#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace qivar {

// SplitMix64 finalizer, used to derive well-separated substream seeds by
// counter splitting: every (master, tag, index) triple maps to its own
// seed, so parallel draws are reproducible regardless of thread count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) {
    return mix64(mix64(mix64(master) ^ tag) ^ index);
}

// Substream tags; one per independent consumer of randomness.
namespace stream_tag {
constexpr std::uint64_t theta_bootstrap = 0x7468657461ULL;
constexpr std::uint64_t eta_normal = 0x657461ULL;
constexpr std::uint64_t sim_params = 0x706172616dULL;
constexpr std::uint64_t sim_replicate = 0x726570ULL;
constexpr std::uint64_t oracle = 0x6f7261636cULL;
}  // namespace stream_tag

// Self-contained stream of the variates the project needs. Samplers are
// written out explicitly (not std::*_distribution) so a fixed seed pins
// the exact byte stream of every output file.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0,1).
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Standard logistic by inverse CDF.
    double logistic() {
        const double u = uniform();
        return std::log(u / (1.0 - u));
    }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    // Draws an index in 0..k-1 with the given (normalized) probabilities.
    int categorical(const Eigen::VectorXd& probs) {
        const double u = uniform();
        double cum = 0.0;
        for (Eigen::Index k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size() - 1);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items
// must be independent and write only to their own slots; the static
// index partition makes the result independent of the thread count.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace qivar
