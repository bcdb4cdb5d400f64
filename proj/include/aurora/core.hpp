#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace aurora {

using Real = double;

/// Closed interval [lo, hi].
struct Interval {
    Real lo = 0.0;
    Real hi = 1.0;

    Real width() const { return hi - lo; }
    Real clamp(Real v) const { return v < lo ? lo : (v > hi ? hi : v); }
    bool contains(Real v) const { return v >= lo && v <= hi; }
};

using GeneBounds = std::vector<Interval>;

/// Fixed-length bounded real vector. Bounds are shared between all
/// genotypes of a task, so copies stay cheap.
class Genotype {
public:
    Genotype() = default;

    explicit Genotype(std::shared_ptr<const GeneBounds> bounds)
        : values_(bounds ? bounds->size() : 0, 0.0), bounds_(std::move(bounds)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            values_[i] = (*bounds_)[i].clamp(0.0);
        }
    }

    Genotype(std::vector<Real> values, std::shared_ptr<const GeneBounds> bounds)
        : values_(std::move(values)), bounds_(std::move(bounds)) {
        if (!bounds_ || bounds_->size() != values_.size()) {
            throw std::invalid_argument("genotype length does not match its bounds");
        }
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<Real>& values() const { return values_; }
    std::vector<Real>& values() { return values_; }
    Real operator[](std::size_t i) const { return values_[i]; }
    Real& operator[](std::size_t i) { return values_[i]; }

    const GeneBounds& bounds() const { return *bounds_; }
    const std::shared_ptr<const GeneBounds>& shared_bounds() const { return bounds_; }

    bool within_bounds() const {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(*bounds_)[i].contains(values_[i])) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const Genotype& a, const Genotype& b) { return a.values_ == b.values_; }

private:
    std::vector<Real> values_;
    std::shared_ptr<const GeneBounds> bounds_;
};

inline Genotype clamp_to_bounds(Genotype g) {
    const auto& bounds = g.bounds();
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = bounds[i].clamp(g[i]);
    }
    return g;
}

/// Raw per-evaluation observation (image pixels, trajectory samples, ...).
struct SensoryData {
    std::vector<Real> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const SensoryData&, const SensoryData&) = default;
};

/// Behavioural descriptor: a point in the space where diversity is measured.
struct Descriptor {
    std::vector<Real> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

inline Real squared_distance(const Descriptor& a, const Descriptor& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("descriptor dimension mismatch");
    }
    Real acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const Real d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return acc;
}

inline Real euclidean_distance(const Descriptor& a, const Descriptor& b) {
    return std::sqrt(squared_distance(a, b));
}

/// Output of a single task evaluation.
struct Evaluation {
    Real fitness = 0.0;
    SensoryData sensory;
    Descriptor hand_coded_bd;
};

struct Individual {
    Genotype genotype;
    Real fitness = 0.0;
    SensoryData sensory;
    Descriptor descriptor;
    Descriptor hand_coded_bd;
    std::optional<Real> novelty;
    std::optional<Real> surprise;
    // Creation order; older individuals have smaller ids.
    std::uint64_t id = 0;
    std::uint64_t birth_iteration = 0;
};

/// Deterministic random stream.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard,
/// and converted to reals by hand so the sequence does not depend on the
/// standard library's distribution implementations. Named sub-streams are
/// derived from the seed, so adding a consumer never shifts another one.
class Rng {
public:
    static constexpr std::string_view kVersion = "mt19937_64+splitmix64/v1";

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    Rng derive(std::string_view stream) const { return Rng(splitmix64(seed_ ^ fnv1a(stream))); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

    Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        // Lemire's multiply-shift with rejection: unbiased and portable.
        const std::uint64_t range = n;
        __uint128_t m = static_cast<__uint128_t>(engine_()) * range;
        auto low = static_cast<std::uint64_t>(m);
        if (low < range) {
            const std::uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                m = static_cast<__uint128_t>(engine_()) * range;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    /// Standard normal via Box-Muller.
    Real normal() {
        Real u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const Real u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    static constexpr std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

inline Genotype random_genotype(const std::shared_ptr<const GeneBounds>& bounds, Rng& rng) {
    std::vector<Real> values(bounds->size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = rng.uniform((*bounds)[i].lo, (*bounds)[i].hi);
    }
    return Genotype(std::move(values), bounds);
}

inline std::shared_ptr<const GeneBounds> uniform_bounds(std::size_t n, Interval iv) {
    return std::make_shared<const GeneBounds>(n, iv);
}

}  // namespace aurora
