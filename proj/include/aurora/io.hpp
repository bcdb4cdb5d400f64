#pragma once

#include <array>
#include <cerrno>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aurora/container.hpp"
#include "aurora/core.hpp"
#include "aurora/engine.hpp"
#include "aurora/metrics.hpp"

namespace aurora::io {

/// Malformed input file; the message carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Shortest text that reads back to the same double.
inline std::string format_real(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_optional(const std::optional<Real>& v) { return v ? format_real(*v) : std::string{}; }

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<Real> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    const std::string str(s);
    char* end = nullptr;
    const Real v = std::strtod(str.c_str(), &end);
    if (end != str.c_str() + str.size()) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
    s = trim(s);
    if (s.empty() || s.front() == '-' || s.front() == '+') return std::nullopt;
    const std::string str(s);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(str.c_str(), &end, 10);
    if (errno != 0 || end != str.c_str() + str.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

// --- metrics CSV -------------------------------------------------------

inline constexpr std::string_view kMetricsHeader =
    "iteration,coverage_pct,grid_mean_fitness,container_size,d_min,cumulative_loss,updates";

inline void write_metrics(std::ostream& os, std::span<const MetricsRecord> records) {
    os << kMetricsHeader << '\n';
    for (const auto& r : records) {
        os << r.iteration << ',' << format_real(r.coverage_pct) << ',' << format_optional(r.grid_mean_fitness) << ','
           << r.container_size << ',' << format_optional(r.d_min) << ',' << r.cumulative_loss << ',' << r.updates
           << '\n';
    }
}

inline std::vector<MetricsRecord> read_metrics(std::istream& is) {
    std::vector<MetricsRecord> out;
    std::string line;
    std::size_t n = 0;
    if (!std::getline(is, line)) throw ParseError(1, "missing metrics header");
    ++n;
    if (trim(line) != kMetricsHeader) throw ParseError(n, "unexpected metrics header");
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        const auto f = split(line);
        if (f.size() != 7) throw ParseError(n, "expected 7 fields, found " + std::to_string(f.size()));
        MetricsRecord r;
        const auto it = parse_uint(f[0]);
        const auto cov = parse_real(f[1]);
        const auto size = parse_uint(f[3]);
        const auto loss = parse_uint(f[5]);
        const auto upd = parse_uint(f[6]);
        if (!it || !cov || !size || !loss || !upd) throw ParseError(n, "malformed metrics row");
        r.iteration = *it;
        r.coverage_pct = *cov;
        r.container_size = *size;
        r.cumulative_loss = *loss;
        r.updates = *upd;
        r.grid_mean_fitness = parse_real(f[2]);
        r.d_min = parse_real(f[4]);
        if (!trim(f[2]).empty() && !r.grid_mean_fitness) throw ParseError(n, "malformed grid_mean_fitness");
        if (!trim(f[4]).empty() && !r.d_min) throw ParseError(n, "malformed d_min");
        out.push_back(r);
    }
    return out;
}

// --- container dump ----------------------------------------------------
//
// One row per member in container order:
//   replication,birth_iteration,fitness,bd0,bd1,desc0..desc{n-1},gen0..gen{g-1}
// The header names every column, so n and g are recovered from it.

struct DumpRow {
    std::uint64_t replication = 0;
    std::uint64_t birth_iteration = 0;
    Real fitness = 0.0;
    Real bd0 = 0.0;
    Real bd1 = 0.0;
    std::vector<Real> descriptor;
    std::vector<Real> genes;
};

struct Dump {
    std::size_t descriptor_dim = 0;
    std::size_t genotype_size = 0;
    std::vector<DumpRow> rows;

    std::vector<ScoredPoint> scored_points() const {
        std::vector<ScoredPoint> pts;
        pts.reserve(rows.size());
        for (const auto& r : rows) pts.push_back({r.bd0, r.bd1, r.fitness});
        return pts;
    }
};

inline std::string dump_header(std::size_t descriptor_dim, std::size_t genotype_size) {
    std::string h = "replication,birth_iteration,fitness,bd0,bd1";
    for (std::size_t i = 0; i < descriptor_dim; ++i) h += ",desc" + std::to_string(i);
    for (std::size_t i = 0; i < genotype_size; ++i) h += ",gen" + std::to_string(i);
    return h;
}

/// `descriptor_dim` and `genotype_size` fix the header when the container
/// is empty.
inline void write_dump(std::ostream& os, std::span<const Individual> members, std::uint64_t replication,
                       std::size_t descriptor_dim, std::size_t genotype_size) {
    os << dump_header(descriptor_dim, genotype_size) << '\n';
    for (const auto& m : members) {
        if (m.descriptor.dim() != descriptor_dim || m.genotype.size() != genotype_size || m.hand_coded_bd.dim() != 2) {
            throw std::invalid_argument("container member does not match the dump layout");
        }
        os << replication << ',' << m.birth_iteration << ',' << format_real(m.fitness) << ','
           << format_real(m.hand_coded_bd.values[0]) << ',' << format_real(m.hand_coded_bd.values[1]);
        for (Real v : m.descriptor.values) os << ',' << format_real(v);
        for (Real v : m.genotype.values()) os << ',' << format_real(v);
        os << '\n';
    }
}

inline Dump read_dump(std::istream& is) {
    Dump d;
    std::string line;
    if (!std::getline(is, line)) throw ParseError(1, "missing dump header");
    const auto header = split(trim(line));
    if (header.size() < 5 || header[0] != "replication" || header[1] != "birth_iteration" || header[2] != "fitness" ||
        header[3] != "bd0" || header[4] != "bd1") {
        throw ParseError(1, "unexpected dump header");
    }
    std::size_t col = 5;
    while (col < header.size() && header[col] == "desc" + std::to_string(d.descriptor_dim)) {
        ++d.descriptor_dim;
        ++col;
    }
    while (col < header.size() && header[col] == "gen" + std::to_string(d.genotype_size)) {
        ++d.genotype_size;
        ++col;
    }
    if (col != header.size()) throw ParseError(1, "unexpected dump column '" + std::string(header[col]) + "'");

    const std::size_t width = header.size();
    std::size_t n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line));
        if (f.size() != width) {
            throw ParseError(n, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
        }
        DumpRow r;
        const auto rep = parse_uint(f[0]);
        const auto birth = parse_uint(f[1]);
        if (!rep || !birth) throw ParseError(n, "malformed integer field");
        r.replication = *rep;
        r.birth_iteration = *birth;
        std::vector<Real> reals;
        for (std::size_t i = 2; i < width; ++i) {
            const auto v = parse_real(f[i]);
            if (!v) throw ParseError(n, "malformed number in column '" + std::string(header[i]) + "'");
            reals.push_back(*v);
        }
        r.fitness = reals[0];
        r.bd0 = reals[1];
        r.bd1 = reals[2];
        r.descriptor.assign(reals.begin() + 3, reals.begin() + 3 + static_cast<std::ptrdiff_t>(d.descriptor_dim));
        r.genes.assign(reals.begin() + 3 + static_cast<std::ptrdiff_t>(d.descriptor_dim), reals.end());
        d.rows.push_back(std::move(r));
    }
    return d;
}

// --- run traces ----------------------------------------------------------

inline constexpr std::string_view kThresholdHeader = "iteration,kind,container_size,d_min_before,d_min_after";

inline const char* to_string(ThresholdEventKind k) {
    switch (k) {
        case ThresholdEventKind::Init: return "init";
        case ThresholdEventKind::Csc: return "csc";
        case ThresholdEventKind::Vat: return "vat";
    }
    return "?";
}

inline void write_thresholds(std::ostream& os, std::span<const ThresholdEvent> events) {
    os << kThresholdHeader << '\n';
    for (const auto& e : events) {
        os << e.iteration << ',' << to_string(e.kind) << ',' << e.container_size << ',' << format_optional(e.before)
           << ',' << format_real(e.after) << '\n';
    }
}

inline std::vector<ThresholdEvent> read_thresholds(std::istream& is) {
    std::vector<ThresholdEvent> out;
    std::string line;
    std::size_t n = 1;
    if (!std::getline(is, line) || trim(line) != kThresholdHeader) throw ParseError(1, "unexpected threshold header");
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line));
        if (f.size() != 5) throw ParseError(n, "expected 5 fields");
        ThresholdEvent e;
        const auto it = parse_uint(f[0]);
        const auto size = parse_uint(f[2]);
        const auto after = parse_real(f[4]);
        if (!it || !size || !after) throw ParseError(n, "malformed threshold row");
        if (f[1] == "init") e.kind = ThresholdEventKind::Init;
        else if (f[1] == "csc") e.kind = ThresholdEventKind::Csc;
        else if (f[1] == "vat") e.kind = ThresholdEventKind::Vat;
        else throw ParseError(n, "unknown threshold kind '" + std::string(f[1]) + "'");
        e.iteration = *it;
        e.container_size = *size;
        e.before = parse_real(f[3]);
        e.after = *after;
        out.push_back(e);
    }
    return out;
}

inline constexpr std::string_view kContainerUpdatesHeader = "iteration,size_before,size_after,lost";

inline void write_container_updates(std::ostream& os, std::span<const ContainerUpdateEvent> events) {
    os << kContainerUpdatesHeader << '\n';
    for (const auto& e : events) os << e.iteration << ',' << e.size_before << ',' << e.size_after << ',' << e.lost << '\n';
}

inline std::vector<ContainerUpdateEvent> read_container_updates(std::istream& is) {
    std::vector<ContainerUpdateEvent> out;
    std::string line;
    std::size_t n = 1;
    if (!std::getline(is, line) || trim(line) != kContainerUpdatesHeader) {
        throw ParseError(1, "unexpected container-update header");
    }
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line));
        if (f.size() != 4) throw ParseError(n, "expected 4 fields");
        std::array<std::uint64_t, 4> v{};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto x = parse_uint(f[i]);
            if (!x) throw ParseError(n, "malformed container-update row");
            v[i] = *x;
        }
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return out;
}

inline constexpr std::string_view kEncoderUpdatesHeader = "update,iteration,samples,steps,loss_before,loss_after";

inline void write_encoder_updates(std::ostream& os, std::span<const EncoderUpdateEvent> events) {
    os << kEncoderUpdatesHeader << '\n';
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        os << i + 1 << ',' << e.iteration << ',' << e.report.samples << ',' << e.report.steps << ','
           << format_real(e.report.loss_before) << ',' << format_real(e.report.loss_after) << '\n';
    }
}

/// Iterations column of an encoder-update trace.
inline std::vector<std::uint64_t> read_encoder_update_iterations(std::istream& is) {
    std::vector<std::uint64_t> out;
    std::string line;
    std::size_t n = 1;
    if (!std::getline(is, line) || trim(line) != kEncoderUpdatesHeader) {
        throw ParseError(1, "unexpected encoder-update header");
    }
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line));
        if (f.size() != 6) throw ParseError(n, "expected 6 fields");
        const auto it = parse_uint(f[1]);
        if (!it) throw ParseError(n, "malformed iteration");
        out.push_back(*it);
    }
    return out;
}

}  // namespace aurora::io
