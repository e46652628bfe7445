#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "memvote/event_detector.hpp"
#include "memvote/pore_model.hpp"
#include "memvote/rng.hpp"

namespace memvote {

// Dwell-time model: samples spent per event.
struct DwellDist {
    enum class Kind {
        Geometric,  // shifted geometric, mean preserved, >= min_samples
        Fixed,      // constant round(mean), >= min_samples
    };
    Kind kind = Kind::Geometric;
    double mean = 0.0;  // <= 0 derives sample_rate / bases_per_second
    std::uint32_t min_samples = 1;
};

struct SimParams {
    double sample_rate = 4000.0;      // Hz
    double bases_per_second = 450.0;  // translocation speed
    DwellDist dwell;
    double current_noise_stdv = 1.5;  // pA per sample
    double drift_pa_per_s = 0.0;      // linear baseline drift
    std::uint64_t rng_seed = 1;
};

using SimTruth = ReadTruth;

struct ManifestRow {
    std::string read_id;
    std::string species;
    std::uint32_t start = 0;   // base offset in the source record
    std::uint32_t length = 0;  // bases
};

struct SimDataset {
    std::vector<RawSignal> reads;
    std::vector<ManifestRow> manifest;
};

namespace detail {

inline std::uint64_t draw_dwell(const DwellDist& d, double default_mean, Rng& rng) {
    double mean = d.mean > 0 ? d.mean : default_mean;
    std::uint64_t mn = d.min_samples ? d.min_samples : 1;
    if (d.kind == DwellDist::Kind::Fixed) {
        auto n = static_cast<std::uint64_t>(std::llround(mean));
        return n < mn ? mn : n;
    }
    // Shifted geometric on {mn, mn+1, ...} with the requested mean.
    double shifted_mean = mean - double(mn - 1);
    if (shifted_mean <= 1.0) return mn;
    double p = 1.0 / shifted_mean;
    return (mn - 1) + rng.geometric1(p);
}

}  // namespace detail

// Synthesizes the raw signal of one read covering length bases starting at
// base offset start: expected k-mer levels, one dwell per event, i.i.d.
// Gaussian current noise, optional linear drift. Truth records the exact
// event boundaries and levels.
inline std::pair<RawSignal, SimTruth> simulate_read(const ReferenceSequence& ref, const PoreModel& model,
                                                    std::uint32_t start, std::uint32_t length,
                                                    const SimParams& p, Rng& rng,
                                                    const std::string& read_id = "") {
    if (!(p.sample_rate > 0) || !(p.bases_per_second > 0))
        throw std::invalid_argument("simulate_read: rates must be positive");
    if (std::size_t(start) + length > ref.bases.size())
        throw std::invalid_argument("simulate_read: [start, start+length) outside record '" + ref.id + "'");
    if (length < static_cast<std::uint32_t>(model.k))
        throw std::invalid_argument("simulate_read: read length below k");

    ReferenceSequence slice{ref.id, ref.bases.substr(start, length)};
    ExpectedEventVector events = encode_reference(slice, model, start);

    double default_dwell_mean = p.sample_rate / p.bases_per_second;
    RawSignal sig;
    sig.read_id = read_id.empty() ? ref.id + ":" + std::to_string(start) : read_id;
    sig.sample_rate = p.sample_rate;
    SimTruth truth;
    truth.species = ref.id;
    truth.event_start = start;
    truth.levels = events.values;
    truth.boundaries.reserve(events.values.size());

    sig.samples.reserve(static_cast<std::size_t>(double(events.values.size()) * default_dwell_mean));
    for (double level : events.values) {
        truth.boundaries.push_back(sig.samples.size());
        std::uint64_t dwell = detail::draw_dwell(p.dwell, default_dwell_mean, rng);
        for (std::uint64_t t = 0; t < dwell; ++t) {
            double v = level;
            if (p.current_noise_stdv > 0) v += p.current_noise_stdv * rng.normal();
            if (p.drift_pa_per_s != 0)
                v += p.drift_pa_per_s * (double(sig.samples.size()) / p.sample_rate);
            sig.samples.push_back(static_cast<float>(v));
        }
    }
    sig.truth = truth;
    return {std::move(sig), std::move(truth)};
}

struct CommunitySpec {
    ReferenceSequence ref;
    std::uint32_t count = 0;
    std::uint32_t read_length = 0;  // bases; 0 reads the whole record
};

// Simulates a mixed community. Reads are generated round-robin across
// species, each from its own derived RNG stream, so any one read is
// reproducible regardless of how many others are generated. Start positions
// are uniform over valid offsets; the manifest records the truth for scoring.
inline SimDataset simulate_community(const std::vector<CommunitySpec>& specs, const PoreModel& model,
                                     const SimParams& p) {
    if (specs.empty()) throw std::invalid_argument("simulate_community: no species");
    SimDataset out;
    std::uint64_t total = 0;
    for (const auto& s : specs) total += s.count;
    out.reads.reserve(total);
    out.manifest.reserve(total);

    std::vector<std::uint32_t> remaining(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) remaining[i] = specs[i].count;

    std::uint64_t idx = 0;
    bool any = true;
    while (any) {
        any = false;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (remaining[i] == 0) continue;
            any = true;
            --remaining[i];
            const auto& sp = specs[i];
            std::uint32_t len = sp.read_length ? sp.read_length
                                               : static_cast<std::uint32_t>(sp.ref.bases.size());
            if (len > sp.ref.bases.size())
                throw std::invalid_argument("simulate_community: read_length exceeds record '" +
                                            sp.ref.id + "'");
            Rng rng = Rng::derive(p.rng_seed, idx);
            std::uint32_t span = static_cast<std::uint32_t>(sp.ref.bases.size() - len + 1);
            std::uint32_t start = static_cast<std::uint32_t>(rng.uniform_int(span));
            char buf[16];
            std::snprintf(buf, sizeof buf, "r%06llu", static_cast<unsigned long long>(idx));
            auto [sig, truth] = simulate_read(sp.ref, model, start, len, p, rng, buf);
            out.manifest.push_back({sig.read_id, sp.ref.id, start, len});
            out.reads.push_back(std::move(sig));
            ++idx;
        }
    }
    return out;
}

}  // namespace memvote
