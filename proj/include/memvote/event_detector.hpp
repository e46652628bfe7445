#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memvote/pore_model.hpp"

namespace memvote {

// Ground truth attached to simulated signals; absent on real input.
struct ReadTruth {
    std::string species;                    // source record id
    std::uint32_t event_start = 0;          // offset of the first event in the reference event vector
    std::vector<std::uint64_t> boundaries;  // true event start sample indices
    std::vector<double> levels;             // true expected level per event
};

struct RawSignal {
    std::string read_id;
    double sample_rate = 4000.0;  // Hz
    std::vector<float> samples;   // pA
    std::optional<ReadTruth> truth;
};

// Segmentation of a raw signal. boundaries[i] is the first sample index of
// event i (boundaries[0] == 0, strictly increasing); values[i] is the mean of
// the samples in event i.
struct EventVector {
    std::vector<double> values;
    std::vector<std::uint64_t> boundaries;

    std::size_t size() const { return values.size(); }
};

struct DetectorParams {
    std::uint32_t short_window = 4;
    std::uint32_t long_window = 8;
    double t_threshold_short = 4.0;
    double t_threshold_long = 7.0;
    std::uint32_t min_event_len = 3;   // samples; also the non-max suppression radius
    double diff_threshold = 3.0;       // pA; default for filter_events
};

namespace detail {

// Welch t statistic between the w samples left and right of position i,
// computed from prefix sums. A zero-variance pair with equal means is 0, not
// 0/0; a zero-variance pair with different means saturates high so noise-free
// steps are always detected.
inline double welch_t(const std::vector<double>& sum, const std::vector<double>& sumsq,
                      std::size_t i, std::size_t w) {
    double n = static_cast<double>(w);
    double m1 = (sum[i] - sum[i - w]) / n;
    double m2 = (sum[i + w] - sum[i]) / n;
    double q1 = (sumsq[i] - sumsq[i - w]) - n * m1 * m1;
    double q2 = (sumsq[i + w] - sumsq[i]) - n * m2 * m2;
    if (q1 < 0) q1 = 0;
    if (q2 < 0) q2 = 0;
    double v1 = q1 / (n - 1.0);  // unequal-variance: each window keeps its own
    double v2 = q2 / (n - 1.0);
    double dm = std::fabs(m2 - m1);
    double denom = std::sqrt(v1 / n + v2 / n);
    if (denom < 1e-9) return dm < 1e-12 ? 0.0 : dm / 1e-9;
    return dm / denom;
}

}  // namespace detail

// Two-scale sliding Welch t-test segmentation. Boundary candidates are local
// maxima of the threshold-normalized score; non-maximum suppression keeps
// candidates at least min_event_len apart; leftover segments shorter than
// min_event_len are merged into a neighbor.
inline EventVector detect_events(const RawSignal& signal, const DetectorParams& p = {}) {
    const std::size_t n = signal.samples.size();
    if (p.short_window < 2 || p.long_window < p.short_window)
        throw std::invalid_argument("detect_events: windows must satisfy 2 <= short <= long");
    if (p.min_event_len < 1) throw std::invalid_argument("detect_events: min_event_len must be >= 1");
    if (n <= 2 * static_cast<std::size_t>(p.long_window))
        throw std::invalid_argument("detect_events: signal shorter than 2*long_window (" +
                                    std::to_string(n) + " samples)");

    std::vector<double> sum(n + 1, 0.0), sumsq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = signal.samples[i];
        sum[i + 1] = sum[i] + v;
        sumsq[i + 1] = sumsq[i] + v * v;
    }

    // score[i] > 1 means at least one scale crossed its threshold at i.
    std::vector<double> score(n, 0.0);
    auto scan = [&](std::size_t w, double threshold) {
        for (std::size_t i = w; i + w <= n; ++i) {
            double s = detail::welch_t(sum, sumsq, i, w) / threshold;
            if (s > score[i]) score[i] = s;
        }
    };
    scan(p.short_window, p.t_threshold_short);
    scan(p.long_window, p.t_threshold_long);

    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (score[i] > 1.0 && score[i] >= score[i - 1] && score[i] >= score[i + 1])
            candidates.push_back(i);
    }

    // Highest score wins within a min_event_len radius; ties break to the left.
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::vector<std::size_t> accepted;
    std::vector<char> blocked(n, 0);
    for (std::size_t c : candidates) {
        if (blocked[c]) continue;
        accepted.push_back(c);
        std::size_t lo = c >= p.min_event_len ? c - p.min_event_len + 1 : 0;
        std::size_t hi = std::min(n, c + p.min_event_len);
        for (std::size_t i = lo; i < hi; ++i) blocked[i] = 1;
    }
    std::sort(accepted.begin(), accepted.end());

    std::vector<std::size_t> starts;
    starts.push_back(0);
    for (std::size_t c : accepted)
        if (c != 0) starts.push_back(c);

    // Merge segments shorter than min_event_len into the previous segment
    // (the next one for the very first segment).
    bool merged = true;
    while (merged && starts.size() > 1) {
        merged = false;
        for (std::size_t t = 0; t < starts.size(); ++t) {
            std::size_t end = (t + 1 < starts.size()) ? starts[t + 1] : n;
            if (end - starts[t] >= p.min_event_len) continue;
            if (t == 0)
                starts.erase(starts.begin() + 1);
            else
                starts.erase(starts.begin() + static_cast<std::ptrdiff_t>(t));
            merged = true;
            break;
        }
    }

    EventVector out;
    out.values.reserve(starts.size());
    out.boundaries.reserve(starts.size());
    for (std::size_t t = 0; t < starts.size(); ++t) {
        std::size_t b = starts[t];
        std::size_t e = (t + 1 < starts.size()) ? starts[t + 1] : n;
        out.values.push_back((sum[e] - sum[b]) / static_cast<double>(e - b));
        out.boundaries.push_back(b);
    }
    return out;
}

// Keeps events that step by more than diff_threshold from their original
// predecessor: u = { v_i : |v_i - v_{i-1}| > t, i >= 2 }. The first event has
// no predecessor and is never emitted; comparisons always use the unfiltered
// neighbor, so a run of small steps is dropped even if it drifts far in total.
inline EventVector filter_events(const EventVector& events, double diff_threshold) {
    if (events.values.empty()) throw std::invalid_argument("filter_events: empty event vector");
    EventVector out;
    for (std::size_t i = 1; i < events.values.size(); ++i) {
        if (std::fabs(events.values[i] - events.values[i - 1]) > diff_threshold) {
            out.values.push_back(events.values[i]);
            out.boundaries.push_back(events.boundaries[i]);
        }
    }
    return out;
}

// Method-of-moments affine rescale of event values onto the model's global
// level distribution. Zero-variance input gets a pure shift.
inline EventVector normalize_events(const EventVector& events, const PoreModel& model) {
    if (events.values.empty()) throw std::invalid_argument("normalize_events: empty event vector");
    if (!(model.global_stdv > 0.0))
        throw std::invalid_argument("normalize_events: model global level stdv is zero");

    double mean = 0.0;
    for (double v : events.values) mean += v;
    mean /= static_cast<double>(events.values.size());
    double var = 0.0;
    for (double v : events.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(events.values.size());
    double stdv = std::sqrt(var);

    double scale = stdv > 1e-12 ? model.global_stdv / stdv : 1.0;
    EventVector out;
    out.boundaries = events.boundaries;
    out.values.reserve(events.values.size());
    for (double v : events.values) out.values.push_back((v - mean) * scale + model.global_mean);
    return out;
}

}  // namespace memvote
