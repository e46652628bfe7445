#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "memvote/lsh_crossbar.hpp"
#include "memvote/rng.hpp"

namespace memvote {

// Programming model of one approximate-match CAM array.
struct DeviceModel {
    double g_on_target = 150.0;    // uS
    double g_off_target = 0.0;     // uS
    double write_tolerance = 5.0;  // uS; program-verify window around each target
    double variation_stdv = 2.5;   // uS; programming noise before clipping
    double v_read = 0.2;           // V
    double outlier_rate = 0.0;     // probability a device sticks at uniform [0, g_on_target]
};

enum class SearchBackend {
    Analog,   // thresholded row currents from programmed conductances
    Digital,  // exact Hamming distance on the stored bits
};

inline SearchBackend parse_backend(std::string_view s) {
    if (s == "analog") return SearchBackend::Analog;
    if (s == "digital") return SearchBackend::Digital;
    throw std::invalid_argument("unknown backend '" + std::string(s) + "' (analog|digital)");
}

inline const char* backend_name(SearchBackend b) {
    return b == SearchBackend::Analog ? "analog" : "digital";
}

struct MatchSet {
    std::vector<std::uint32_t> rows;  // ascending
};

// Row current histograms use cells 0..bits for resolved mismatch-equivalents
// and one overflow cell for "cannot match at any swept threshold".

// Content-addressable array over differential conductance pairs. Stored bit 1
// programs (g_on, g_off), bit 0 programs (g_off, g_on); a query activates the
// first device of a pair when its bit is 0 and the second when it is 1, so a
// matching bit always selects the off device and each mismatch adds about
// g_on to the row current.
class CamArray {
public:
    std::uint32_t n_rows = 0;
    std::uint32_t bits = 0;
    DeviceModel dev;
    std::vector<std::uint64_t> stored;     // n_rows * words_per_row packed bits
    std::vector<float> g;                  // n_rows * 2*bits device conductances, (first, second)
    std::vector<std::uint32_t> row_bucket; // n_rows

    std::size_t words_per_row() const { return SeedHash::word_count(bits); }
    bool stored_bit(std::uint32_t row, std::uint32_t j) const {
        return (stored[row * words_per_row() + (j >> 6)] >> (j & 63)) & 1u;
    }
    const float* row_devices(std::uint32_t row) const { return g.data() + std::size_t(row) * 2 * bits; }

    // Derived read-path caches; rebuild after any conductance change.
    // base[r] = sum of first devices, u[r][j] = second - first, so the row
    // current over v_read is base[r] + sum_j q_j * u[r][j].
    std::vector<float> u;
    std::vector<double> base;
    // off_sum[r] + 150*d is the ideal current of a row at Hamming distance d;
    // e_prefix_min[r][d] = sum of the d most negative per-bit deviations
    // (g_on_dev - g_off_dev - g_on_target), giving a lower bound on any
    // current a query at distance d can produce. Used to skip rows that
    // provably cannot match.
    std::vector<double> off_sum;
    std::vector<double> e_prefix_min;  // n_rows * (bits+1)

    void rebuild_cache() {
        u.assign(std::size_t(n_rows) * bits, 0.0f);
        base.assign(n_rows, 0.0);
        off_sum.assign(n_rows, 0.0);
        e_prefix_min.assign(std::size_t(n_rows) * (bits + 1), 0.0);
        std::vector<double> e(bits);
        for (std::uint32_t r = 0; r < n_rows; ++r) {
            const float* dvc = row_devices(r);
            double b = 0.0, offs = 0.0;
            for (std::uint32_t j = 0; j < bits; ++j) {
                float first = dvc[2 * j], second = dvc[2 * j + 1];
                u[std::size_t(r) * bits + j] = second - first;
                b += first;
                bool s = stored_bit(r, j);
                double gon = s ? first : second;   // device activated on a mismatch
                double goff = s ? second : first;  // device activated on a match
                offs += goff;
                e[j] = (gon - goff) - dev.g_on_target;
            }
            base[r] = b;
            off_sum[r] = offs;
            std::sort(e.begin(), e.end());
            double acc = 0.0;
            double* pm = &e_prefix_min[std::size_t(r) * (bits + 1)];
            pm[0] = 0.0;
            for (std::uint32_t dd = 0; dd < bits; ++dd) {
                acc += e[dd];
                pm[dd + 1] = acc;
            }
        }
    }

    // Exact analog row readout in uS (current / v_read). One fixed
    // accumulation order for every caller: eight float partial sums over the
    // pair weights, query given as 0.0/1.0 floats. At zero programming
    // variation every term is a multiple of g_on_target and the float sums
    // are exact, which is what makes the analog and digital backends agree
    // bit for bit there.
    double current_over_v(std::uint32_t row, const float* qf) const {
        const float* w = u.data() + std::size_t(row) * bits;
        float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        std::uint32_t j = 0;
        for (; j + 8 <= bits; j += 8)
            for (std::uint32_t k = 0; k < 8; ++k) acc[k] += qf[j + k] * w[j + k];
        for (; j < bits; ++j) acc[j & 7] += qf[j] * w[j];
        float s01 = acc[0] + acc[1], s23 = acc[2] + acc[3];
        float s45 = acc[4] + acc[5], s67 = acc[6] + acc[7];
        return base[row] + double((s01 + s23) + (s45 + s67));
    }

    std::uint32_t hamming_row(std::uint32_t row, const SeedHash& query) const {
        const std::uint64_t* s = stored.data() + row * words_per_row();
        std::uint32_t d = 0;
        for (std::size_t w = 0; w < query.words.size(); ++w)
            d += static_cast<std::uint32_t>(std::popcount(s[w] ^ query.words[w]));
        return d;
    }

    // Largest Hamming distance at which a row could still produce a current
    // below the threshold for t_max mismatches; beyond it the analog readout
    // can be skipped. The 1 uS slack covers float accumulation error in
    // current_over_v.
    std::uint32_t analog_cut(std::uint32_t row, std::uint32_t t_max) const {
        double limit = dev.g_on_target * (double(t_max) + 0.5) + 1.0;
        const double* pm = &e_prefix_min[std::size_t(row) * (bits + 1)];
        std::uint32_t d = 0;
        while (d < bits && off_sum[row] + dev.g_on_target * (d + 1) + pm[d + 1] <= limit) ++d;
        return d;
    }
};

namespace detail {

inline float program_device(Rng& rng, double target, double tol, double sigma, double outlier_rate,
                            double g_on) {
    if (outlier_rate > 0.0 && rng.uniform() < outlier_rate)
        return static_cast<float>(rng.uniform() * g_on);
    if (sigma <= 0.0) return static_cast<float>(target);
    if (target <= 0.0) {
        double v = std::fabs(sigma * rng.normal());
        return static_cast<float>(v > tol ? tol : v);
    }
    double v = target + sigma * rng.normal();
    if (v > target + tol) v = target + tol;
    if (v < target - tol) v = target - tol;
    if (v < 0) v = 0;
    return static_cast<float>(v);
}

inline void query_floats(const SeedHash& q, std::vector<float>& qf) {
    qf.resize(q.nbits);
    for (std::uint32_t j = 0; j < q.nbits; ++j) qf[j] = q.bit(j) ? 1.0f : 0.0f;
}

}  // namespace detail

// Programs one CAM array from packed hashes. Device draw order is row-major,
// first device then second within each pair, so a seed fully determines the
// array. row_bucket maps each row to its vote bucket.
inline CamArray build_cam(const std::vector<SeedHash>& rows, std::vector<std::uint32_t> row_bucket,
                          const DeviceModel& dev, std::uint64_t rng_seed) {
    if (rows.empty()) throw std::invalid_argument("build_cam: no rows");
    if (row_bucket.size() != rows.size())
        throw std::invalid_argument("build_cam: bucket map size != row count");
    if (!(dev.g_on_target > 0) || dev.write_tolerance < 0 || dev.variation_stdv < 0 ||
        !(dev.v_read > 0) || dev.outlier_rate < 0 || dev.outlier_rate > 1)
        throw std::invalid_argument("build_cam: bad device model");

    CamArray cam;
    cam.bits = rows[0].nbits;
    if (cam.bits == 0) throw std::invalid_argument("build_cam: zero-width hashes");
    cam.n_rows = static_cast<std::uint32_t>(rows.size());
    cam.dev = dev;
    cam.row_bucket = std::move(row_bucket);
    cam.stored.reserve(rows.size() * SeedHash::word_count(cam.bits));
    cam.g.resize(std::size_t(cam.n_rows) * 2 * cam.bits);

    Rng rng = Rng::derive(rng_seed, 0x43414du);  // cam stream
    for (std::uint32_t r = 0; r < cam.n_rows; ++r) {
        if (rows[r].nbits != cam.bits) throw std::invalid_argument("build_cam: hash width mismatch");
        for (std::uint64_t w : rows[r].words) cam.stored.push_back(w);
        float* dvc = cam.g.data() + std::size_t(r) * 2 * cam.bits;
        for (std::uint32_t j = 0; j < cam.bits; ++j) {
            bool s = rows[r].bit(j);
            double first_target = s ? dev.g_on_target : dev.g_off_target;
            double second_target = s ? dev.g_off_target : dev.g_on_target;
            dvc[2 * j] = detail::program_device(rng, first_target, dev.write_tolerance,
                                                dev.variation_stdv, dev.outlier_rate, dev.g_on_target);
            dvc[2 * j + 1] = detail::program_device(rng, second_target, dev.write_tolerance,
                                                    dev.variation_stdv, dev.outlier_rate, dev.g_on_target);
        }
    }
    cam.rebuild_cache();
    return cam;
}

// Match-line current in uA: v_read times the summed conductance of the
// devices the query activates.
inline double row_current_uA(const CamArray& cam, std::uint32_t row, const SeedHash& query) {
    if (query.nbits != cam.bits) throw std::invalid_argument("row_current: width mismatch");
    if (row >= cam.n_rows) throw std::invalid_argument("row_current: row out of range");
    std::vector<float> qf;
    detail::query_floats(query, qf);
    return cam.dev.v_read * cam.current_over_v(row, qf.data());
}

// Smallest threshold at which each row matches the query: analog rows derive
// it from the readout current, digital rows are exact Hamming distances. A
// value of bits+1 means the current exceeds every representable threshold.
inline std::vector<std::int32_t> mismatch_equivalents(const CamArray& cam, const SeedHash& query,
                                                      SearchBackend backend) {
    if (query.nbits != cam.bits) throw std::invalid_argument("mismatch_equivalents: width mismatch");
    std::vector<std::int32_t> out(cam.n_rows);
    if (backend == SearchBackend::Digital) {
        for (std::uint32_t r = 0; r < cam.n_rows; ++r)
            out[r] = static_cast<std::int32_t>(cam.hamming_row(r, query));
        return out;
    }
    std::vector<float> qf;
    detail::query_floats(query, qf);
    for (std::uint32_t r = 0; r < cam.n_rows; ++r) {
        double x = cam.current_over_v(r, qf.data()) / cam.dev.g_on_target;
        double dstar = std::floor(x - 0.5) + 1.0;
        if (dstar < 0) dstar = 0;
        if (dstar > cam.bits + 1) dstar = cam.bits + 1;
        out[r] = static_cast<std::int32_t>(dstar);
    }
    return out;
}

// Rows matching the query at the given threshold. Analog: row current below
// v_read * g_on_target * (threshold + 0.5), strict. Digital: Hamming <=
// threshold. Every analog comparison goes through current_over_v, so match
// sets are monotone in the threshold by construction.
inline MatchSet search(const CamArray& cam, const SeedHash& query, std::int32_t cam_threshold,
                       SearchBackend backend) {
    if (query.nbits != cam.bits) throw std::invalid_argument("search: width mismatch");
    MatchSet out;
    if (cam_threshold < 0) return out;
    if (backend == SearchBackend::Digital) {
        for (std::uint32_t r = 0; r < cam.n_rows; ++r)
            if (cam.hamming_row(r, query) <= static_cast<std::uint32_t>(cam_threshold))
                out.rows.push_back(r);
        return out;
    }
    std::vector<float> qf;
    detail::query_floats(query, qf);
    double limit = cam.dev.g_on_target * (cam_threshold + 0.5);
    for (std::uint32_t r = 0; r < cam.n_rows; ++r)
        if (cam.current_over_v(r, qf.data()) < limit) out.rows.push_back(r);
    return out;
}

}  // namespace memvote
