#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/frame.hpp"
#include "pulseline/rng.hpp"

namespace pulseline {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct Dataset {
    std::vector<Frame> frames;
    std::vector<Split> split_assignment;  // parallel to frames
    std::uint64_t seed = 0;
};

// 70/15/15 with rounding remainder going to Train; assignment is a seeded
// shuffle, shared by every consumer of the dataset.
inline std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed) {
    const std::size_t n_val = n * 15 / 100;
    const std::size_t n_test = n * 15 / 100;
    const std::size_t n_train = n - n_val - n_test;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(mix64(seed ^ 0x5EED5117ULL));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }

    std::vector<Split> assignment(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k < n_train)
            assignment[order[k]] = Split::Train;
        else if (k < n_train + n_val)
            assignment[order[k]] = Split::Val;
        else
            assignment[order[k]] = Split::Test;
    }
    return assignment;
}

struct SplitView {
    std::vector<std::size_t> train, val, test;  // indices into Dataset::frames
};

inline SplitView split(const Dataset& ds) {
    SplitView v;
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        switch (ds.split_assignment[i]) {
        case Split::Train: v.train.push_back(i); break;
        case Split::Val: v.val.push_back(i); break;
        case Split::Test: v.test.push_back(i); break;
        }
    }
    return v;
}

// Synthetic stand-in for a recorded corpus: n frames with HR uniform in the
// generator band, a configurable share carrying artifacts or heavy noise.
inline Dataset make_dataset(std::size_t n = 5687, double abnormal_fraction = 0.2,
                            std::uint64_t seed = 0) {
    if (n < 10) throw DataError("make_dataset: need n >= 10");
    if (abnormal_fraction < 0.0 || abnormal_fraction > 1.0)
        throw DataError("make_dataset: abnormal_fraction must be in [0, 1]");

    Dataset ds;
    ds.seed = seed;
    ds.frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t frame_seed = mix64(mix64(seed) + i);
        const std::uint64_t param_seed = mix64(frame_seed ^ 0xA11C0DE5ULL);

        SynthParams p;
        p.seed = frame_seed;
        p.hr_bpm = 40.0 + counter_uniform(param_seed, 0) * 140.0;
        p.beat_shape = counter_uniform(param_seed, 1) < 0.5 ? BeatShape::GaussianPulse
                                                            : BeatShape::HarmonicSum;
        p.baseline_wander_hz = 0.15 + counter_uniform(param_seed, 2) * 0.2;
        p.baseline_wander_amp = 0.05 + counter_uniform(param_seed, 3) * 0.2;

        const bool abnormal = counter_uniform(param_seed, 4) < abnormal_fraction;
        if (abnormal) {
            const int mode = static_cast<int>(counter_uniform(param_seed, 5) * 5.0);
            if (mode >= 4) {
                p.artifact = Artifact::None;
                p.noise_sigma = 0.18 + counter_uniform(param_seed, 6) * 0.17;
            } else {
                p.artifact = static_cast<Artifact>(mode + 1);  // Dropout..Drift
                p.noise_sigma = counter_uniform(param_seed, 6) * 0.08;
            }
        } else {
            p.artifact = Artifact::None;
            p.noise_sigma = counter_uniform(param_seed, 6) * 0.05;
        }
        ds.frames.push_back(synth_frame(p));
    }
    ds.split_assignment = assign_splits(n, seed);
    return ds;
}

// ---------------------------------------------------------------------------
// CSV: label (0 normal / 1 abnormal, empty if unlabeled), hr_truth (empty if
// unknown), rate_hz, then s0..s{N-1}. UTF-8, '.' decimal, LF endings, header
// row required; every row carries the same sample count.
// ---------------------------------------------------------------------------

namespace csv_detail {

inline std::string fmt_double(double v, const char* spec) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line_no, const char* what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError(std::string("bad ") + what + " value '" + std::string(s) + "'", line_no);
    return v;
}

} // namespace csv_detail

inline void save_csv(const Dataset& ds, std::ostream& out) {
    if (ds.frames.empty()) throw DataError("save_csv: empty dataset");
    const std::size_t n_samples = ds.frames.front().samples.size();

    out << "label,hr_truth,rate_hz";
    for (std::size_t i = 0; i < n_samples; ++i) out << ",s" << i;
    out << "\n";

    for (const auto& f : ds.frames) {
        if (f.samples.size() != n_samples)
            throw DataError("save_csv: inconsistent sample counts across frames");
        switch (f.label) {
        case QualityLabel::Normal: out << '0'; break;
        case QualityLabel::Abnormal: out << '1'; break;
        case QualityLabel::Unlabeled: break;  // empty field
        }
        out << ',';
        if (f.hr_truth) out << csv_detail::fmt_double(*f.hr_truth, "%.17g");
        out << ',' << csv_detail::fmt_double(f.rate_hz, "%.17g");
        for (double s : f.samples) out << ',' << csv_detail::fmt_double(s, "%.9g");
        out << '\n';
    }
}

inline void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);  // binary: keep LF on all platforms
    if (!f) throw DataError("save_csv: cannot open " + path.string());
    save_csv(ds, f);
    if (!f) throw DataError("save_csv: write failed for " + path.string());
}

inline Dataset load_csv(std::istream& in, std::uint64_t split_seed = 0) {
    Dataset ds;
    ds.seed = split_seed;

    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = csv_detail::split_fields(line);
    if (header.size() < 4 || header[0] != "label" || header[1] != "hr_truth" ||
        header[2] != "rate_hz")
        throw ParseError("header must start with label,hr_truth,rate_hz,s0,...", 1);
    const std::size_t n_samples = header.size() - 3;
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (header[3 + i] != "s" + std::to_string(i))
            throw ParseError("bad sample column name '" + std::string(header[3 + i]) + "'", 1);
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv_detail::split_fields(line);
        if (fields.size() != 3 + n_samples)
            throw ParseError("expected " + std::to_string(3 + n_samples) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        Frame f;
        if (fields[0].empty())
            f.label = QualityLabel::Unlabeled;
        else if (fields[0] == "0")
            f.label = QualityLabel::Normal;
        else if (fields[0] == "1")
            f.label = QualityLabel::Abnormal;
        else
            throw ParseError("label must be empty, 0 or 1", line_no);
        if (!fields[1].empty())
            f.hr_truth = csv_detail::parse_double(fields[1], line_no, "hr_truth");
        f.rate_hz = csv_detail::parse_double(fields[2], line_no, "rate_hz");
        f.samples.reserve(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i)
            f.samples.push_back(csv_detail::parse_double(fields[3 + i], line_no, "sample"));
        ds.frames.push_back(std::move(f));
    }
    if (ds.frames.empty()) throw ParseError("no data rows", line_no);
    ds.split_assignment = assign_splits(ds.frames.size(), split_seed);
    return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, std::uint64_t split_seed = 0) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("load_csv: cannot open " + path.string());
    return load_csv(f, split_seed);
}

} // namespace pulseline
