#include "rtbwt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "atomic_write.hpp"

namespace rtbwt {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string &tok, const std::string &path, std::size_t lineno) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception &) {
        used = std::string::npos;
    }
    if (used != tok.size()) {
        throw std::runtime_error("bad number '" + tok + "' at " + path + ":" + std::to_string(lineno));
    }
    return v;
}

long parse_long(const std::string &tok, const std::string &path, std::size_t lineno) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (const std::exception &) {
        used = std::string::npos;
    }
    if (used != tok.size()) {
        throw std::runtime_error("bad integer '" + tok + "' at " + path + ":" + std::to_string(lineno));
    }
    return v;
}

// Strips the comment tail and splits the rest on commas/whitespace.
std::vector<std::string> split_tokens(std::string line) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
        line.resize(hash);
    }
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> read_lines(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

std::vector<double> read_signal_csv(const std::string &path) {
    std::vector<double> values;
    std::size_t lineno = 0;
    for (const std::string &line : read_lines(path)) {
        ++lineno;
        for (const std::string &tok : split_tokens(line)) {
            values.push_back(parse_double(tok, path, lineno));
        }
    }
    if (values.empty()) {
        throw std::runtime_error("no values in '" + path + "'");
    }
    return values;
}

void write_signal_csv(const std::string &path, std::span<const double> values) {
    std::string out;
    for (double v : values) {
        out += fmt(v);
        out += '\n';
    }
    detail::write_file_atomic(path, out);
}

PointSet read_point_set_csv(const std::string &path) {
    std::vector<FeaturePoint> points;
    std::size_t lineno = 0;
    bool saw_anchor = false, saw_plain = false;
    for (std::string line : read_lines(path)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::optional<Anchor> anchor;
        if (auto at = line.find('@'); at != std::string::npos) {
            const auto toks = split_tokens(line.substr(at + 1));
            if (toks.size() != 2) {
                throw std::runtime_error("anchor needs two integers at " + path + ":" + std::to_string(lineno));
            }
            anchor = Anchor{static_cast<int>(parse_long(toks[0], path, lineno)),
                            static_cast<int>(parse_long(toks[1], path, lineno))};
            line.resize(at);
        }
        const auto toks = split_tokens(line);
        if (toks.empty()) {
            if (anchor) {
                throw std::runtime_error("anchor without coordinates at " + path + ":" + std::to_string(lineno));
            }
            continue;
        }
        FeaturePoint p;
        for (const std::string &tok : toks) {
            p.coords.push_back(parse_double(tok, path, lineno));
        }
        p.anchor = anchor;
        (anchor ? saw_anchor : saw_plain) = true;
        points.push_back(std::move(p));
    }
    if (points.empty()) {
        throw std::runtime_error("no points in '" + path + "'");
    }
    if (saw_anchor && saw_plain) {
        throw std::runtime_error("mixed anchored and plain points in '" + path + "'");
    }
    return PointSet(std::move(points));
}

void write_point_set_csv(const std::string &path, const PointSet &points) {
    std::string out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = points.coords(i);
        for (std::size_t d = 0; d < c.size(); ++d) {
            if (d) out += ',';
            out += fmt(c[d]);
        }
        if (points.has_anchors()) {
            const Anchor a = points.anchor(i);
            out += " @" + std::to_string(a.row) + "," + std::to_string(a.col);
        }
        out += '\n';
    }
    detail::write_file_atomic(path, out);
}

void write_pyramid_csv(const std::string &path, const CoefficientPyramid &pyr) {
    std::string out = "stage,band,position,value\n";
    for (int stage = 0; stage <= pyr.depth; ++stage) {
        const int bands = 1 << stage;
        const int m = pyr.n >> stage;
        for (int b = 0; b < bands; ++b) {
            const auto band = pyr.band(stage, b);
            for (int j = 0; j < m; ++j) {
                out += std::to_string(stage) + "," + std::to_string(b) + "," +
                       std::to_string(j + 1) + "," + fmt(band[j]) + "\n";
            }
        }
    }
    detail::write_file_atomic(path, out);
}

void write_operators_csv(const std::string &path, const OperatorSet &ops) {
    std::string out = "stage,band,position,source\n";
    for (int stage = 0; stage < ops.depth; ++stage) {
        for (std::size_t b = 0; b < ops.perms[stage].size(); ++b) {
            const Permutation &perm = ops.perms[stage][b];
            for (std::size_t j = 0; j < perm.order.size(); ++j) {
                out += std::to_string(stage) + "," + std::to_string(b) + "," +
                       std::to_string(j + 1) + "," + std::to_string(perm.order[j] + 1) + "\n";
            }
        }
    }
    detail::write_file_atomic(path, out);
}

void write_filter_csv(const std::string &path, const WaveletFilterPair &filt) {
    std::string out = "index,analysis_low,analysis_high,synthesis_low,synthesis_high\n";
    for (std::size_t k = 0; k < filt.length(); ++k) {
        out += std::to_string(k) + "," + fmt(filt.lowpass[k]) + "," + fmt(filt.highpass[k]) + "," +
               fmt(filt.synthesis_lowpass[k]) + "," + fmt(filt.synthesis_highpass[k]) + "\n";
    }
    detail::write_file_atomic(path, out);
}

} // namespace rtbwt
