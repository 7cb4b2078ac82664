#pragma once

#include <span>
#include <string>
#include <vector>

#include "rtbwt/engine.hpp"
#include "rtbwt/geometry.hpp"
#include "rtbwt/wavelet.hpp"

namespace rtbwt {

// Signal files hold one sample per line; '#' starts a comment and commas are
// accepted as extra separators, so a single comma-separated row also parses.
std::vector<double> read_signal_csv(const std::string &path);
void write_signal_csv(const std::string &path, std::span<const double> values);

// Point-set files hold one point per line as comma-separated coordinates,
// optionally followed by "@r,c" to attach an integer grid anchor:
//   1.5,2.25 @3,7
// Anchors must be given for all points or for none.
PointSet read_point_set_csv(const std::string &path);
void write_point_set_csv(const std::string &path, const PointSet &points);

// Columns: stage,band,position,value. Stages are numbered from 0 at the
// finest detail level; the row set with stage == depth holds the
// approximation bands. Bands are 0-based, positions within a band 1-based.
void write_pyramid_csv(const std::string &path, const CoefficientPyramid &pyr);

// Columns: stage,band,position,source. Row means: within the given band, the
// reordered position (1-based) takes its value from the 1-based source index.
void write_operators_csv(const std::string &path, const OperatorSet &ops);

// Columns: index,analysis_low,analysis_high,synthesis_low,synthesis_high
// with a 0-based tap index.
void write_filter_csv(const std::string &path, const WaveletFilterPair &filt);

} // namespace rtbwt
