#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rtbwt {

/// Orthonormal analysis/synthesis filter bank. Analysis taps have unit norm
/// and lowpass sum sqrt(2); the highpass is the quadrature mirror of the
/// lowpass. Synthesis taps are the reversed analysis taps halved, which
/// under the periodic (undecimated) scheme used here gives exact
/// reconstruction: x = synthesis(low, det) for analysis(x) = (low, det).
struct WaveletFilterPair {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;
    std::vector<double> synthesis_lowpass;
    std::vector<double> synthesis_highpass;

    std::size_t length() const { return lowpass.size(); }
};

/// Supported names: "haar", "sym8". Anything else throws.
WaveletFilterPair make_filter(const std::string& name);

/// A band is one contiguous run of samples (a signal, or one interleaved
/// sub-sequence of a coarser approximation).
using Band = std::vector<double>;

/// Periodic correlation: out[i] = sum_k taps[k] * x[(i + k + offset) mod m].
/// Works for any m >= 1; taps longer than the signal are folded modulo m
/// first, which keeps the transfer function exact at the sampled frequencies.
std::vector<double> periodic_filter(std::span<const double> x,
                                    std::span<const double> taps, long offset);
void periodic_filter(std::span<const double> x, std::span<const double> taps,
                     long offset, std::span<double> out);

struct Subbands {
    std::vector<double> low;
    std::vector<double> det;
};

/// Undecimated analysis: both outputs have the input's length.
Subbands analysis_step(std::span<const double> x, const WaveletFilterPair& filt);
void analysis_step(std::span<const double> x, const WaveletFilterPair& filt,
                   std::span<double> low, std::span<double> det);

struct SplitHalves {
    std::vector<double> odd;  // elements 0, 2, 4, ... (odd samples, counting from 1)
    std::vector<double> even; // elements 1, 3, 5, ...
};

/// Splits an even-length band into its interleaved halves; odd length throws.
SplitHalves split_even_odd(std::span<const double> v);

/// Inverse of split_even_odd.
std::vector<double> merge_even_odd(std::span<const double> odd,
                                   std::span<const double> even);

/// Merges the odd/even lowpass halves back to full length, runs the adjoint
/// synthesis filters over them and the full-length detail band, and returns
/// the sum — the exact inverse of analysis_step followed by split_even_odd.
Band synthesis_step(std::span<const double> low_odd,
                    std::span<const double> low_even,
                    std::span<const double> detail,
                    const WaveletFilterPair& filt);

/// Core synthesis primitive on an unsplit lowpass band: exact inverse of
/// analysis_step for any signal length.
std::vector<double> synthesis_merge(std::span<const double> low,
                                    std::span<const double> det,
                                    const WaveletFilterPair& filt);
void synthesis_merge(std::span<const double> low, std::span<const double> det,
                     const WaveletFilterPair& filt, std::span<double> out);

} // namespace rtbwt
