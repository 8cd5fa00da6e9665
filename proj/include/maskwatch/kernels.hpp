#pragma once

// Data-parallel inner loops. Each kernel has a serial reference implementation and an
// OpenMP implementation that must produce bit-identical results; the serial versions
// are what the tests treat as ground truth and what the benchmark compares against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace maskwatch::kernels {

/// Gamma posterior of one estimation window.
struct WindowPosterior {
    double shape = 0;
    double scale = 0;
    double mean = 0;
    double q025 = 0;
    double q975 = 0;
    double incidence_sum = 0;
    double lambda_sum = 0;
};

struct PosteriorInputs {
    std::span<const long> incidence;
    std::span<const double> lambda;  // total infectiousness, same length as incidence
    std::size_t first_end = 0;       // first window-end index
    std::size_t window = 7;
    double prior_shape = 1;
    double prior_scale = 5;
};

namespace serial {

/// For each of `n_faces` row-major embeddings, the minimum Euclidean distance to any of
/// `n_refs` reference rows. Infinity when there are no references.
std::vector<double> min_ref_distances(std::span<const double> faces, std::span<const double> refs,
                                      std::size_t dim);

/// Lambda_t = sum_{s=1..t} I_{t-s} w_s for every t; Lambda_0 = 0.
std::vector<double> infectiousness(std::span<const long> incidence, std::span<const double> weights);

/// Posteriors for window ends first_end..len-1. Windows with zero lambda sum get shape 0.
std::vector<WindowPosterior> window_posteriors(const PosteriorInputs& in);

/// Number of random permutations of `ry` (out of `draws`) whose |Pearson(rx, perm(ry))|
/// reaches `observed_abs`. Draws are split into fixed seed-derived blocks.
std::uint64_t permutation_exceedances(std::span<const double> rx, std::span<const double> ry,
                                      double observed_abs, std::uint64_t draws, std::uint64_t seed);

} // namespace serial

namespace omp {

std::vector<double> min_ref_distances(std::span<const double> faces, std::span<const double> refs,
                                      std::size_t dim);
std::vector<double> infectiousness(std::span<const long> incidence, std::span<const double> weights);
std::vector<WindowPosterior> window_posteriors(const PosteriorInputs& in);
std::uint64_t permutation_exceedances(std::span<const double> rx, std::span<const double> ry,
                                      double observed_abs, std::uint64_t draws, std::uint64_t seed);

} // namespace omp

inline constexpr std::uint64_t kPermutationBlocks = 64;

/// Squared-sum Euclidean distance in a fixed summation order.
double euclidean(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of two equal-length vectors; 0 when either has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

} // namespace maskwatch::kernels
