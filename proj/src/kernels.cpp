#include "maskwatch/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maskwatch/error.hpp"
#include "maskwatch/rng.hpp"
#include "maskwatch/rt.hpp"

namespace maskwatch::kernels {

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("embedding length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

void check_rows(std::span<const double> v, std::size_t dim) {
    if (dim == 0 || v.size() % dim != 0) throw DomainError("embedding buffer is not a multiple of dim");
}

double min_distance_row(std::span<const double> face, std::span<const double> refs, std::size_t dim) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < refs.size() / dim; ++r)
        best = std::min(best, euclidean(face, refs.subspan(r * dim, dim)));
    return best;
}

double lambda_at(std::span<const long> incidence, std::span<const double> weights, std::size_t t) {
    double s = 0;
    const std::size_t kmax = std::min(t, weights.empty() ? 0 : weights.size() - 1);
    for (std::size_t k = 1; k <= kmax; ++k) s += static_cast<double>(incidence[t - k]) * weights[k];
    return s;
}

WindowPosterior posterior_at(const PosteriorInputs& in, std::size_t end) {
    WindowPosterior p;
    const std::size_t begin = end + 1 - in.window;
    for (std::size_t s = begin; s <= end; ++s) {
        p.incidence_sum += static_cast<double>(in.incidence[s]);
        p.lambda_sum += in.lambda[s];
    }
    if (p.lambda_sum <= 0) return p;
    p.shape = in.prior_shape + p.incidence_sum;
    p.scale = 1.0 / (1.0 / in.prior_scale + p.lambda_sum);
    p.mean = p.shape * p.scale;
    p.q025 = gamma_quantile(p.shape, p.scale, 0.025);
    p.q975 = gamma_quantile(p.shape, p.scale, 0.975);
    return p;
}

void check_posterior_inputs(const PosteriorInputs& in) {
    if (in.incidence.size() != in.lambda.size()) throw DomainError("incidence/lambda length mismatch");
    if (in.window == 0 || in.first_end + 1 < in.window) throw DomainError("window does not fit before first end");
}

std::uint64_t block_exceedances(std::span<const double> rx, std::span<const double> ry, double observed_abs,
                                std::uint64_t draws, std::uint64_t seed, std::uint64_t block) {
    const std::uint64_t per = draws / kPermutationBlocks + (block < draws % kPermutationBlocks ? 1 : 0);
    Rng rng(derive_seed(seed, block));
    std::vector<double> perm(ry.begin(), ry.end());
    std::uint64_t hits = 0;
    for (std::uint64_t d = 0; d < per; ++d) {
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
        if (std::fabs(pearson(rx, perm)) >= observed_abs - 1e-12) ++hits;
    }
    return hits;
}

} // namespace

namespace serial {

std::vector<double> min_ref_distances(std::span<const double> faces, std::span<const double> refs,
                                      std::size_t dim) {
    check_rows(faces, dim);
    check_rows(refs, dim);
    std::vector<double> out(faces.size() / dim);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = min_distance_row(faces.subspan(i * dim, dim), refs, dim);
    return out;
}

std::vector<double> infectiousness(std::span<const long> incidence, std::span<const double> weights) {
    std::vector<double> out(incidence.size(), 0.0);
    for (std::size_t t = 1; t < incidence.size(); ++t) out[t] = lambda_at(incidence, weights, t);
    return out;
}

std::vector<WindowPosterior> window_posteriors(const PosteriorInputs& in) {
    check_posterior_inputs(in);
    std::vector<WindowPosterior> out;
    for (std::size_t end = in.first_end; end < in.incidence.size(); ++end) out.push_back(posterior_at(in, end));
    return out;
}

std::uint64_t permutation_exceedances(std::span<const double> rx, std::span<const double> ry,
                                      double observed_abs, std::uint64_t draws, std::uint64_t seed) {
    std::uint64_t hits = 0;
    for (std::uint64_t b = 0; b < kPermutationBlocks; ++b)
        hits += block_exceedances(rx, ry, observed_abs, draws, seed, b);
    return hits;
}

} // namespace serial

namespace omp {

std::vector<double> min_ref_distances(std::span<const double> faces, std::span<const double> refs,
                                      std::size_t dim) {
    check_rows(faces, dim);
    check_rows(refs, dim);
    const auto n = static_cast<std::ptrdiff_t>(faces.size() / dim);
    std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[i] = min_distance_row(faces.subspan(static_cast<std::size_t>(i) * dim, dim), refs, dim);
    return out;
}

std::vector<double> infectiousness(std::span<const long> incidence, std::span<const double> weights) {
    const auto n = static_cast<std::ptrdiff_t>(incidence.size());
    std::vector<double> out(incidence.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 1; t < n; ++t) out[t] = lambda_at(incidence, weights, static_cast<std::size_t>(t));
    return out;
}

std::vector<WindowPosterior> window_posteriors(const PosteriorInputs& in) {
    check_posterior_inputs(in);
    const std::size_t len = in.incidence.size();
    const auto count = static_cast<std::ptrdiff_t>(len > in.first_end ? len - in.first_end : 0);
    std::vector<WindowPosterior> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = posterior_at(in, in.first_end + static_cast<std::size_t>(i));
    return out;
}

std::uint64_t permutation_exceedances(std::span<const double> rx, std::span<const double> ry,
                                      double observed_abs, std::uint64_t draws, std::uint64_t seed) {
    std::uint64_t hits = 0;
    const auto blocks = static_cast<std::ptrdiff_t>(kPermutationBlocks);
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : hits)
    for (std::ptrdiff_t b = 0; b < blocks; ++b)
        hits += block_exceedances(rx, ry, observed_abs, draws, seed, static_cast<std::uint64_t>(b));
    return hits;
}

} // namespace omp

} // namespace maskwatch::kernels
