#include "seedvos/crf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos {

namespace {

constexpr double kProbabilityEpsilon = 1e-6;
constexpr std::size_t kApplyBlocks = 8;

long window_radius(const CrfParams& p, double sxy, std::size_t extent) {
    if (!p.truncated) return static_cast<long>(extent);
    return std::min(static_cast<long>(extent), static_cast<long>(std::ceil(p.truncation_sigmas * sxy)));
}

}  // namespace

void CrfParams::validate() const {
    if (iterations < 0) fail(ErrorCode::InvalidArgument, "CRF iterations must be >= 0");
    if (smoothness_weight < 0 || appearance_weight < 0) fail(ErrorCode::InvalidArgument, "CRF weights must be >= 0");
    if (!(smoothness_sxy > 0) || !(appearance_sxy > 0) || !(appearance_srgb > 0)) {
        fail(ErrorCode::InvalidArgument, "CRF standard deviations must be > 0");
    }
    if (truncated && !(truncation_sigmas > 0)) fail(ErrorCode::InvalidArgument, "truncation width must be > 0");
}

PairwiseKernel::PairwiseKernel(const RgbImage& image, const CrfParams& params)
    : height_(image.height),
      width_(image.width),
      w_s_(params.smoothness_weight),
      w_a_(params.appearance_weight) {
    params.validate();
    const std::size_t extent = std::max(height_, width_);
    radius_s_ = window_radius(params, params.smoothness_sxy, extent);
    radius_a_ = window_radius(params, params.appearance_sxy, extent);

    spatial_s_.assign(height_ * width_, 0.0);
    spatial_a_.assign(height_ * width_, 0.0);
    const double inv_s = 1.0 / (2.0 * params.smoothness_sxy * params.smoothness_sxy);
    const double inv_a = 1.0 / (2.0 * params.appearance_sxy * params.appearance_sxy);
    for (std::size_t dy = 0; dy < height_; ++dy) {
        for (std::size_t dx = 0; dx < width_; ++dx) {
            const double d2 = static_cast<double>(dy * dy + dx * dx);
            const auto ldy = static_cast<long>(dy), ldx = static_cast<long>(dx);
            if (ldy <= radius_s_ && ldx <= radius_s_) spatial_s_[dy * width_ + dx] = w_s_ * std::exp(-d2 * inv_s);
            if (ldy <= radius_a_ && ldx <= radius_a_) spatial_a_[dy * width_ + dx] = w_a_ * std::exp(-d2 * inv_a);
        }
    }
    color_.resize(3 * 255 * 255 + 1);
    const double inv_c = 1.0 / (2.0 * params.appearance_srgb * params.appearance_srgb);
    for (std::size_t d2 = 0; d2 < color_.size(); ++d2) color_[d2] = std::exp(-static_cast<double>(d2) * inv_c);

    const std::size_t n = height_ * width_;
    channels_.resize(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ch = 0; ch < 3; ++ch) channels_[ch * n + i] = image.data[3 * i + ch];
    }

    row_sums_.resize(height_ * width_);
    const std::vector<double> ones(height_ * width_, 1.0);
    apply(ones, row_sums_);
}

void PairwiseKernel::apply(std::span<const double> q, std::span<double> out) const {
    const std::size_t n = pixel_count();
    if (q.size() != n || out.size() != n) fail(ErrorCode::DimensionMismatch, "kernel input size mismatch");
    const long radius = std::max(radius_s_, radius_a_);
    const auto h = static_cast<long>(height_), w = static_cast<long>(width_);
    const int* red = channels_.data();
    const int* green = red + n;
    const int* blue = green + n;
    const double* color = color_.data();

    // Each unordered pair is visited once, from its earlier pixel, and
    // credited to both ends. Rows are dealt to a fixed number of blocks with
    // private accumulators that are summed in block order, so the result does
    // not depend on the thread count.
    const std::size_t blocks = std::min<std::size_t>(kApplyBlocks, height_);
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(n, 0.0));
    parallel_for(blocks, [&](std::size_t b) {
        double* acc = partial[b].data();
        for (long r = static_cast<long>(b); r < h; r += static_cast<long>(blocks)) {
            const long r1 = std::min(h - 1, r + radius);
            for (long c = 0; c < w; ++c) {
                const long c0 = std::max(0L, c - radius), c1 = std::min(w - 1, c + radius);
                const std::size_t i = static_cast<std::size_t>(r * w + c);
                const int ri = red[i], gi = green[i], bi = blue[i];
                const double qi = q[i];
                double sum = 0.0;
                for (long rj = r; rj <= r1; ++rj) {
                    const std::size_t dy = static_cast<std::size_t>(rj - r);
                    const double* ss = spatial_s_.data() + dy * width_;
                    const double* sa = spatial_a_.data() + dy * width_;
                    const long from = rj == r ? c + 1 : c0;
                    const std::size_t row = static_cast<std::size_t>(rj * w);
                    for (long cj = from; cj <= c1; ++cj) {
                        const std::size_t j = row + static_cast<std::size_t>(cj);
                        const std::size_t dx = static_cast<std::size_t>(cj > c ? cj - c : c - cj);
                        const int d0 = ri - red[j], d1 = gi - green[j], d2 = bi - blue[j];
                        const double k = ss[dx] + sa[dx] * color[d0 * d0 + d1 * d1 + d2 * d2];
                        sum += k * q[j];
                        acc[j] += k * qi;
                    }
                }
                acc[i] += sum;
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) total += partial[b][i];
        out[i] = total;
    }
}

Unaries unaries_from_probability(const DenseMap& probability) {
    const std::size_t n = probability.pixel_count();
    Unaries u;
    u.foreground.resize(n);
    u.background.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::clamp(static_cast<double>(probability[i]), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
        u.foreground[i] = -std::log(p);
        u.background[i] = -std::log(1.0 - p);
    }
    return u;
}

namespace {

void normalize_into(double e_fg, double e_bg, double& q_fg, double& q_bg) {
    const double m = std::max(e_fg, e_bg);
    const double a = std::exp(e_fg - m), b = std::exp(e_bg - m);
    q_fg = a / (a + b);
    q_bg = b / (a + b);
}

}  // namespace

Marginals unary_marginals(const Unaries& unaries) {
    const std::size_t n = unaries.foreground.size();
    Marginals q{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        normalize_into(-unaries.foreground[i], -unaries.background[i], q.foreground[i], q.background[i]);
    }
    return q;
}

Marginals meanfield_step(const Marginals& current, const Unaries& unaries, const PairwiseKernel& kernel) {
    const std::size_t n = kernel.pixel_count();
    if (current.foreground.size() != n || unaries.foreground.size() != n) {
        fail(ErrorCode::DimensionMismatch, "marginals, unaries and kernel disagree on pixel count");
    }
    std::vector<double> msg_fg(n), msg_bg(n);
    kernel.apply(current.foreground, msg_fg);
    const auto sums = kernel.row_sums();
    for (std::size_t i = 0; i < n; ++i) msg_bg[i] = sums[i] - msg_fg[i];

    Marginals next{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        // Potts: label l pays for neighbours holding the other label.
        normalize_into(-unaries.foreground[i] - msg_bg[i], -unaries.background[i] - msg_fg[i], next.foreground[i],
                       next.background[i]);
    }
    return next;
}

CrfResult refine(const DenseMap& probability, const RgbImage& image, const CrfParams& params,
                 const std::function<void(int, const Marginals&)>& observer) {
    params.validate();
    if (probability.height() != image.height || probability.width() != image.width) {
        fail(ErrorCode::DimensionMismatch, "probability map and image differ in size");
    }
    const Unaries unaries = unaries_from_probability(probability);
    Marginals q = unary_marginals(unaries);
    if (params.iterations > 0) {
        const PairwiseKernel kernel(image, params);
        for (int it = 0; it < params.iterations; ++it) {
            q = meanfield_step(q, unaries, kernel);
            if (observer) observer(it + 1, q);
        }
    }

    CrfResult out{BinaryMask(image.height, image.width), DenseMap::planar(image.height, image.width)};
    for (std::size_t i = 0; i < q.foreground.size(); ++i) {
        out.posterior[i] = static_cast<float>(q.foreground[i]);
        out.mask.set(i, q.foreground[i] >= q.background[i]);
    }
    return out;
}

}  // namespace seedvos
