#pragma once

#include <functional>
#include <span>
#include <vector>

#include "seedvos/dense_map.hpp"

namespace seedvos {

/// Two-kernel fully connected CRF parameters. Spatial terms are in pixels,
/// the colour term in 8-bit intensity units. The defaults are tuning
/// defaults, not calibrated constants.
struct CrfParams {
    int iterations = 10;
    double smoothness_weight = 3.0;   // Gaussian on position
    double smoothness_sxy = 3.0;
    double appearance_weight = 4.0;   // bilateral on position and colour
    double appearance_sxy = 60.0;
    double appearance_srgb = 5.0;
    /// Restrict each kernel to a square window of `truncation_sigmas`
    /// spatial standard deviations. Off means exact O(N^2) inference.
    bool truncated = false;
    double truncation_sigmas = 3.0;

    void validate() const;
};

/// out[i] = sum over j != i of k(i, j) * q[j], with
/// k = w_s * exp(-|dp|^2 / 2 s_xy^2) + w_a * exp(-|dp|^2 / 2 a_xy^2 - |dI|^2 / 2 a_rgb^2).
class PairwiseKernel {
public:
    PairwiseKernel(const RgbImage& image, const CrfParams& params);

    std::size_t pixel_count() const noexcept { return height_ * width_; }
    void apply(std::span<const double> q, std::span<double> out) const;
    /// apply() of the all-ones vector.
    std::span<const double> row_sums() const noexcept { return row_sums_; }

private:
    std::size_t height_, width_;
    std::vector<int> channels_;  // planar R, G, B
    double w_s_, w_a_;
    long radius_s_, radius_a_;
    // Factorised kernel tables: spatial terms indexed by (|dy|, |dx|), colour
    // term by the squared RGB distance.
    std::vector<double> spatial_s_, spatial_a_, color_;
    std::vector<double> row_sums_;
};

/// Per-pixel label distributions for the two labels.
struct Marginals {
    std::vector<double> foreground;
    std::vector<double> background;
};

/// Unary energies, -log of the label probabilities.
struct Unaries {
    std::vector<double> foreground;
    std::vector<double> background;
};

/// Clamps p to [1e-6, 1 - 1e-6] before taking logs.
Unaries unaries_from_probability(const DenseMap& probability);

/// softmax(-unary) per pixel: the distribution without pairwise terms.
Marginals unary_marginals(const Unaries& unaries);

/// One synchronous mean-field update with Potts compatibility:
/// Q_i(l) ~ exp(-u_i(l) - sum_j k(i,j) Q_j(other label)).
/// The background message is taken as row_sums - K Q_fg, so `current`
/// must be normalised.
Marginals meanfield_step(const Marginals& current, const Unaries& unaries, const PairwiseKernel& kernel);

struct CrfResult {
    BinaryMask mask;     // foreground where Q_fg >= Q_bg
    DenseMap posterior;  // Q_fg, planar
};

/// Runs `params.iterations` mean-field steps starting from the unary
/// marginals. `observer`, if set, sees the marginals after every step.
CrfResult refine(const DenseMap& probability, const RgbImage& image, const CrfParams& params,
                 const std::function<void(int, const Marginals&)>& observer = {});

}  // namespace seedvos
