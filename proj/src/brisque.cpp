#include "ugcqa/brisque.hpp"

#include <algorithm>
#include <cmath>

namespace ugcqa {

namespace {

constexpr double kSaturation = 1.0 / 255.0;
constexpr int kWindowRadius = 3;  // 7-tap window

const Eigen::Array<double, 7, 1>& gaussian_window() {
    static const Eigen::Array<double, 7, 1> w = [] {
        Eigen::Array<double, 7, 1> k;
        const double sigma = 7.0 / 6.0;
        for (int i = -kWindowRadius; i <= kWindowRadius; ++i) {
            k[i + kWindowRadius] = std::exp(-0.5 * i * i / (sigma * sigma));
        }
        return (k / k.sum()).eval();
    }();
    return w;
}

// Half-sample symmetric index: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline Eigen::Index mirror(Eigen::Index i, Eigen::Index n) {
    if (i < 0) return -1 - i;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

// Separable 7x7 Gaussian blur with symmetric extension.
Eigen::ArrayXXd blur(const Eigen::ArrayXXd& src) {
    const auto& w = gaussian_window();
    const Eigen::Index h = src.rows();
    const Eigen::Index wd = src.cols();

    Eigen::ArrayXXd tmp(h, wd);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < wd; ++x) {
            double acc = 0.0;
            for (int k = -kWindowRadius; k <= kWindowRadius; ++k) {
                acc += w[k + kWindowRadius] * src(y, mirror(x + k, wd));
            }
            tmp(y, x) = acc;
        }
    }
    Eigen::ArrayXXd out(h, wd);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < wd; ++x) {
            double acc = 0.0;
            for (int k = -kWindowRadius; k <= kWindowRadius; ++k) {
                acc += w[k + kWindowRadius] * tmp(mirror(y + k, h), x);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

// Shape grid: ratio(alpha) = gamma(2/a)^2 / (gamma(1/a) * gamma(3/a)),
// strictly increasing over alpha in [0.2, 10].
struct ShapeGrid {
    std::vector<double> alpha;
    std::vector<double> ratio;
};

const ShapeGrid& shape_grid() {
    static const ShapeGrid grid = [] {
        ShapeGrid g;
        const int n = 9801;  // 0.2 .. 10.0 step 0.001
        g.alpha.resize(n);
        g.ratio.resize(n);
        for (int i = 0; i < n; ++i) {
            const double a = 0.2 + 0.001 * i;
            g.alpha[static_cast<std::size_t>(i)] = a;
            g.ratio[static_cast<std::size_t>(i)] =
                std::exp(2.0 * std::lgamma(2.0 / a) - std::lgamma(1.0 / a) - std::lgamma(3.0 / a));
        }
        return g;
    }();
    return grid;
}

// Nearest grid alpha for a moment ratio; flags out-of-grid clamping.
double lookup_shape(double ratio, bool& clamped) {
    const ShapeGrid& g = shape_grid();
    clamped = false;
    if (ratio <= g.ratio.front()) {
        clamped = ratio < g.ratio.front();
        return g.alpha.front();
    }
    if (ratio >= g.ratio.back()) {
        clamped = ratio > g.ratio.back();
        return g.alpha.back();
    }
    const auto it = std::lower_bound(g.ratio.begin(), g.ratio.end(), ratio);
    const std::size_t hi = static_cast<std::size_t>(it - g.ratio.begin());
    const std::size_t lo = hi - 1;
    return (ratio - g.ratio[lo] <= g.ratio[hi] - ratio) ? g.alpha[lo] : g.alpha[hi];
}

}  // namespace

namespace {

// No size gate: the second extraction scale runs on planes as small as
// 16x16, below the public 32x32 entry bound.
Eigen::ArrayXXd mscn_impl(const Eigen::ArrayXXd& luma) {
    const Eigen::ArrayXXd mu = blur(luma);
    const Eigen::ArrayXXd m2 = blur(luma.square());
    const Eigen::ArrayXXd sigma = (m2 - mu.square()).max(0.0).sqrt();
    return (luma - mu) / (sigma + kSaturation);
}

}  // namespace

Eigen::ArrayXXd mscn_coefficients(const ImagePlane& img) {
    validate(img);
    return mscn_impl(img.luma);
}

GgdFit fit_ggd(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
    if (samples.size() < 100) throw ValidationError("fit_ggd: need at least 100 samples");
    const double m2 = samples.square().mean();
    if (m2 == 0.0) throw ValidationError("fit_ggd: all samples are zero");
    const double mabs = samples.abs().mean();
    GgdFit fit;
    fit.shape = lookup_shape(mabs * mabs / m2, fit.clamped);
    fit.variance = m2;
    return fit;
}

AggdFit fit_aggd(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
    if (samples.size() < 100) throw ValidationError("fit_aggd: need at least 100 samples");
    double left_sq = 0.0, right_sq = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    Eigen::Index n_left = 0, n_right = 0;
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        const double v = samples[i];
        if (v < 0.0) {
            left_sq += v * v;
            ++n_left;
        } else if (v > 0.0) {
            right_sq += v * v;
            ++n_right;
        }
        abs_sum += std::abs(v);
        sq_sum += v * v;
    }
    if (n_left == 0 || n_right == 0) {
        throw ValidationError("fit_aggd: needs samples of both signs");
    }
    const double n = static_cast<double>(samples.size());
    const double left_std = std::sqrt(left_sq / static_cast<double>(n_left));
    const double right_std = std::sqrt(right_sq / static_cast<double>(n_right));
    const double gamma_hat = left_std / right_std;
    const double r_hat = (abs_sum / n) * (abs_sum / n) / (sq_sum / n);
    const double r_norm = r_hat * (gamma_hat * gamma_hat * gamma_hat + 1.0) * (gamma_hat + 1.0) /
                          ((gamma_hat * gamma_hat + 1.0) * (gamma_hat * gamma_hat + 1.0));

    AggdFit fit;
    fit.shape = lookup_shape(r_norm, fit.clamped);
    fit.left_variance = left_std * left_std;
    fit.right_variance = right_std * right_std;
    const double nu = fit.shape;
    fit.mean = (right_std - left_std) *
               std::exp(std::lgamma(2.0 / nu) - std::lgamma(1.0 / nu)) *
               std::exp(0.5 * (std::lgamma(1.0 / nu) - std::lgamma(3.0 / nu)));
    return fit;
}

namespace {

void scale_features(const ImagePlane& plane, Eigen::VectorXd& out, Eigen::Index offset) {
    const Eigen::ArrayXXd mscn = mscn_impl(plane.luma);
    const Eigen::Index h = mscn.rows();
    const Eigen::Index w = mscn.cols();

    {
        const Eigen::Map<const Eigen::ArrayXd> flat(mscn.data(), mscn.size());
        const GgdFit g = fit_ggd(flat);
        out[offset + 0] = g.shape;
        out[offset + 1] = g.variance;
    }

    // Neighbor products: horizontal, vertical, main diagonal, secondary
    // diagonal, each over the valid (non-wrapping) region.
    const auto fit_pairs = [&](const Eigen::ArrayXXd& product, Eigen::Index slot) {
        const Eigen::Map<const Eigen::ArrayXd> flat(product.data(), product.size());
        const AggdFit a = fit_aggd(flat);
        out[slot + 0] = a.shape;
        out[slot + 1] = a.mean;
        out[slot + 2] = a.left_variance;
        out[slot + 3] = a.right_variance;
    };
    fit_pairs(mscn.block(0, 0, h, w - 1) * mscn.block(0, 1, h, w - 1), offset + 2);
    fit_pairs(mscn.block(0, 0, h - 1, w) * mscn.block(1, 0, h - 1, w), offset + 6);
    fit_pairs(mscn.block(0, 0, h - 1, w - 1) * mscn.block(1, 1, h - 1, w - 1), offset + 10);
    fit_pairs(mscn.block(0, 1, h - 1, w - 1) * mscn.block(1, 0, h - 1, w - 1), offset + 14);
}

}  // namespace

Eigen::VectorXd brisque_features(const ImagePlane& img) {
    validate(img);
    Eigen::VectorXd features(kBrisqueDim);
    scale_features(img, features, 0);
    scale_features(downsample2x(img), features, 18);
    if (!features.allFinite()) throw ComputeError("brisque_features: non-finite feature values");
    return features;
}

Eigen::VectorXd pool_temporal(const std::vector<Eigen::VectorXd>& frame_features) {
    if (frame_features.empty()) throw ValidationError("pool_temporal: empty frame list");
    const Eigen::Index dim = frame_features.front().size();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    for (const Eigen::VectorXd& f : frame_features) {
        if (f.size() != dim) throw ValidationError("pool_temporal: inconsistent feature dimensions");
        sum += f;
    }
    return sum / static_cast<double>(frame_features.size());
}

}  // namespace ugcqa
