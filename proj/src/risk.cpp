#include "admgaug/risk.hpp"

#include "admgaug/error.hpp"

#include <algorithm>
#include <cmath>

namespace admgaug {

void WeightedSamples::add(std::span<const double> features_row, double target, double weight,
                          std::span<const std::size_t> source_rows) {
    if (features_row.size() != features) throw Error(Errc::DimensionMismatch, "feature row has the wrong length");
    if (source_rows.size() != source_width) throw Error(Errc::DimensionMismatch, "source row list has the wrong length");
    if (!(weight >= 0.0)) throw Error(Errc::InvalidArgument, "sample weights must be nonnegative");
    x.insert(x.end(), features_row.begin(), features_row.end());
    sources.insert(sources.end(), source_rows.begin(), source_rows.end());
    y.push_back(target);
    w.push_back(weight);
}

void WeightedSamples::append(const WeightedSamples& other) {
    if (other.features != features || other.source_width != source_width) {
        throw Error(Errc::DimensionMismatch, "cannot append samples of another width");
    }
    x.insert(x.end(), other.x.begin(), other.x.end());
    sources.insert(sources.end(), other.sources.begin(), other.sources.end());
    y.insert(y.end(), other.y.begin(), other.y.end());
    w.insert(w.end(), other.w.begin(), other.w.end());
}

WeightedSamples WeightedSamples::select(std::span<const std::size_t> indices) const {
    WeightedSamples out(features, source_width);
    out.x.reserve(indices.size() * features);
    out.y.reserve(indices.size());
    out.w.reserve(indices.size());
    out.sources.reserve(indices.size() * source_width);
    for (auto i : indices) {
        const auto r = row(i);
        const auto src = source(i);
        out.x.insert(out.x.end(), r.begin(), r.end());
        out.sources.insert(out.sources.end(), src.begin(), src.end());
        out.y.push_back(y[i]);
        out.w.push_back(w[i]);
    }
    return out;
}

std::vector<double> feature_row(std::span<const double> row, std::size_t target_column) {
    std::vector<double> out;
    out.reserve(row.size() - 1);
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (c != target_column) out.push_back(row[c]);
    }
    return out;
}

namespace {

void add_original_rows(const Dataset& data, std::size_t target, double weight, WeightedSamples& out) {
    std::vector<std::size_t> src(data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        std::fill(src.begin(), src.end(), r);
        out.add(feature_row(row, target), row[target], weight, src);
    }
}

void add_augmented_rows(const AugmentedDataset& aug, std::size_t target, double scale, WeightedSamples& out) {
    std::vector<std::size_t> src(aug.dims);
    for (std::size_t s = 0; s < aug.size(); ++s) {
        const double w = scale * aug.weights[s];
        if (!(w > 0.0)) continue;
        const auto row = aug.row(s);
        for (std::size_t c = 0; c < aug.dims; ++c) src[c] = aug.source_row(s, c);
        out.add(feature_row(row, target), row[target], w, src);
    }
}

}  // namespace

WeightedSamples empirical_samples(const Dataset& data) {
    const auto target = data.require_target();
    WeightedSamples out(data.cols() - 1, data.cols());
    if (data.rows() > 0) add_original_rows(data, target, 1.0 / static_cast<double>(data.rows()), out);
    return out;
}

WeightedSamples augmented_samples(const AugmentedDataset& aug, std::size_t target_column) {
    if (target_column >= aug.dims) throw Error(Errc::InvalidArgument, "target column out of range");
    WeightedSamples out(aug.dims - 1, aug.dims);
    std::vector<std::size_t> src(aug.dims);
    for (std::size_t s = 0; s < aug.size(); ++s) {
        const auto row = aug.row(s);
        for (std::size_t c = 0; c < aug.dims; ++c) src[c] = aug.source_row(s, c);
        out.add(feature_row(row, target_column), row[target_column], aug.weights[s], src);
    }
    return out;
}

WeightedSamples combined_samples(const Dataset& data, const AugmentedDataset* aug, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::LambdaOutOfRange, "lambda must lie in [0, 1]");
    const auto target = data.require_target();
    WeightedSamples out(data.cols() - 1, data.cols());
    const double w_orig = data.rows() ? (1.0 - lambda) / static_cast<double>(data.rows()) : 0.0;
    if (w_orig > 0.0) add_original_rows(data, target, w_orig, out);
    if (lambda > 0.0) {
        if (aug == nullptr) throw Error(Errc::InvalidArgument, "lambda > 0 requires an augmented dataset");
        if (aug->dims != data.cols()) throw Error(Errc::DimensionMismatch, "augmented data has another width");
        add_augmented_rows(*aug, target, lambda, out);
    }
    return out;
}

double weighted_risk(const Predictor& model, const WeightedSamples& samples, const Loss& loss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples.w[i] == 0.0) continue;
        acc += samples.w[i] * loss(samples.y[i], model(samples.row(i)));
    }
    return acc;
}

double empirical_risk(const Predictor& model, const Dataset& data, const Loss& loss) {
    if (data.rows() == 0) throw Error(Errc::EmptyData, "empirical risk of an empty dataset");
    const auto target = data.require_target();
    double acc = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        acc += loss(row[target], model(feature_row(row, target)));
    }
    return acc / static_cast<double>(data.rows());
}

double augmented_risk(const Predictor& model, const AugmentedDataset& aug, std::size_t target_column,
                      const Loss& loss) {
    return weighted_risk(model, augmented_samples(aug, target_column), loss);
}

double combined_objective(const Predictor& model, const Dataset& data, const AugmentedDataset& aug, double lambda,
                          double regularization, const Loss& loss) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::LambdaOutOfRange, "lambda must lie in [0, 1]");
    const double emp = empirical_risk(model, data, loss);
    const double augr = augmented_risk(model, aug, data.require_target(), loss);
    return (1.0 - lambda) * emp + lambda * augr + regularization;
}

}  // namespace admgaug
