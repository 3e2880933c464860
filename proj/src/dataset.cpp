#include "dsmc/dataset.hpp"

#include "dsmc/csv.hpp"
#include "dsmc/error.hpp"

#include <random>
#include <string>

namespace dsmc {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

}  // namespace

void MultiViewDataset::validate() const {
    if (views.empty()) throw ValidationError("dataset has no views");
    const auto p = views.front().rows();
    if (p < 2) throw ValidationError("dataset needs at least 2 instances, found " + std::to_string(p));
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].rows() != p)
            throw ValidationError("view " + std::to_string(v) + " has " +
                                  std::to_string(views[v].rows()) + " rows, view 0 has " +
                                  std::to_string(p));
        if (views[v].cols() < 1)
            throw ValidationError("view " + std::to_string(v) + " has no features");
        if (!views[v].allFinite())
            throw ValidationError("view " + std::to_string(v) + " has non-finite entries");
    }
    if (labels) {
        if (static_cast<Eigen::Index>(labels->size()) != p)
            throw ValidationError("labels have length " + std::to_string(labels->size()) +
                                  ", expected " + std::to_string(p));
        for (std::size_t i = 0; i < labels->size(); ++i)
            if ((*labels)[i] < 0)
                throw ValidationError("label " + std::to_string(i) + " is negative");
    }
}

void SynthSpec::validate() const {
    if (p < 2) throw ValidationError("synth: p must be >= 2");
    if (n < 1) throw ValidationError("synth: n must be >= 1");
    if (k < 1 || k > p) throw ValidationError("synth: k must satisfy 1 <= k <= p");
    if (d < 1) throw ValidationError("synth: d must be >= 1");
    if (!(separation > 0.0)) throw ValidationError("synth: separation must be > 0");
    if (noise_sigma.size() != static_cast<std::size_t>(n))
        throw ValidationError("synth: noise list has " + std::to_string(noise_sigma.size()) +
                              " entries for " + std::to_string(n) + " views");
    for (double s : noise_sigma)
        if (!(s >= 0.0)) throw ValidationError("synth: noise sigma must be >= 0");
}

MultiViewDataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError(dir.string() + ": not a directory");

    // view_<i>.csv, contiguous from 0
    std::size_t found = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("view_") && name.ends_with(".csv")) ++found;
    }
    if (found == 0) throw ValidationError(dir.string() + ": missing view_0.csv");

    MultiViewDataset data;
    for (std::size_t v = 0; v < found; ++v) {
        const auto file = dir / ("view_" + std::to_string(v) + ".csv");
        if (!fs::exists(file))
            throw ValidationError(file.string() + ": missing view file (indices must be contiguous)");
        data.views.push_back(csv::read_matrix(file));
        if (data.views.back().rows() != data.views.front().rows())
            throw ValidationError("row-count mismatch: " + (dir / "view_0.csv").string() + " has " +
                                  std::to_string(data.views.front().rows()) + " rows, " +
                                  file.string() + " has " +
                                  std::to_string(data.views.back().rows()));
    }

    const auto label_file = dir / "labels.csv";
    if (fs::exists(label_file)) {
        data.labels = csv::read_labels(label_file);
        if (static_cast<Eigen::Index>(data.labels->size()) != data.views.front().rows())
            throw ValidationError(label_file.string() + ": " + std::to_string(data.labels->size()) +
                                  " labels for " + std::to_string(data.views.front().rows()) +
                                  " instances");
        for (std::size_t i = 0; i < data.labels->size(); ++i)
            if ((*data.labels)[i] < 0)
                throw ValidationError(label_file.string() + ":" + std::to_string(i + 1) +
                                      ": negative label");
    }
    data.validate();
    return data;
}

void write_dataset(const MultiViewDataset& data, const fs::path& dir) {
    data.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError(dir.string() + ": cannot create directory");
    for (std::size_t v = 0; v < data.views.size(); ++v)
        csv::write_atomic(dir / ("view_" + std::to_string(v) + ".csv"), csv::format_matrix(data.views[v]));
    if (data.labels) csv::write_atomic(dir / "labels.csv", csv::format_labels(*data.labels));
}

MultiViewDataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    const Eigen::Index p = spec.p, k = spec.k, d = spec.d;

    // Centres on scaled basis vectors: every pair sits exactly `separation` apart.
    const double scale = spec.separation / std::sqrt(2.0);

    std::vector<long long> labels(static_cast<std::size_t>(p));
    {
        const Eigen::Index base = p / k, extra = p % k;
        Eigen::Index i = 0;
        for (Eigen::Index c = 0; c < k; ++c)
            for (Eigen::Index j = 0; j < base + (c < extra ? 1 : 0); ++j) labels[i++] = c;
    }

    auto latent_rng = seeded_engine(spec.seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd latent(p, k);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            latent(i, j) = normal(latent_rng) + (labels[i] == j ? scale : 0.0);

    MultiViewDataset data;
    data.labels = std::move(labels);
    for (int v = 0; v < spec.n; ++v) {
        auto rng = seeded_engine(spec.seed, static_cast<std::uint32_t>(v) + 1);
        std::normal_distribution<double> view_normal(0.0, 1.0);
        Eigen::MatrixXd map(k, d);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < d; ++j) map(i, j) = view_normal(rng);
        Eigen::MatrixXd x = latent * map;
        const double sigma = spec.noise_sigma[v];
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < d; ++j) x(i, j) += sigma * view_normal(rng);
        data.views.push_back(std::move(x));
    }
    return data;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x.rowwise() - x.colwise().mean();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
        if (sd > 0.0) out.col(j) /= sd;
    }
    return out;
}

}  // namespace dsmc
