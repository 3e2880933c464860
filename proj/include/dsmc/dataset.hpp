#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dsmc {

/// n views over the same p instances. View v is p x d_v, one instance per row.
struct MultiViewDataset {
    std::vector<Eigen::MatrixXd> views;
    std::optional<std::vector<long long>> labels;

    Eigen::Index instances() const { return views.empty() ? 0 : views.front().rows(); }
    std::size_t view_count() const { return views.size(); }

    /// Throws ValidationError when the cross-view invariants do not hold.
    void validate() const;
};

/// Parameters of the planted-cluster generator.
struct SynthSpec {
    int p = 150;
    int n = 3;
    int k = 3;
    int d = 10;
    double separation = 10.0;
    std::vector<double> noise_sigma{0.1, 0.1, 0.1};
    std::uint64_t seed = 0;

    void validate() const;
};

MultiViewDataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const MultiViewDataset& data, const std::filesystem::path& dir);

/// Balanced latent Gaussian clusters pushed through one random linear map per view,
/// plus isotropic noise of that view's sigma. Deterministic in spec.seed.
MultiViewDataset generate_synthetic(const SynthSpec& spec);

/// Per-feature z-scoring; constant columns are centred only.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

}  // namespace dsmc
