#pragma once

#include "dsmc/dataset.hpp"
#include "dsmc/graph.hpp"
#include "dsmc/labeling.hpp"
#include "dsmc/metrics.hpp"
#include "dsmc/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dsmc {

/// Everything one batch run needs. JSON keys match the member names.
struct RunConfig {
    std::optional<std::filesystem::path> data_dir;
    std::optional<SynthSpec> synth;
    SolverConfig solver;
    SigmaPolicy sigma = MedianSigma{};
    LabelMethod label_extraction = LabelMethod::kmeans;
    bool standardize = false;
    std::filesystem::path output_dir = "dsmc_out";

    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& file);

WeightMode parse_weight_mode(const std::string& s);
LabelMethod parse_label_method(const std::string& s);
SigmaPolicy parse_sigma(const std::string& s);

struct RunReport {
    std::optional<MetricTriple> metrics;
    std::vector<double> view_weights;
    int iterations = 0;
    StopReason stop = StopReason::max_iter;
    double wall_time_seconds = 0;
    nlohmann::json config;

    nlohmann::json to_json() const;
};

struct PipelineResult {
    RunReport report;
    std::vector<int> labels;
    SolverResult<double> solver;
    std::vector<double> sigmas;  // bandwidth actually used per view
};

/// Builds per-view graphs and embeddings; failures name the view.
std::vector<SpectralEmbedding<double>> embed_views(const MultiViewDataset& data, Eigen::Index k,
                                                   const SigmaPolicy& sigma, bool standardize,
                                                   std::vector<double>* sigmas_used = nullptr);

/// dataset -> graphs -> solver -> labels -> metrics, in memory.
PipelineResult run_pipeline(const RunConfig& cfg, const StepObserver<double>& observe = {});
PipelineResult run_pipeline(const RunConfig& cfg, const MultiViewDataset& data,
                            const StepObserver<double>& observe = {});

std::string format_trace_csv(const IterationTrace& trace);

// Batch entry points behind the command-line tool.
RunReport cmd_run(const RunConfig& cfg);
void cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir);
MetricTriple cmd_eval(const std::filesystem::path& pred_file, const std::filesystem::path& truth_file);

}  // namespace dsmc
