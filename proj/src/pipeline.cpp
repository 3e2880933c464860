#include "dsmc/pipeline.hpp"

#include "dsmc/csv.hpp"
#include "dsmc/error.hpp"

#include <chrono>
#include <fstream>
#include <set>

namespace dsmc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Re-raises module errors with the failing stage in front, keeping the error kind.
template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(stage + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw NumericalError(stage + ": " + e.what());
    }
}

const char* to_string(WeightMode m) { return m == WeightMode::norm ? "norm" : "reciprocal"; }
const char* to_string(LabelMethod m) { return m == LabelMethod::argmax ? "argmax" : "kmeans"; }

SynthSpec synth_from_json(const json& j) {
    static const std::set<std::string> known{"p", "n", "k", "d", "separation", "noise_sigma", "seed"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError("config: unknown synth field '" + key + "'");
    SynthSpec s;
    s.p = j.value("p", s.p);
    s.n = j.value("n", s.n);
    s.k = j.value("k", s.k);
    s.d = j.value("d", s.d);
    s.separation = j.value("separation", s.separation);
    s.noise_sigma = j.value("noise_sigma", std::vector<double>(static_cast<std::size_t>(s.n), 0.1));
    s.seed = j.value("seed", s.seed);
    return s;
}

json synth_to_json(const SynthSpec& s) {
    return {{"p", s.p},           {"n", s.n},
            {"k", s.k},           {"d", s.d},
            {"separation", s.separation}, {"noise_sigma", s.noise_sigma},
            {"seed", s.seed}};
}

}  // namespace

WeightMode parse_weight_mode(const std::string& s) {
    if (s == "reciprocal") return WeightMode::reciprocal;
    if (s == "norm") return WeightMode::norm;
    throw ValidationError("w_mode must be 'reciprocal' or 'norm', got '" + s + "'");
}

LabelMethod parse_label_method(const std::string& s) {
    if (s == "kmeans") return LabelMethod::kmeans;
    if (s == "argmax") return LabelMethod::argmax;
    throw ValidationError("label extraction must be 'kmeans' or 'argmax', got '" + s + "'");
}

SigmaPolicy parse_sigma(const std::string& s) {
    if (s == "median") return MedianSigma{};
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(v > 0.0))
        throw ValidationError("sigma must be 'median' or a positive number, got '" + s + "'");
    return FixedSigma{v};
}

void RunConfig::validate() const {
    if (data_dir.has_value() == synth.has_value())
        throw ValidationError("config: exactly one of data_dir and synth must be set");
    if (synth) synth->validate();
    solver.validate();
    if (solver.k < 0) throw ValidationError("config: k must be >= 1");
    if (const auto* f = std::get_if<FixedSigma>(&sigma); f && !(f->value > 0.0))
        throw ValidationError("config: fixed sigma must be > 0");
}

RunConfig config_from_json(const json& j) {
    static const std::set<std::string> known{
        "data_dir", "synth",  "k",     "mu0",   "mu_max",           "rho",
        "max_iter", "tol_residual", "tol_objective", "w_mode", "w_cap", "eps_w",
        "ablation_uniform_M", "seed", "sigma", "label_extraction", "standardize", "output_dir"};
    if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError("config: unknown field '" + key + "'");

    RunConfig c;
    try {
        if (j.contains("data_dir") && !j["data_dir"].is_null())
            c.data_dir = j["data_dir"].get<std::string>();
        if (j.contains("synth") && !j["synth"].is_null()) c.synth = synth_from_json(j["synth"]);
        auto& s = c.solver;
        s.k = j.value("k", s.k);
        s.mu0 = j.value("mu0", s.mu0);
        s.mu_max = j.value("mu_max", s.mu_max);
        s.rho = j.value("rho", s.rho);
        s.max_iter = j.value("max_iter", s.max_iter);
        s.tol_residual = j.value("tol_residual", s.tol_residual);
        s.tol_objective = j.value("tol_objective", s.tol_objective);
        if (j.contains("w_mode")) s.w_mode = parse_weight_mode(j["w_mode"].get<std::string>());
        s.w_cap = j.value("w_cap", s.w_cap);
        s.eps_w = j.value("eps_w", s.eps_w);
        s.ablation_uniform_M = j.value("ablation_uniform_M", s.ablation_uniform_M);
        s.seed = j.value("seed", s.seed);
        if (j.contains("sigma")) {
            const auto& sg = j["sigma"];
            c.sigma = sg.is_number() ? SigmaPolicy{FixedSigma{sg.get<double>()}}
                                     : parse_sigma(sg.get<std::string>());
        }
        if (j.contains("label_extraction"))
            c.label_extraction = parse_label_method(j["label_extraction"].get<std::string>());
        c.standardize = j.value("standardize", c.standardize);
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["data_dir"] = c.data_dir ? json(c.data_dir->string()) : json(nullptr);
    j["synth"] = c.synth ? synth_to_json(*c.synth) : json(nullptr);
    j["k"] = c.solver.k;
    j["mu0"] = c.solver.mu0;
    j["mu_max"] = c.solver.mu_max;
    j["rho"] = c.solver.rho;
    j["max_iter"] = c.solver.max_iter;
    j["tol_residual"] = c.solver.tol_residual;
    j["tol_objective"] = c.solver.tol_objective;
    j["w_mode"] = to_string(c.solver.w_mode);
    j["w_cap"] = c.solver.w_cap;
    j["eps_w"] = c.solver.eps_w;
    j["ablation_uniform_M"] = c.solver.ablation_uniform_M;
    j["seed"] = c.solver.seed;
    if (const auto* f = std::get_if<FixedSigma>(&c.sigma))
        j["sigma"] = f->value;
    else
        j["sigma"] = "median";
    j["label_extraction"] = to_string(c.label_extraction);
    j["standardize"] = c.standardize;
    j["output_dir"] = c.output_dir.string();
    return j;
}

RunConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError(file.string() + ": cannot open config");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(file.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json RunReport::to_json() const {
    json j;
    if (metrics) {
        j["metrics"] = {{"acc", metrics->acc}, {"nmi", metrics->nmi}, {"purity", metrics->purity}};
    } else {
        j["metrics"] = {{"acc", nullptr}, {"nmi", nullptr}, {"purity", nullptr}};
    }
    j["view_weights"] = view_weights;
    j["iterations"] = iterations;
    j["stop_reason"] = dsmc::to_string(stop);
    j["wall_time_seconds"] = wall_time_seconds;
    j["config"] = config;
    return j;
}

std::vector<SpectralEmbedding<double>> embed_views(const MultiViewDataset& data, Eigen::Index k,
                                                   const SigmaPolicy& sigma, bool standardize,
                                                   std::vector<double>* sigmas_used) {
    std::vector<SpectralEmbedding<double>> out;
    out.reserve(data.views.size());
    for (std::size_t v = 0; v < data.views.size(); ++v) {
        in_stage("graph (view " + std::to_string(v) + ")", [&] {
            const Eigen::MatrixXd x = standardize ? standardize_columns(data.views[v]) : data.views[v];
            const auto g = build_affinity(x, sigma);
            if (sigmas_used) sigmas_used->push_back(g.sigma);
            out.push_back(spectral_embedding(build_laplacian(g), k));
            return 0;
        });
    }
    return out;
}

PipelineResult run_pipeline(const RunConfig& cfg, const StepObserver<double>& observe) {
    in_stage("config", [&] {
        cfg.validate();
        return 0;
    });
    const MultiViewDataset data = in_stage("dataset", [&] {
        return cfg.data_dir ? load_dataset(*cfg.data_dir) : generate_synthetic(*cfg.synth);
    });
    return run_pipeline(cfg, data, observe);
}

PipelineResult run_pipeline(const RunConfig& cfg, const MultiViewDataset& data,
                            const StepObserver<double>& observe) {
    const auto start = std::chrono::steady_clock::now();
    in_stage("dataset", [&] {
        data.validate();
        return 0;
    });

    RunConfig effective = cfg;
    auto& k = effective.solver.k;
    if (k == 0 && effective.synth) k = effective.synth->k;
    if (k == 0 && data.labels)
        k = static_cast<Eigen::Index>(std::set<long long>(data.labels->begin(), data.labels->end()).size());
    if (k < 1) throw ValidationError("config: k not given and cannot be inferred without labels");
    if (k > data.instances())
        throw ValidationError("config: k=" + std::to_string(k) + " exceeds instance count " +
                              std::to_string(data.instances()));

    PipelineResult res;
    const auto embeddings =
        embed_views(data, k, effective.sigma, effective.standardize, &res.sigmas);
    res.solver = in_stage("solver", [&] { return run(embeddings, effective.solver, observe); });

    res.labels = in_stage("labeling", [&] {
        return effective.label_extraction == LabelMethod::argmax
                   ? argmax_labels(res.solver.consensus.Y).labels
                   : kmeans(res.solver.consensus.Y, static_cast<int>(k), effective.solver.seed).labels;
    });

    auto& rep = res.report;
    if (data.labels)
        rep.metrics = in_stage("metrics", [&] { return evaluate(widen(res.labels), *data.labels); });
    for (const auto& v : res.solver.views) rep.view_weights.push_back(v.w);
    rep.iterations = static_cast<int>(res.solver.trace.size());
    rep.stop = res.solver.stop;
    rep.config = config_to_json(effective);
    rep.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::string format_trace_csv(const IterationTrace& trace) {
    std::string out = "iter,objective,primal_residual,mu";
    const std::size_t n = trace.empty() ? 0 : trace.front().weights.size();
    for (std::size_t v = 0; v < n; ++v) out += ",w_" + std::to_string(v + 1);
    out += '\n';
    for (const auto& r : trace) {
        out += std::to_string(r.iter);
        out += ',' + csv::format_number(r.objective);
        out += ',' + csv::format_number(r.primal_residual);
        out += ',' + csv::format_number(r.mu);
        for (double w : r.weights) out += ',' + csv::format_number(w);
        out += '\n';
    }
    return out;
}

RunReport cmd_run(const RunConfig& cfg) {
    auto res = run_pipeline(cfg);
    in_stage("output", [&] {
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        if (!fs::is_directory(cfg.output_dir))
            throw ValidationError(cfg.output_dir.string() + ": cannot create output directory");
        csv::write_atomic(cfg.output_dir / "results.json", res.report.to_json().dump(2) + "\n");
        csv::write_atomic(cfg.output_dir / "trace.csv", format_trace_csv(res.solver.trace));
        csv::write_atomic(cfg.output_dir / "labels_pred.csv", csv::format_labels(widen(res.labels)));
        return 0;
    });
    return res.report;
}

void cmd_synth(const SynthSpec& spec, const fs::path& out_dir) {
    in_stage("synth", [&] {
        spec.validate();
        write_dataset(generate_synthetic(spec), out_dir);
        return 0;
    });
}

MetricTriple cmd_eval(const fs::path& pred_file, const fs::path& truth_file) {
    return in_stage("eval", [&] {
        const auto pred = csv::read_labels(pred_file);
        const auto truth = csv::read_labels(truth_file);
        return evaluate(pred, truth);
    });
}

}  // namespace dsmc
