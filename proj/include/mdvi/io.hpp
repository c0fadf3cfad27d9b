#pragma once

#include "mdvi/bounds.hpp"
#include "mdvi/garnet.hpp"
#include "mdvi/schemes.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace mdvi {

using json = nlohmann::json;

/// Shortest round-trip decimal rendering, locale-independent.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline json flat_json(const Eigen::MatrixXd& table) {
    json arr = json::array();
    for (Eigen::Index r = 0; r < table.rows(); ++r)
        for (Eigen::Index c = 0; c < table.cols(); ++c) arr.push_back(table(r, c));
    return arr;
}

inline Eigen::MatrixXd matrix_from_flat(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                        const char* what) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw std::invalid_argument(std::string(what) + ": flat array has wrong length");
    Eigen::MatrixXd out(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = arr[i++].get<double>();
    return out;
}

}  // namespace detail

// ---- TabularMdp <-> JSON --------------------------------------------------

inline json to_json(const TabularMdp& mdp) {
    return json{{"num_states", mdp.num_states},
                {"num_actions", mdp.num_actions},
                {"discount", mdp.discount},
                {"r_max", mdp.r_max},
                {"reward", detail::flat_json(mdp.reward)},
                {"kernel", detail::flat_json(mdp.kernel)}};
}

inline TabularMdp mdp_from_json(const json& j) {
    TabularMdp mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.discount = j.at("discount").get<double>();
    mdp.r_max = j.at("r_max").get<double>();
    mdp.reward = detail::matrix_from_flat(j.at("reward"), mdp.num_states, mdp.num_actions,
                                          "mdp reward");
    mdp.kernel = detail::matrix_from_flat(
        j.at("kernel"), static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions,
        mdp.num_states, "mdp kernel");
    validate(mdp);
    return mdp;
}

// ---- enums and configs ----------------------------------------------------

inline Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::MD, Variant::DA, Variant::AVI, Variant::CVI, Variant::DPP,
                      Variant::SQL, Variant::MoVI, Variant::MomentumVI,
                      Variant::AdvantageLearning})
        if (name == variant_name(v)) return v;
    throw std::invalid_argument("unknown variant name: " + name);
}

inline const char* error_model_name(ErrorModel m) {
    switch (m) {
        case ErrorModel::None: return "none";
        case ErrorModel::GenerativeSample: return "generative_sample";
        case ErrorModel::AdditiveGaussian: return "additive_gaussian";
    }
    return "?";
}

inline ErrorModel error_model_from_name(const std::string& name) {
    for (ErrorModel m :
         {ErrorModel::None, ErrorModel::GenerativeSample, ErrorModel::AdditiveGaussian})
        if (name == error_model_name(m)) return m;
    throw std::invalid_argument("unknown error model: " + name);
}

inline json to_json(const SchemeConfig& cfg) {
    json j{{"variant", variant_name(cfg.variant)},
           {"lambda", cfg.lambda},
           {"tau", cfg.tau},
           {"m", cfg.m == kEvalInfinity ? json("infinity") : json(cfg.m)},
           {"regularized_evaluation", cfg.regularized_evaluation},
           {"clip_q", cfg.clip_q},
           {"iterations", cfg.iterations},
           {"error_model", error_model_name(cfg.error_model)},
           {"noise_sigma", cfg.noise_sigma},
           {"record_trace", cfg.record_trace},
           {"id", cfg.id}};
    if (cfg.beta_override) j["beta_override"] = *cfg.beta_override;
    if (cfg.initial_q)
        j["initial_q"] = json{{"rows", cfg.initial_q->rows()},
                              {"cols", cfg.initial_q->cols()},
                              {"data", detail::flat_json(*cfg.initial_q)}};
    return j;
}

inline SchemeConfig scheme_from_json(const json& j) {
    SchemeConfig cfg;
    cfg.variant = variant_from_name(j.at("variant").get<std::string>());
    cfg.lambda = j.value("lambda", 0.0);
    cfg.tau = j.value("tau", 0.0);
    if (j.contains("beta_override") && !j["beta_override"].is_null())
        cfg.beta_override = j["beta_override"].get<double>();
    if (j.contains("m")) {
        if (j["m"].is_string()) {
            if (j["m"].get<std::string>() != "infinity")
                throw std::invalid_argument("scheme config: m must be an integer or \"infinity\"");
            cfg.m = kEvalInfinity;
        } else {
            cfg.m = j["m"].get<int>();
        }
    }
    cfg.regularized_evaluation = j.value("regularized_evaluation", true);
    cfg.clip_q = j.value("clip_q", false);
    cfg.iterations = j.value("iterations", 1);
    cfg.error_model = error_model_from_name(j.value("error_model", std::string("none")));
    cfg.noise_sigma = j.value("noise_sigma", 0.0);
    cfg.record_trace = j.value("record_trace", true);
    cfg.id = j.value("id", std::string());
    if (j.contains("initial_q") && !j["initial_q"].is_null()) {
        const json& init = j["initial_q"];
        cfg.initial_q = detail::matrix_from_flat(init.at("data"), init.at("rows").get<int>(),
                                                 init.at("cols").get<int>(), "scheme initial_q");
    }
    validate(cfg);
    return cfg;
}

inline json to_json(const GarnetParams& params) {
    return json{{"num_states", params.num_states},
                {"num_actions", params.num_actions},
                {"branching", params.branching},
                {"reward_fraction", params.reward_fraction},
                {"discount", params.discount}};
}

inline GarnetParams garnet_from_json(const json& j) {
    GarnetParams params;
    params.num_states = j.at("num_states").get<int>();
    params.num_actions = j.at("num_actions").get<int>();
    params.branching = j.at("branching").get<int>();
    params.reward_fraction = j.value("reward_fraction", 0.1);
    params.discount = j.value("discount", 0.9);
    validate(params);
    return params;
}

// ---- run traces (JSON lines) ----------------------------------------------

/// One record per iteration {k, q?, h?, psi?, policy, epsilon, metrics},
/// preceded by a header line {mdp, config}. Tables are flat row-major.
inline void write_trace(const RunTrace& trace, std::ostream& out,
                        const std::map<std::string, std::vector<double>>& metrics = {}) {
    if (!trace.config.record_trace)
        throw std::invalid_argument("write_trace: trace was run without table recording");
    out << json{{"mdp", to_json(trace.mdp)}, {"config", to_json(trace.config)}}.dump() << '\n';
    const int iterations = trace.config.iterations;
    for (int k = 0; k <= iterations; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        json rec{{"k", k}, {"policy", detail::flat_json(trace.policies[idx].probs)}};
        if (!trace.q.empty()) rec["q"] = detail::flat_json(trace.q[idx]);
        if (!trace.h.empty()) rec["h"] = detail::flat_json(trace.h[idx]);
        if (!trace.psi.empty()) rec["psi"] = detail::flat_json(trace.psi[idx]);
        rec["epsilon"] = detail::flat_json(trace.epsilon[idx]);
        json m = json::object();
        for (const auto& [name, values] : metrics)
            if (idx < values.size()) m[name] = values[idx];
        rec["metrics"] = m;
        out << rec.dump() << '\n';
    }
}

inline void write_trace_file(const RunTrace& trace, const std::string& path,
                             const std::map<std::string, std::vector<double>>& metrics = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace: cannot open " + path);
    write_trace(trace, out, metrics);
}

inline RunTrace read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("read_trace: empty stream");
    json header = json::parse(line);
    if (!header.contains("mdp") || !header.contains("config"))
        throw std::invalid_argument("read_trace: missing {mdp, config} header line");
    RunTrace trace;
    trace.mdp = mdp_from_json(header["mdp"]);
    trace.config = scheme_from_json(header["config"]);
    const Eigen::Index S = trace.mdp.num_states, A = trace.mdp.num_actions;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        trace.policies.push_back(
            Policy{detail::matrix_from_flat(rec.at("policy"), S, A, "trace policy")});
        if (rec.contains("q")) trace.q.push_back(detail::matrix_from_flat(rec["q"], S, A, "trace q"));
        if (rec.contains("h")) trace.h.push_back(detail::matrix_from_flat(rec["h"], S, A, "trace h"));
        if (rec.contains("psi"))
            trace.psi.push_back(detail::matrix_from_flat(rec["psi"], S, A, "trace psi"));
        trace.epsilon.push_back(detail::matrix_from_flat(rec.at("epsilon"), S, A, "trace epsilon"));
    }
    if (trace.policies.size() != static_cast<std::size_t>(trace.config.iterations) + 1)
        throw std::invalid_argument("read_trace: record count does not match iterations");
    return trace;
}

inline RunTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace: cannot open " + path);
    return read_trace(in);
}

// ---- bound reports ----------------------------------------------------------

/// Per-check scalars only; the full lhs/rhs/slack tables stay in memory.
inline json to_json(const BoundReport& report) {
    json checks = json::array();
    for (const BoundCheck& c : report.checks)
        checks.push_back(json{{"k", c.k},
                              {"min_slack", c.min_slack},
                              {"certified", c.certified},
                              {"rate", c.rate},
                              {"linf_lhs", c.linf_lhs},
                              {"linf_rhs", c.linf_rhs}});
    return json{{"theorem", report.theorem},   {"atol", report.atol},
                {"certified", report.certified}, {"min_slack", report.min_slack},
                {"lhs_nonnegative", report.lhs_nonnegative}, {"checks", checks}};
}

}  // namespace mdvi
