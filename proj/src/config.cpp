#include "regenstab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regenstab/analyzer.hpp"

namespace regenstab {

using nlohmann::json;

const char* to_string(TaskKind task) {
    switch (task) {
        case TaskKind::Analyze: return "analyze";
        case TaskKind::Sweep: return "sweep";
        case TaskKind::Simulate: return "simulate";
        case TaskKind::FloquetCheck: return "floquet-check";
    }
    return "unknown";
}

SweepRange parse_sweep_range(const std::string& text) {
    SweepRange range;
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw ValidationError("range: expected A:B:STEPS, got '" + text + "'");
    try {
        range.lo = std::stod(text.substr(0, first));
        range.hi = std::stod(text.substr(first + 1, second - first - 1));
        range.steps = std::stoi(text.substr(second + 1));
    } catch (const std::exception&) {
        throw ValidationError("range: expected numeric A:B:STEPS, got '" + text + "'");
    }
    if (!(range.lo < range.hi)) throw ValidationError("range: lower endpoint must be below upper");
    if (range.steps < 2) throw ValidationError("range: needs at least 2 grid points");
    return range;
}

namespace {

TaskKind parse_task(const std::string& name) {
    if (name == "analyze") return TaskKind::Analyze;
    if (name == "sweep") return TaskKind::Sweep;
    if (name == "simulate") return TaskKind::Simulate;
    if (name == "floquet-check") return TaskKind::FloquetCheck;
    throw ValidationError("/task: unknown task '" + name +
                          "' (expected analyze|sweep|simulate|floquet-check)");
}

Eigen::MatrixXd parse_matrix(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty())
        throw ValidationError(path + ": expected a nonempty array of rows");
    const std::size_t rows = node.size();
    std::size_t cols = 0;
    Eigen::MatrixXd M;
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = node[i];
        if (!row.is_array())
            throw ValidationError(path + "/" + std::to_string(i) + ": expected an array of numbers");
        if (i == 0) {
            cols = row.size();
            if (cols == 0) throw ValidationError(path + "/0: rows must be nonempty");
            M.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        }
        if (row.size() != cols)
            throw ValidationError(path + "/" + std::to_string(i) + ": ragged row (expected " +
                                  std::to_string(cols) + " entries)");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number())
                throw ValidationError(path + "/" + std::to_string(i) + "/" + std::to_string(j) +
                                      ": expected a number");
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return M;
}

Cycle parse_cycle_segments(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty())
        throw ValidationError(path + ": expected a nonempty array of [mode, duration] pairs");
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const json& pair = node[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
            !pair[1].is_number())
            throw ValidationError(path + "/" + std::to_string(i) +
                                  ": expected [mode, duration] with an integer mode");
        segments.push_back({pair[0].get<int>(), pair[1].get<double>()});
    }
    try {
        return make_cycle(std::move(segments));
    } catch (const ValidationError& err) {
        throw ValidationError(path + ": " + err.what());
    }
}

double require_number(const json& obj, const char* key, const std::string& path, double fallback,
                      bool present_required = false) {
    if (!obj.contains(key)) {
        if (present_required) throw ValidationError(path + "/" + key + ": required");
        return fallback;
    }
    if (!obj[key].is_number()) throw ValidationError(path + "/" + key + ": expected a number");
    return obj[key].get<double>();
}

RunConfig parse_json(const json& root) {
    if (!root.is_object()) throw ValidationError("/: expected a JSON object");
    RunConfig config;

    if (!root.contains("system") || !root["system"].is_object())
        throw ValidationError("/system: required object");
    const json& system = root["system"];
    const std::string time_kind = system.value("time_kind", std::string("continuous"));
    if (time_kind == "continuous") {
        config.time_kind = TimeKind::Continuous;
    } else if (time_kind == "discrete") {
        config.time_kind = TimeKind::Discrete;
    } else {
        throw ValidationError("/system/time_kind: expected continuous|discrete");
    }
    if (!system.contains("matrices") || !system["matrices"].is_array() || system["matrices"].empty())
        throw ValidationError("/system/matrices: required nonempty array of matrices");
    for (std::size_t s = 0; s < system["matrices"].size(); ++s)
        config.matrices.push_back(
            parse_matrix(system["matrices"][s], "/system/matrices/" + std::to_string(s)));

    if (!root.contains("model") || !root["model"].is_object())
        throw ValidationError("/model: required object");
    const json& model = root["model"];
    config.model.kind = model.value("kind", std::string(""));
    if (config.model.kind == "maintenance") {
        config.model.period = require_number(model, "T", "/model", config.model.period);
        config.model.jitter_fraction =
            require_number(model, "delta", "/model", config.model.jitter_fraction);
        config.model.failure_rate =
            require_number(model, "lambda", "/model", config.model.failure_rate);
    } else if (config.model.kind == "uniform-handoff") {
        config.model.handoff_min = require_number(model, "T", "/model", config.model.handoff_min);
    } else if (config.model.kind == "finite-support") {
        if (!model.contains("cycles") || !model["cycles"].is_array() || model["cycles"].empty())
            throw ValidationError("/model/cycles: required nonempty array");
        for (std::size_t i = 0; i < model["cycles"].size(); ++i) {
            const json& atom = model["cycles"][i];
            const std::string path = "/model/cycles/" + std::to_string(i);
            if (!atom.is_object()) throw ValidationError(path + ": expected an object");
            const double p = require_number(atom, "probability", path, 0.0, true);
            if (!atom.contains("segments"))
                throw ValidationError(path + "/segments: required");
            config.model.cycles.emplace_back(p,
                                             parse_cycle_segments(atom["segments"], path + "/segments"));
        }
    } else if (config.model.kind == "periodic") {
        if (!model.contains("segments")) throw ValidationError("/model/segments: required");
        config.model.cycles.emplace_back(1.0,
                                         parse_cycle_segments(model["segments"], "/model/segments"));
    } else {
        throw ValidationError(
            "/model/kind: expected maintenance|finite-support|periodic|uniform-handoff");
    }

    if (root.contains("m")) {
        if (!root["m"].is_number_integer() || root["m"].get<long>() < 1)
            throw ValidationError("/m: expected a positive integer");
        config.degree = root["m"].get<int>();
    }
    if (root.contains("task")) config.task = parse_task(root["task"].get<std::string>());
    if (root.contains("method")) {
        config.method = root["method"].get<std::string>();
        if (config.method != "analytic" && config.method != "monte-carlo")
            throw ValidationError("/method: expected analytic|monte-carlo");
    }
    if (root.contains("samples")) config.samples = root["samples"].get<long>();
    if (root.contains("paths")) config.paths = root["paths"].get<long>();
    config.horizon = require_number(root, "horizon", "", config.horizon);
    config.dt = require_number(root, "dt", "", config.dt);
    if (root.contains("range")) {
        if (root["range"].is_string()) {
            config.range = parse_sweep_range(root["range"].get<std::string>());
        } else if (root["range"].is_object()) {
            SweepRange range;
            range.lo = require_number(root["range"], "from", "/range", 0.0, true);
            range.hi = require_number(root["range"], "to", "/range", 0.0, true);
            range.steps = static_cast<int>(require_number(root["range"], "steps", "/range", 0.0, true));
            config.range = range;
        } else {
            throw ValidationError("/range: expected \"A:B:STEPS\" or {from, to, steps}");
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer() || root["seed"].get<long long>() < 0)
            throw ValidationError("/seed: expected a nonnegative integer");
        config.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("workers")) config.workers = root["workers"].get<int>();
    if (root.contains("positivity_assertion"))
        config.assert_positive = root["positivity_assertion"].get<bool>();
    if (root.contains("strict")) config.strict = root["strict"].get<bool>();
    if (root.contains("x0")) {
        if (!root["x0"].is_array()) throw ValidationError("/x0: expected an array of numbers");
        for (const auto& v : root["x0"]) config.x0.push_back(v.get<double>());
    }
    if (root.contains("out")) config.out_dir = root["out"].get<std::string>();
    return config;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ValidationError(std::string("config is not valid JSON: ") + err.what());
    }
    return parse_json(root);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file not readable: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

RunConfig paper_fixture() {
    RunConfig config;
    config.time_kind = TimeKind::Continuous;
    Eigen::MatrixXd A(2, 2);
    A << -0.4, 0.2, -0.1, 0.5;
    Eigen::MatrixXd B(2, 1);
    B << 0.0, 1.0;
    Eigen::MatrixXd K(1, 2);
    K << -0.1, -1.6;
    // Mode 1 is recomputed from its ingredients so the fixture cannot drift.
    config.matrices = {A + B * K, A};
    config.model.kind = "maintenance";
    config.model.period = 1.25;
    config.model.jitter_fraction = 0.1;
    config.model.failure_rate = 1.0;
    config.degree = 2;
    return config;
}

RunConfig positivity_fixture() {
    RunConfig config;
    config.time_kind = TimeKind::Continuous;
    Eigen::MatrixXd averaging(2, 2);
    averaging << 0.5, 0.5, 0.5, 0.5;
    Eigen::MatrixXd rotation(2, 2);
    rotation << 0.0, 1.0, -1.0, 0.0;
    config.matrices = {averaging, rotation};
    config.model.kind = "uniform-handoff";
    config.model.handoff_min = 1.0;
    config.degree = 2;
    return config;
}

RunConfig builtin_fixture(const std::string& name) {
    if (name == "paper") return paper_fixture();
    if (name == "positivity") return positivity_fixture();
    throw ValidationError("unknown fixture '" + name + "' (expected paper|positivity)");
}

SwitchedSystem build_system(const RunConfig& config) {
    return SwitchedSystem(config.time_kind, config.matrices);
}

std::unique_ptr<CycleModel> build_model(const ModelConfig& model) {
    if (model.kind == "maintenance")
        return std::make_unique<MaintenanceModel>(model.period, model.jitter_fraction,
                                                  model.failure_rate);
    if (model.kind == "uniform-handoff")
        return std::make_unique<UniformHandoffModel>(model.handoff_min);
    if (model.kind == "finite-support" || model.kind == "periodic")
        return std::make_unique<FiniteSupportModel>(model.cycles);
    throw ValidationError("/model/kind: unknown model kind '" + model.kind + "'");
}

Eigen::VectorXd initial_state(const RunConfig& config) {
    const int n = config.matrices.empty() ? 0 : static_cast<int>(config.matrices.front().rows());
    if (!config.x0.empty()) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(config.x0.size()));
        for (std::size_t i = 0; i < config.x0.size(); ++i)
            x(static_cast<Eigen::Index>(i)) = config.x0[i];
        return x;
    }
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    return x / x.norm();
}

PositivityAssertion positivity_assertion(const RunConfig& config) {
    return config.assert_positive ? PositivityAssertion::UserAssertedPositive
                                  : PositivityAssertion::None;
}

ValidationReport validate_config(const RunConfig& config) {
    ValidationReport report;
    auto fail = [&](const std::string& message) {
        report.ok = false;
        report.errors.push_back(message);
    };

    std::optional<SwitchedSystem> system;
    try {
        system.emplace(build_system(config));
    } catch (const ValidationError& err) {
        fail(err.what());
    }
    std::unique_ptr<CycleModel> model;
    try {
        model = build_model(config.model);
    } catch (const ValidationError& err) {
        fail(err.what());
    }
    if (config.degree < 1) fail("/m: degree must be >= 1");
    try {
        if (system) (void)lift_dimension(system->dimension(), config.degree);
    } catch (const ValidationError& err) {
        fail(std::string("/m: ") + err.what());
    }
    if (model && system) {
        if (const auto* finite = dynamic_cast<const FiniteSupportModel*>(model.get())) {
            for (std::size_t i = 0; i < finite->atoms().size(); ++i) {
                try {
                    validate_cycle(finite->atoms()[i].second, system->time_kind());
                    for (const auto& seg : finite->atoms()[i].second.segments)
                        (void)system->mode_matrix(seg.mode);
                } catch (const ValidationError& err) {
                    fail("/model/cycles/" + std::to_string(i) + ": " + err.what());
                }
            }
        }
        if ((config.model.kind == "maintenance" || config.model.kind == "uniform-handoff") &&
            system->mode_count() < 2)
            fail("/system/matrices: two-mode model needs at least two matrices");
        if ((config.model.kind == "maintenance" || config.model.kind == "uniform-handoff") &&
            system->time_kind() == TimeKind::Discrete)
            fail("/system/time_kind: this model kind is continuous-time");
    }
    const bool randomized =
        config.task == TaskKind::Simulate ||
        (config.task == TaskKind::Analyze && config.method == "monte-carlo");
    if (randomized && !config.seed)
        fail("/seed: required for randomized tasks (no wall-clock default)");
    if (config.task == TaskKind::Sweep && !config.range) fail("/range: required for the sweep task");
    if (config.task == TaskKind::Sweep && config.model.kind != "maintenance")
        fail("/task: sweep is defined for the maintenance model family (parameter T)");
    if (config.task == TaskKind::FloquetCheck && config.model.kind != "periodic")
        fail("/task: floquet-check needs a periodic (single-cycle) model");
    if (config.samples < 2) fail("/samples: needs at least 2");
    if (config.paths < 2) fail("/paths: needs at least 2");
    if (!(config.dt > 0.0)) fail("/dt: must be positive");
    if (!(config.horizon > 0.0)) fail("/horizon: must be positive");
    if (config.workers < 1) fail("/workers: must be >= 1");
    if (!config.x0.empty() && system &&
        static_cast<int>(config.x0.size()) != system->dimension())
        fail("/x0: dimension mismatch with the system");

    if (system && model) {
        const AssumptionReport assumptions =
            check_assumptions(*system, *model, config.degree, positivity_assertion(config));
        std::ostringstream summary;
        summary << "A1 (even degree or positive system): " << to_string(assumptions.even_or_positive.status)
                << " -- " << assumptions.even_or_positive.detail << '\n'
                << "A2 (essentially bounded cycles): " << to_string(assumptions.bounded_cycles.status)
                << " -- " << assumptions.bounded_cycles.detail << '\n'
                << "A3 (bounded mode set): " << to_string(assumptions.bounded_modes.status) << " -- "
                << assumptions.bounded_modes.detail << '\n'
                << "A4 (invertible modes, discrete): " << to_string(assumptions.invertible_modes.status)
                << " -- " << assumptions.invertible_modes.detail << '\n';
        report.assumption_summary = summary.str();
    }
    return report;
}

}  // namespace regenstab
