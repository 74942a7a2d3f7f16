#include "agemdp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "agemdp/csv.hpp"

namespace agemdp {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

[[noreturn]] void fail(ConfigError::Kind kind, const std::string& field, const YAML::Node& node, const std::string& msg) {
    throw ConfigError(kind, field, line_of(node), msg);
}

[[noreturn]] void parse_fail(const std::string& field, const YAML::Node& node, const std::string& msg) {
    fail(ConfigError::Kind::Parse, field, node, msg);
}

[[noreturn]] void validation_fail(const std::string& field, const YAML::Node& node, const std::string& msg) {
    fail(ConfigError::Kind::Validation, field, node, msg);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) parse_fail(field, node, "expected a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        parse_fail(field, node, "cannot convert '" + node.Scalar() + "'");
    }
}

void reject_unknown_keys(const YAML::Node& map, const std::string& section, std::initializer_list<const char*> known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) parse_fail(section + "." + key, kv.first, "unknown key");
    }
}

YAML::Node require_map(const YAML::Node& node, const std::string& field) {
    if (!node.IsMap()) parse_fail(field, node, "expected a mapping");
    return node;
}

std::vector<double> flatten_numbers(const YAML::Node& node, const std::string& field, std::size_t& rows) {
    if (!node.IsSequence()) parse_fail(field, node, "expected a sequence");
    std::vector<double> out;
    rows = 0;
    bool nested = node.size() > 0 && node[0].IsSequence();
    std::size_t width = 0;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const YAML::Node item = node[i];
        if (nested) {
            if (!item.IsSequence()) parse_fail(field, item, "mixed nested and flat rows");
            if (i == 0) width = item.size();
            if (item.size() != width) {
                validation_fail(field, item, "row " + std::to_string(i) + " has " + std::to_string(item.size()) +
                                                 " entries, expected " + std::to_string(width));
            }
            for (const auto& v : item) out.push_back(scalar<double>(v, field));
            ++rows;
        } else {
            out.push_back(scalar<double>(item, field));
        }
    }
    return out;
}

Matrix square_matrix(const YAML::Node& node, const std::string& field) {
    std::size_t rows = 0;
    const std::vector<double> values = flatten_numbers(node, field, rows);
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (n == 0 || n * n != values.size() || (rows != 0 && rows != n)) {
        validation_fail(field, node, "transition kernel must be a non-empty square matrix");
    }
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * n + j];
    return m;
}

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc{} ? std::string(buf, end) : std::string(".nan");
}

ModelSection parse_model(const YAML::Node& node) {
    require_map(node, "model");
    reject_unknown_keys(node, "model", {"kernels", "cost", "delay", "delay_two_point", "z_max"});
    ModelSection model;

    const YAML::Node kernels = node["kernels"];
    if (!kernels) parse_fail("model.kernels", node, "missing");
    if (!kernels.IsSequence() || kernels.size() == 0) parse_fail("model.kernels", kernels, "expected a list of matrices");
    for (std::size_t a = 0; a < kernels.size(); ++a) {
        const std::string field = "model.kernels[" + std::to_string(a) + "]";
        model.kernels.push_back(square_matrix(kernels[a], field));
        if (model.kernels.back().rows() != model.kernels.front().rows()) {
            validation_fail(field, kernels[a], "kernel size differs from kernel 0");
        }
    }
    const auto n_states = model.kernels.front().rows();
    const auto n_actions = static_cast<Eigen::Index>(model.kernels.size());

    const YAML::Node cost = node["cost"];
    if (!cost) parse_fail("model.cost", node, "missing");
    std::size_t rows = 0;
    const std::vector<double> c = flatten_numbers(cost, "model.cost", rows);
    if (static_cast<Eigen::Index>(c.size()) != n_states * n_actions) {
        validation_fail("model.cost", cost,
                        "cost table has " + std::to_string(c.size()) + " entries, expected |S|*|A| = " +
                            std::to_string(n_states * n_actions));
    }
    model.cost.resize(n_states, n_actions);
    for (Eigen::Index s = 0; s < n_states; ++s)
        for (Eigen::Index a = 0; a < n_actions; ++a) model.cost(s, a) = c[static_cast<std::size_t>(s * n_actions + a)];

    const YAML::Node delay = node["delay"];
    const YAML::Node two_point = node["delay_two_point"];
    if (delay && two_point) validation_fail("model.delay", delay, "give exactly one of delay and delay_two_point");
    if (!delay && !two_point) validation_fail("model.delay", node, "give exactly one of delay and delay_two_point");
    if (delay) {
        require_map(delay, "model.delay");
        reject_unknown_keys(delay, "model.delay", {"support", "probs"});
        DelayPmf pmf;
        if (!delay["support"] || !delay["probs"]) parse_fail("model.delay", delay, "needs support and probs");
        if (!delay["support"].IsSequence() || !delay["probs"].IsSequence())
            parse_fail("model.delay", delay, "support and probs must be sequences");
        for (const auto& v : delay["support"]) pmf.support.push_back(scalar<int>(v, "model.delay.support"));
        for (const auto& v : delay["probs"]) pmf.probs.push_back(scalar<double>(v, "model.delay.probs"));
        model.delay = std::move(pmf);
    } else {
        require_map(two_point, "model.delay_two_point");
        reject_unknown_keys(two_point, "model.delay_two_point", {"p", "y_low", "y_high"});
        TwoPointDelay tp;
        for (const char* key : {"p", "y_low", "y_high"}) {
            if (!two_point[key]) parse_fail(std::string("model.delay_two_point.") + key, two_point, "missing");
        }
        tp.p = scalar<double>(two_point["p"], "model.delay_two_point.p");
        tp.y_low = scalar<int>(two_point["y_low"], "model.delay_two_point.y_low");
        tp.y_high = scalar<int>(two_point["y_high"], "model.delay_two_point.y_high");
        if (!(tp.p > 0.0 && tp.p <= 1.0)) validation_fail("model.delay_two_point.p", two_point["p"], "p must lie in (0, 1]");
        if (tp.y_low >= tp.y_high) validation_fail("model.delay_two_point", two_point, "need y_low < y_high");
        model.two_point = tp;
    }

    if (node["z_max"]) model.z_max = scalar<int>(node["z_max"], "model.z_max");

    try {
        validate_model(model.to_raw());
    } catch (const ModelValidationError& e) {
        validation_fail("model", node, e.what());
    }
    return model;
}

SolverSection parse_solver(const YAML::Node& node) {
    require_map(node, "solver");
    reject_unknown_keys(node, "solver", {"algorithm", "epsilon", "tol", "damping", "max_sweeps"});
    SolverSection s;
    if (node["algorithm"]) {
        try {
            s.algorithm = parse_algorithm(scalar<std::string>(node["algorithm"], "solver.algorithm"));
        } catch (const std::invalid_argument& e) {
            validation_fail("solver.algorithm", node["algorithm"], e.what());
        }
    }
    if (node["epsilon"]) s.options.epsilon = scalar<double>(node["epsilon"], "solver.epsilon");
    if (node["tol"]) s.options.tol = scalar<double>(node["tol"], "solver.tol");
    if (node["damping"]) s.options.damping = scalar<double>(node["damping"], "solver.damping");
    if (node["max_sweeps"]) s.options.max_sweeps = scalar<std::size_t>(node["max_sweeps"], "solver.max_sweeps");
    if (!(s.options.epsilon > 0.0)) validation_fail("solver.epsilon", node["epsilon"], "must be positive");
    if (!(s.options.tol > 0.0)) validation_fail("solver.tol", node["tol"], "must be positive");
    if (!(s.options.damping > 0.0 && s.options.damping <= 1.0))
        validation_fail("solver.damping", node["damping"], "must lie in (0, 1]");
    return s;
}

SimConfig parse_sim(const YAML::Node& node) {
    require_map(node, "sim");
    reject_unknown_keys(node, "sim", {"horizon", "seed", "burn_in", "initial_state", "initial_age"});
    SimConfig s;
    if (node["horizon"]) s.horizon = scalar<std::uint64_t>(node["horizon"], "sim.horizon");
    if (node["seed"]) s.seed = scalar<std::uint64_t>(node["seed"], "sim.seed");
    if (node["burn_in"]) s.burn_in = scalar<std::uint64_t>(node["burn_in"], "sim.burn_in");
    if (node["initial_state"]) s.initial_state = scalar<std::size_t>(node["initial_state"], "sim.initial_state");
    if (node["initial_age"]) s.initial_age = scalar<int>(node["initial_age"], "sim.initial_age");
    if (s.horizon <= s.effective_burn_in()) validation_fail("sim.horizon", node, "horizon must exceed burn_in");
    return s;
}

SweepSection parse_sweep(const YAML::Node& node) {
    require_map(node, "sweep");
    reject_unknown_keys(node, "sweep", {"p", "p_grid"});
    SweepSection s;
    if (node["p"] && node["p_grid"]) validation_fail("sweep", node, "give either p or p_grid, not both");
    if (node["p"]) {
        if (!node["p"].IsSequence()) parse_fail("sweep.p", node["p"], "expected a sequence");
        for (const auto& v : node["p"]) s.p_values.push_back(scalar<double>(v, "sweep.p"));
    } else if (node["p_grid"]) {
        try {
            s.p_values = parse_p_grid(scalar<std::string>(node["p_grid"], "sweep.p_grid"));
        } catch (const std::invalid_argument& e) {
            validation_fail("sweep.p_grid", node["p_grid"], e.what());
        }
    }
    for (double p : s.p_values) {
        if (!(p > 0.0 && p <= 1.0)) validation_fail("sweep.p", node, "p values must lie in (0, 1]");
    }
    return s;
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << YAML::Flow << YAML::BeginSeq;
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << shortest(m(i, j));
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
}

}  // namespace

ConfigError::ConfigError(Kind kind, const std::string& field, int line, const std::string& message)
    : std::runtime_error((kind == Kind::Parse ? "parse error" : "validation error") +
                         (line > 0 ? " at line " + std::to_string(line) : std::string()) + " in '" + field +
                         "': " + message),
      kind_(kind),
      field_(field),
      line_(line) {}

RawModel ModelSection::to_raw() const {
    RawModel raw{kernels, cost, {}, z_max};
    if (delay) raw.delay = *delay;
    if (two_point) raw.delay = DelayPmf::two_point(two_point->p, two_point->y_low, two_point->y_high);
    return raw;
}

const char* to_string(Algorithm algorithm) {
    return algorithm == Algorithm::BisecMrvi ? "bisec-mrvi" : "fpbi";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "bisec-mrvi") return Algorithm::BisecMrvi;
    if (name == "fpbi") return Algorithm::Fpbi;
    throw std::invalid_argument("unknown algorithm '" + name + "' (expected bisec-mrvi or fpbi)");
}

ExperimentConfig parse_config_text(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(ConfigError::Kind::Parse, "<document>", e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) throw ConfigError(ConfigError::Kind::Parse, "<document>", 1, "top level must be a mapping");
    reject_unknown_keys(root, "<document>", {"model", "solver", "sim", "sweep", "output"});

    ExperimentConfig cfg;
    if (!root["model"]) throw ConfigError(ConfigError::Kind::Parse, "model", 0, "missing model section");
    cfg.model = parse_model(root["model"]);
    if (root["solver"]) cfg.solver = parse_solver(root["solver"]);
    if (root["sim"]) cfg.sim = parse_sim(root["sim"]);
    if (root["sweep"]) cfg.sweep = parse_sweep(root["sweep"]);
    if (root["output"]) {
        const YAML::Node out = require_map(root["output"], "output");
        reject_unknown_keys(out, "output", {"dir"});
        if (out["dir"]) cfg.output.dir = scalar<std::string>(out["dir"], "output.dir");
    }
    if (cfg.sim.initial_state >= static_cast<std::size_t>(cfg.model.cost.rows())) {
        validation_fail("sim.initial_state", root["sim"], "initial source state out of range");
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::Parse, path, 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kernels" << YAML::Value << YAML::BeginSeq;
    for (const auto& k : cfg.model.kernels) emit_matrix(out, k);
    out << YAML::EndSeq;
    out << YAML::Key << "cost" << YAML::Value;
    emit_matrix(out, cfg.model.cost);
    if (cfg.model.delay) {
        out << YAML::Key << "delay" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "support" << YAML::Value << YAML::Flow << cfg.model.delay->support;
        out << YAML::Key << "probs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double p : cfg.model.delay->probs) out << shortest(p);
        out << YAML::EndSeq << YAML::EndMap;
    }
    if (cfg.model.two_point) {
        out << YAML::Key << "delay_two_point" << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "p" << YAML::Value << shortest(cfg.model.two_point->p);
        out << YAML::Key << "y_low" << YAML::Value << cfg.model.two_point->y_low;
        out << YAML::Key << "y_high" << YAML::Value << cfg.model.two_point->y_high;
        out << YAML::EndMap;
    }
    out << YAML::Key << "z_max" << YAML::Value << cfg.model.z_max;
    out << YAML::EndMap;

    const SolverOptions& o = cfg.solver.options;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "algorithm" << YAML::Value << to_string(cfg.solver.algorithm);
    out << YAML::Key << "epsilon" << YAML::Value << shortest(o.epsilon);
    out << YAML::Key << "tol" << YAML::Value << shortest(o.tol);
    out << YAML::Key << "damping" << YAML::Value << shortest(o.damping);
    out << YAML::Key << "max_sweeps" << YAML::Value << o.max_sweeps;
    out << YAML::EndMap;

    out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "horizon" << YAML::Value << cfg.sim.horizon;
    out << YAML::Key << "seed" << YAML::Value << cfg.sim.seed;
    if (cfg.sim.burn_in) out << YAML::Key << "burn_in" << YAML::Value << *cfg.sim.burn_in;
    out << YAML::Key << "initial_state" << YAML::Value << cfg.sim.initial_state;
    if (cfg.sim.initial_age) out << YAML::Key << "initial_age" << YAML::Value << *cfg.sim.initial_age;
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "p" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double p : cfg.sweep.p_values) out << shortest(p);
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << cfg.output.dir;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    auto same_delay = [](const std::optional<DelayPmf>& x, const std::optional<DelayPmf>& y) {
        if (x.has_value() != y.has_value()) return false;
        return !x || (x->support == y->support && x->probs == y->probs);
    };
    if (a.model.kernels.size() != b.model.kernels.size()) return false;
    for (std::size_t i = 0; i < a.model.kernels.size(); ++i) {
        if (a.model.kernels[i].rows() != b.model.kernels[i].rows() || a.model.kernels[i] != b.model.kernels[i]) return false;
    }
    const auto& so = a.solver.options;
    const auto& to = b.solver.options;
    return a.model.cost.rows() == b.model.cost.rows() && a.model.cost.cols() == b.model.cost.cols() &&
           a.model.cost == b.model.cost && same_delay(a.model.delay, b.model.delay) &&
           a.model.two_point == b.model.two_point && a.model.z_max == b.model.z_max &&
           a.solver.algorithm == b.solver.algorithm && so.epsilon == to.epsilon && so.tol == to.tol &&
           so.damping == to.damping && so.max_sweeps == to.max_sweeps && a.sim.horizon == b.sim.horizon &&
           a.sim.seed == b.sim.seed && a.sim.burn_in == b.sim.burn_in && a.sim.initial_state == b.sim.initial_state &&
           a.sim.initial_age == b.sim.initial_age && a.sweep.p_values == b.sweep.p_values &&
           a.output.dir == b.output.dir;
}

std::vector<double> parse_p_grid(const std::string& text) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
        throw std::invalid_argument("p grid must look like LO:HI:STEP, got '" + text + "'");
    }
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("p grid needs STEP > 0 and HI >= LO");
    std::vector<double> grid;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) {
        // Round to 12 digits so 0.1:0.9:0.1 yields 0.3 rather than 0.30000000000000004.
        const double v = lo + static_cast<double>(k) * step;
        const std::string text = format_number(v);
        double rounded = v;
        std::from_chars(text.data(), text.data() + text.size(), rounded);
        grid.push_back(rounded);
    }
    return grid;
}

}  // namespace agemdp
