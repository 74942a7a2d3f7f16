#pragma once

#include "agemdp/model.hpp"
#include "agemdp/sim.hpp"
#include "agemdp/solvers.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace agemdp {

struct TwoPointDelay {
    double p = 0.5;
    int y_low = 1;
    int y_high = 10;

    friend bool operator==(const TwoPointDelay&, const TwoPointDelay&) = default;
};

struct ModelSection {
    std::vector<Matrix> kernels;
    Matrix cost;
    std::optional<DelayPmf> delay;           // explicit support/probs form
    std::optional<TwoPointDelay> two_point;  // shorthand form
    int z_max = 20;

    /// Expands the delay shorthand; does not validate.
    RawModel to_raw() const;
};

enum class Algorithm { BisecMrvi, Fpbi };

const char* to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

struct SolverSection {
    Algorithm algorithm = Algorithm::Fpbi;
    SolverOptions options;
};

struct SweepSection {
    std::vector<double> p_values;
};

struct OutputSection {
    std::string dir = "out";
};

struct ExperimentConfig {
    ModelSection model;
    SolverSection solver;
    SimConfig sim;
    SweepSection sweep;
    OutputSection output;

    MarkovControlModel validated_model() const { return validate_model(model.to_raw()); }
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation };

    ConfigError(Kind kind, const std::string& field, int line, const std::string& message);

    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }
    int line() const { return line_; }  // 1-based; 0 when unknown

private:
    Kind kind_;
    std::string field_;
    int line_;
};

/// Parses a YAML experiment description. Dimension checks and all model
/// invariants are enforced here; failures carry the offending field and line.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Emits a config that parses back to an identical ExperimentConfig.
std::string emit_config(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// "lo:hi:step" inclusive grid, e.g. "0.1:0.9:0.1" gives nine points.
std::vector<double> parse_p_grid(const std::string& text);

}  // namespace agemdp
