#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "manidyn/constitutive.hpp"
#include "manidyn/expression.hpp"

namespace manidyn {

/// Declarative description of a run: manifold, body, constitutive choice,
/// loading, initial data and discretization. Parsed from the sectioned
/// key-value text format or from the equivalent JSON encoding.
struct Scenario {
    std::string manifold = "euclidean:1";

    int body_dim = 1;
    int n = 33;
    std::string rho = "1";

    std::string lagrangian = "dirichlet";  // zero | dirichlet | svk
    double lambda = 1.0;
    double mu = 1.0;
    std::vector<std::string> reference;  // d*d entries, row major; empty = identity

    std::vector<std::string> body_load;     // m entries; empty = zero
    std::vector<std::string> surface_load;  // m entries; empty = zero

    std::vector<std::string> phi0;  // m entries
    std::vector<std::string> v0;    // m entries; empty = zero

    double dt = 0.01;
    int steps = 100;

    std::uint32_t seed = 2024;
    int eps_sweep = 6;
    int newton_iterations = 3;
    bool clamp = false;
    bool strict = false;
    std::string out_dir = ".";
};

/// Parse from file (".json" uses the JSON encoding, anything else the text
/// format). Throws ParseError on malformed input and ValidationError (with
/// every violation collected) on semantic problems.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& contents);
Scenario parse_scenario_json(const std::string& contents);

/// Validation shared by both encodings; returns the full list of problems.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Scenario resolved against the catalogs, ready to run.
struct CompiledScenario {
    std::shared_ptr<const SpaceChart> chart;
    std::shared_ptr<BodyGrid> grid;
    std::shared_ptr<const HyperelasticLagrangian> lagrangian;
    std::shared_ptr<const ConstitutiveDensity> density;
    LoadingDensity loading;
    Mat phi0;
    Mat v0;
};

CompiledScenario compile_scenario(const Scenario& s);

}  // namespace manidyn
