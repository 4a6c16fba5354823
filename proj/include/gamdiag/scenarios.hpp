#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gamdiag/dataset.hpp"

namespace gamdiag {

enum class ScenarioId { WellSpecified, MeanMiss, VarMiss, SkewMiss, KurtMiss, SurfaceDemo };

std::string_view to_string(ScenarioId id);
/// ConfigError for unknown ids.
ScenarioId parse_scenario_id(std::string_view text);
std::vector<std::string> scenario_ids();

/// shash (mu, sigma, eps, delta) as functions of the covariate.
struct ShashParams {
    double mu = 0.0;
    double sigma = 1.0;
    double eps = 0.0;
    double delta = 1.0;
};

inline constexpr double kScenarioXMin = -3.5;
inline constexpr double kScenarioXMax = 3.5;

ShashParams truth_params(ScenarioId id, double x);
ShashParams model_params(ScenarioId id, double x);

/// Declared substitute smooth for the uncertainty demo.
double surface_demo_f(double x, double z);
inline constexpr double kSurfaceDemoSigma = 2.0;
inline constexpr std::array<std::size_t, 2> kSurfaceDemoSizes{200, 100000};

struct ScenarioInfo {
    ScenarioId id = ScenarioId::WellSpecified;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string family;   ///< family the model columns belong to
    std::string channel;  ///< misspecified parameter ("none" when correct)
    std::string truth;    ///< human-readable generating functions
    std::string model;
};

struct Scenario {
    Dataset dataset;
    ScenarioInfo info;
};

/// Same (id, n, seed) gives a bit-identical dataset whatever `threads` is:
/// rows are generated in fixed blocks, each from its own derived stream.
/// Columns: y, x, x2, mu, sigma, eps, delta (shash model parameters), or for
/// surface_demo y, x, z, mu, sigma (gaussian with the true mean).
Scenario generate(ScenarioId id, std::size_t n, std::uint64_t seed, std::size_t threads = 0);
Scenario generate(std::string_view id, std::size_t n, std::uint64_t seed, std::size_t threads = 0);

}  // namespace gamdiag
