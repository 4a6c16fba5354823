#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "gamdiag/density.hpp"
#include "gamdiag/effect.hpp"
#include "gamdiag/error.hpp"
#include "gamdiag/grid_checks.hpp"
#include "gamdiag/qq.hpp"

// Versioned JSON payloads shared by the CLI and the HTTP service. Every
// document carries "v": 1 and a "kind" tag; NaN is written as null.
namespace gamdiag {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

Json to_json(const BinnedQQ& qq);
Json to_json(const SummarySeries& series);
Json to_json(const HexSummaryGrid& grid);
Json to_json(const GlyphGrid& grid);
Json to_json(const DensityField& field);

/// `mode` is "opacity", "perturb" or "plain"; matrices present on the
/// surface are included. `ci_k` adds fhat -/+ k sqrt(vhat) matrices.
Json to_json(const EffectSurface& surf, const std::string& mode,
             std::optional<std::uint64_t> seed = std::nullopt, double ci_k = 2.0);

Json error_json(const std::string& code, const std::string& message, const std::string& param = {});
Json error_json(const Error& e);

/// Compact serialisation used for files and HTTP bodies.
std::string dump(const Json& j);

}  // namespace gamdiag
