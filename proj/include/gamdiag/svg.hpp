#pragma once

#include <string>

#include "gamdiag/density.hpp"
#include "gamdiag/effect.hpp"
#include "gamdiag/grid_checks.hpp"
#include "gamdiag/qq.hpp"

// Minimal static SVG output for headless use: lines, bands and heatmap rasters.
namespace gamdiag::svg {

std::string render(const BinnedQQ& qq);
std::string render(const SummarySeries& series);
std::string render(const HexSummaryGrid& grid);
std::string render(const GlyphGrid& grid);
std::string render(const DensityField& field);
/// Heatmap of f̂; opacity and perturbed modes use the matching matrix.
std::string render(const EffectSurface& surf, const std::string& mode);

}  // namespace gamdiag::svg
