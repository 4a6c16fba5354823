#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gamdiag/dataset.hpp"
#include "gamdiag/distributions.hpp"

namespace gamdiag {

enum class ResidualType { Uniform, Quantile, Pearson, Deviance };
enum class Reference { Uniform, Normal, SimulationOnly };

std::string_view to_string(ResidualType type);
std::string_view to_string(Reference ref);
ResidualType parse_residual_type(std::string_view text);
Reference reference_of(ResidualType type);

/// Lower clip applied to F_m (and 1 - F_m) before Phi^{-1}.
inline constexpr double kQuantileClip = 1e-12;

struct ResidualVector {
    std::vector<double> values;
    ResidualType type = ResidualType::Quantile;
    Reference reference = Reference::Normal;
    /// Rows whose F_m hit the [clip, 1 - clip] bounds (quantile type only).
    std::size_t clip_count = 0;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return values.size(); }
};

/// l x n residual matrix, one row per simulated response vector.
struct SimulatedResiduals {
    std::size_t replicates = 0;
    std::size_t n = 0;
    ResidualType type = ResidualType::Quantile;
    std::uint64_t seed = 0;
    /// True once every row has been sorted ascending (order statistics).
    bool rows_sorted = false;
    std::vector<double> values;

    std::span<const double> row(std::size_t v) const {
        return std::span<const double>(values).subspan(v * n, n);
    }
    std::span<double> row(std::size_t v) { return std::span<double>(values).subspan(v * n, n); }
};

/// Per-row model parameters resolved against a family's parameter order.
class ModelColumns {
public:
    /// `param_map` maps family parameter name -> dataset column; names not
    /// in the map are looked up verbatim. Throws SchemaError when a
    /// parameter column is missing.
    ModelColumns(const Dataset& ds, const Family& family,
                 const std::map<std::string, std::string>& param_map = {});
    ModelColumns(const Family& family, std::vector<std::span<const double>> params);

    const Family& family() const noexcept { return *family_; }
    std::size_t rows() const noexcept { return rows_; }
    Theta theta(std::size_t i) const {
        Theta t{};
        for (std::size_t k = 0; k < params_.size(); ++k) t[k] = params_[k][i];
        return t;
    }

private:
    const Family* family_;
    std::vector<std::span<const double>> params_;
    std::size_t rows_ = 0;
};

ResidualVector transform(std::span<const double> y, const ModelColumns& model, ResidualType type);
ResidualVector transform(const Dataset& ds, const Family& family, ResidualType type,
                         const std::map<std::string, std::string>& param_map = {});

/// Draws `replicates` response vectors under the fitted parameters and maps
/// each through the same transform. Replicate v uses rng stream (seed, v), so
/// the matrix does not depend on `threads`.
SimulatedResiduals simulate_residuals(const ModelColumns& model, ResidualType type,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads = 0);
SimulatedResiduals simulate_residuals(const Dataset& ds, const Family& family, ResidualType type,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads = 0,
                                      const std::map<std::string, std::string>& param_map = {});

/// Sorts every replicate row in place (parallel over rows).
void sort_rows(SimulatedResiduals& sims, std::size_t threads = 0);

}  // namespace gamdiag
