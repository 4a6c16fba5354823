#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "gamdiag/dataset.hpp"
#include "gamdiag/density.hpp"
#include "gamdiag/distributions.hpp"
#include "gamdiag/effect.hpp"
#include "gamdiag/grid_checks.hpp"
#include "gamdiag/qq.hpp"
#include "gamdiag/residuals.hpp"

namespace gamdiag {

struct SessionConfig {
    std::string family = "gaussian";
    ResidualType type = ResidualType::Quantile;
    /// family parameter name -> dataset column
    std::map<std::string, std::string> param_map;
    std::size_t threads = 0;
    /// How long a request waits for another request's simulation batch
    /// before giving up with BusyError.
    std::chrono::milliseconds busy_timeout{30000};
    std::optional<EffectSurface> surface;
};

enum class BandKind { None, Normal, Ks };
BandKind parse_band(std::string_view text);
std::string_view to_string(BandKind band);

struct QQRequest {
    std::optional<BandKind> band;  ///< unset: the natural band of the residual type
    double alpha = 0.95;
    std::size_t l = 0;  ///< 0: no envelope
    std::uint64_t seed = 1;
};

/// Dataset + model config with lazily built, immutable cached artifacts.
/// Thread-safe; concurrent requests for the same simulation key share one
/// build.
class Session {
public:
    Session(Dataset dataset, SessionConfig config);

    std::uint64_t id() const noexcept { return id_; }
    const Dataset& dataset() const noexcept { return dataset_; }
    const SessionConfig& config() const noexcept { return config_; }
    const Family& family() const noexcept { return *family_; }

    const ResidualVector& residuals() const;
    /// Observed residuals sorted once per session.
    const std::vector<double>& sorted_residuals() const;
    /// Sorts performed by this session (1 after the first QQ request).
    std::uint64_t sort_count() const noexcept { return sort_count_.load(); }

    /// Unsorted replicate matrix for (type, l, seed).
    std::shared_ptr<const SimulatedResiduals> simulations(std::size_t l, std::uint64_t seed) const;
    /// Same replicates with every row sorted (order statistics).
    std::shared_ptr<const SimulatedResiduals> sorted_simulations(std::size_t l,
                                                                 std::uint64_t seed) const;
    /// Builds submitted for simulation keys (cache misses).
    std::uint64_t simulation_builds() const noexcept { return sim_builds_.load(); }

    std::shared_ptr<const QQPlot> qq_plot(const QQRequest& req) const;

    /// Covariate values as doubles (categorical columns give their codes).
    /// LookupError for unknown names.
    std::vector<double> covariate(const std::string& name) const;

private:
    template <class T>
    using Cache = std::map<std::tuple<std::size_t, std::uint64_t>, std::shared_future<std::shared_ptr<const T>>>;

    template <class T, class Build>
    std::shared_ptr<const T> coalesce(Cache<T>& cache, std::size_t l, std::uint64_t seed,
                                      Build build) const;

    std::uint64_t id_;
    Dataset dataset_;
    SessionConfig config_;
    std::unique_ptr<Family> family_;

    mutable std::once_flag residuals_once_;
    mutable ResidualVector residuals_;
    mutable std::once_flag sorted_once_;
    mutable std::vector<double> sorted_;
    mutable std::atomic<std::uint64_t> sort_count_{0};

    mutable std::mutex mutex_;
    mutable Cache<SimulatedResiduals> sims_;
    mutable Cache<SimulatedResiduals> sorted_sims_;
    mutable std::map<std::tuple<int, double, std::size_t, std::uint64_t>, std::shared_ptr<const QQPlot>>
        plots_;
    mutable std::atomic<std::uint64_t> sim_builds_{0};
};

}  // namespace gamdiag
