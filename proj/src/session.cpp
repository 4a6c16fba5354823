#include "gamdiag/session.hpp"

#include "gamdiag/error.hpp"

namespace gamdiag {

namespace {

std::atomic<std::uint64_t> g_next_session{1};

}  // namespace

BandKind parse_band(std::string_view text) {
    if (text == "none") return BandKind::None;
    if (text == "normal") return BandKind::Normal;
    if (text == "ks") return BandKind::Ks;
    throw ConfigError("unknown band '" + std::string(text) + "' (expected none|normal|ks)", "band");
}

std::string_view to_string(BandKind band) {
    switch (band) {
        case BandKind::None: return "none";
        case BandKind::Normal: return "normal";
        case BandKind::Ks: return "ks";
    }
    return "?";
}

Session::Session(Dataset dataset, SessionConfig config)
    : id_(g_next_session.fetch_add(1)),
      dataset_(std::move(dataset)),
      config_(std::move(config)),
      family_(make_family(config_.family)) {
    // fail fast on missing parameter columns
    ModelColumns check(dataset_, *family_, config_.param_map);
    (void)check;
    if (config_.type == ResidualType::Deviance && !family_->exponential_family())
        throw UnsupportedError("deviance residuals are not available for family '" +
                               config_.family + "'");
    if (config_.surface) config_.surface->validate();
}

const ResidualVector& Session::residuals() const {
    std::call_once(residuals_once_, [&] {
        residuals_ = transform(dataset_, *family_, config_.type, config_.param_map);
    });
    return residuals_;
}

const std::vector<double>& Session::sorted_residuals() const {
    std::call_once(sorted_once_, [&] {
        sorted_ = sorted_values(residuals());
        sort_count_.fetch_add(1);
    });
    return sorted_;
}

template <class T, class Build>
std::shared_ptr<const T> Session::coalesce(Cache<T>& cache, std::size_t l, std::uint64_t seed,
                                           Build build) const {
    const auto key = std::make_tuple(l, seed);
    std::promise<std::shared_ptr<const T>> promise;
    std::shared_future<std::shared_ptr<const T>> future;
    bool builder = false;
    {
        std::lock_guard lock(mutex_);
        auto it = cache.find(key);
        if (it == cache.end()) {
            future = promise.get_future().share();
            cache.emplace(key, future);
            builder = true;
        } else {
            future = it->second;
        }
    }
    if (builder) {
        try {
            auto value = build();
            promise.set_value(value);
            return value;
        } catch (...) {
            promise.set_exception(std::current_exception());
            std::lock_guard lock(mutex_);
            cache.erase(key);
            throw;
        }
    }
    if (future.wait_for(config_.busy_timeout) != std::future_status::ready)
        throw BusyError("simulation batch for l=" + std::to_string(l) + ", seed=" +
                        std::to_string(seed) + " is still running; retry later");
    return future.get();
}

std::shared_ptr<const SimulatedResiduals> Session::simulations(std::size_t l,
                                                               std::uint64_t seed) const {
    if (l == 0) throw ConfigError("replicate count l must be >= 1", "l");
    return coalesce(sims_, l, seed, [&] {
        sim_builds_.fetch_add(1);
        ModelColumns model(dataset_, *family_, config_.param_map);
        return std::make_shared<const SimulatedResiduals>(
            simulate_residuals(model, config_.type, l, seed, config_.threads));
    });
}

std::shared_ptr<const SimulatedResiduals> Session::sorted_simulations(std::size_t l,
                                                                      std::uint64_t seed) const {
    auto raw = simulations(l, seed);
    return coalesce(sorted_sims_, l, seed, [&] {
        auto copy = std::make_shared<SimulatedResiduals>(*raw);
        sort_rows(*copy, config_.threads);
        return std::shared_ptr<const SimulatedResiduals>(std::move(copy));
    });
}

std::shared_ptr<const QQPlot> Session::qq_plot(const QQRequest& req) const {
    const Reference ref = reference_of(config_.type);
    BandKind band = req.band ? *req.band
                             : (ref == Reference::Normal    ? BandKind::Normal
                                : ref == Reference::Uniform ? BandKind::Ks
                                                            : BandKind::None);
    if (band == BandKind::Normal && ref != Reference::Normal)
        throw ConfigError("the normal band applies to quantile residuals only", "band");
    if (band == BandKind::Ks && ref != Reference::Uniform)
        throw ConfigError("the KS band applies to uniform residuals only", "band");
    if (!(req.alpha > 0.0 && req.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]", "alpha");
    if (ref == Reference::SimulationOnly && req.l < 2)
        throw ConfigError(std::string(to_string(config_.type)) +
                              " residuals need a simulation reference: pass l >= 2",
                          "l");
    if (req.l == 1) throw ConfigError("a simulation envelope needs l >= 2", "l");

    const auto key = std::make_tuple(static_cast<int>(band), req.alpha, req.l, req.seed);
    {
        std::lock_guard lock(mutex_);
        if (auto it = plots_.find(key); it != plots_.end()) return it->second;
    }

    std::shared_ptr<const SimulatedResiduals> sims;
    if (req.l >= 2) sims = sorted_simulations(req.l, req.seed);
    auto curve = compute_qq_sorted(sorted_residuals(), ref, sims.get());
    std::vector<Band> bands;
    if (band == BandKind::Normal) bands.push_back(normal_band(curve.theoretical, req.alpha));
    if (band == BandKind::Ks) bands.push_back(ks_band(curve.theoretical, req.alpha));
    std::optional<Band> envelope;
    if (sims) envelope = sim_envelope_sorted(*sims, req.alpha, config_.threads);
    auto plot = std::make_shared<const QQPlot>(std::move(curve), std::move(bands),
                                               std::move(envelope), residuals().clip_count);
    std::lock_guard lock(mutex_);
    return plots_.emplace(key, std::move(plot)).first->second;
}

std::vector<double> Session::covariate(const std::string& name) const {
    return dataset_.column(name).to_double();
}

}  // namespace gamdiag
