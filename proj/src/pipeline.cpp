#include "jamguard/pipeline.hpp"

#include <map>
#include <memory>

#include "jamguard/parallel.hpp"

namespace jamguard::pipeline {

Preprocessed preprocess(const sync::Synchronizer& sync, const IQBuffer& iq, const PreprocessConfig& cfg) {
    const auto s = sync.run(iq);
    const auto spec = spectro::capture_image(s.corrected, s.t_off, cfg.spectro);
    return Preprocessed{binarize::booleanize(spec, cfg.method), s.t_off, s.cfo.freq_hz};
}

std::vector<Preprocessed> preprocess_all(std::span<const IQBuffer> captures, const PreprocessConfig& cfg) {
    std::map<std::pair<std::size_t, double>, std::unique_ptr<sync::Synchronizer>> syncs;
    for (const auto& c : captures) {
        auto& s = syncs[{c.size(), c.sample_rate}];
        if (!s) s = std::make_unique<sync::Synchronizer>(cfg.sync, c.sample_rate, c.size());
    }
    std::vector<Preprocessed> out(captures.size());
    parallel_for(captures.size(), [&](std::size_t i) {
        const auto& c = captures[i];
        out[i] = preprocess(*syncs.at({c.size(), c.sample_rate}), c, cfg);
    });
    return out;
}

}  // namespace jamguard::pipeline
