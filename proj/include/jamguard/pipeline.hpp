#pragma once

#include <vector>

#include "jamguard/binarize.hpp"
#include "jamguard/signal.hpp"
#include "jamguard/spectro.hpp"
#include "jamguard/sync.hpp"

namespace jamguard::pipeline {

struct PreprocessConfig {
    sync::SyncConfig sync;
    spectro::SpectroConfig spectro;
    binarize::BinarizeMethod method;
};

struct Preprocessed {
    binarize::BoolImage image;
    std::size_t t_off = 0;
    double cfo_hz = 0.0;
};

/// Synchronize, take the spectrogram image from the aligned start, binarize.
Preprocessed preprocess(const sync::Synchronizer& sync, const IQBuffer& iq, const PreprocessConfig& cfg);

/// preprocess over many captures of equal length, in parallel. Captures of
/// another length get their own synchronizer.
std::vector<Preprocessed> preprocess_all(std::span<const IQBuffer> captures, const PreprocessConfig& cfg);

}  // namespace jamguard::pipeline
