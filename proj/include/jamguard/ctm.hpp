#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jamguard/binarize.hpp"

namespace jamguard::ctm {

using binarize::BoolImage;

struct CtmConfig {
    std::size_t n_clauses = 200;  ///< per class; even, alternating +/- polarity
    int T = 477;
    double s = 2.081;
    std::size_t patch_h = 10;
    std::size_t patch_w = 10;
    std::size_t max_included_literals = 22;
    int n_states = 128;  ///< per action side; TA states live in [1, 2*n_states]
    std::uint64_t seed = 42;
    std::size_t epochs = 10;
    bool boost_true_positive = false;

    /// Throws DomainError on any broken invariant.
    void validate() const;
};

inline constexpr std::size_t kClasses = 2;

/// Literal indexing for one image size and patch size. Features are the
/// patch pixels (row-major within the patch), then a thermometer code of the
/// patch row (bit i set iff row > i, H - ph bits), then the same for the
/// column (W - pw bits). Literals are the features followed by their
/// negations, so literal k + n_features == NOT literal k.
struct LiteralLayout {
    std::size_t image_h = 0, image_w = 0;
    std::size_t patch_h = 0, patch_w = 0;

    LiteralLayout() = default;
    LiteralLayout(std::size_t ih, std::size_t iw, std::size_t ph, std::size_t pw);

    std::size_t pos_rows() const noexcept { return image_h - patch_h + 1; }
    std::size_t pos_cols() const noexcept { return image_w - patch_w + 1; }
    std::size_t positions() const noexcept { return pos_rows() * pos_cols(); }
    std::size_t patch_bits() const noexcept { return patch_h * patch_w; }
    std::size_t row_bits() const noexcept { return image_h - patch_h; }
    std::size_t col_bits() const noexcept { return image_w - patch_w; }
    std::size_t features() const noexcept { return patch_bits() + row_bits() + col_bits(); }
    std::size_t literals() const noexcept { return 2 * features(); }

    bool operator==(const LiteralLayout&) const = default;
};

/// Literal vector of one patch placement.
struct PatchLiterals {
    std::size_t row = 0, col = 0;
    std::vector<std::uint8_t> bits;
};

struct Clause {
    std::vector<std::uint16_t> ta_state;
    int polarity = 1;
    int n_states = 128;

    bool includes(std::size_t k) const noexcept { return ta_state[k] > n_states; }
    std::size_t included_count() const noexcept;
    std::vector<std::uint32_t> included() const;

    bool operator==(const Clause&) const = default;
};

using ClauseBank = std::vector<Clause>;

struct CtmModel {
    CtmConfig config;
    LiteralLayout layout;
    std::array<ClauseBank, kClasses> banks;  ///< index 0 = pure, 1 = jammed

    /// Fresh model: every TA at n_states (excluded, next to the boundary).
    static CtmModel create(const CtmConfig& cfg, std::size_t image_h, std::size_t image_w);

    bool operator==(const CtmModel& o) const;
};

/// All placements, stride 1, row-major. Patch larger than image -> DomainError.
std::vector<PatchLiterals> extract_patches(const BoolImage& img, std::size_t patch_h, std::size_t patch_w);

/// True iff every included literal is set. A clause with no included
/// literals is true while training and false at inference.
bool clause_eval(const Clause& clause, const PatchLiterals& p, bool inference_mode);

/// OR of clause_eval over all placements.
bool clause_output_conv(const Clause& clause, std::span<const PatchLiterals> patches, bool inference_mode);

/// sum(polarity * output) over the bank, clamped to [-T, T].
int class_sum(const CtmModel& model, std::size_t class_id, std::span<const PatchLiterals> patches,
              bool inference_mode = true);

/// Per-literal bitmaps over placements: bit p of literal k is literal k at
/// placement p. Clause outputs become word-wise ANDs of included literals.
class LiteralMaps {
public:
    LiteralMaps(const LiteralLayout& layout, const BoolImage& img);

    const LiteralLayout& layout() const noexcept { return layout_; }
    std::size_t words() const noexcept { return words_; }
    std::span<const std::uint64_t> literal(std::size_t k) const noexcept {
        return {bits_.data() + k * words_, words_};
    }
    bool value(std::size_t k, std::size_t pos) const noexcept {
        return (bits_[k * words_ + pos / 64] >> (pos % 64)) & 1U;
    }
    std::span<const std::uint64_t> valid() const noexcept { return valid_; }

    /// Placements where the clause matches; an empty clause matches everywhere
    /// when training and nowhere at inference.
    void clause_matches(const Clause& clause, bool inference_mode, std::vector<std::uint64_t>& out) const;
    bool clause_fires(const Clause& clause, bool inference_mode) const;

private:
    LiteralLayout layout_;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint64_t> valid_;
};

/// Same as class_sum but over precomputed literal maps.
int class_sum(const CtmModel& model, std::size_t class_id, const LiteralMaps& maps, bool inference_mode = true);

Label predict(const CtmModel& model, const BoolImage& img);
std::array<int, kClasses> class_sums(const CtmModel& model, const BoolImage& img);

struct Sample {
    BoolImage image;
    Label label = Label::pure;
};

/// One pass of Type I / Type II feedback over the dataset in a shuffled
/// order. Randomness for clause (c, j) at step i of this epoch comes from
/// derive_seed(model.config.seed, {epoch, i, c, j}), so clauses can be
/// updated in parallel without changing the result.
void train_epoch(CtmModel& model, std::span<const Sample> data, std::uint64_t epoch);

/// Fresh model trained for config.epochs epochs.
CtmModel fit(const CtmConfig& cfg, std::span<const Sample> data);

/// Feedback probability used for clause selection: (T - v)/(2T) for the
/// target class and (T + v)/(2T) for the negative class, v clamped.
double feedback_probability(int T, int class_sum, bool target);

/// "JGTM", a version byte, the configuration as key=value text lines ended
/// by an empty line, then every TA state (minus one) per clause, class 0
/// first, as little-endian integers of `state_bytes` bytes.
std::vector<std::uint8_t> serialize(const CtmModel& m);
CtmModel deserialize(std::span<const std::uint8_t> bytes);
/// Returns the number of bytes written.
std::size_t save_model(const CtmModel& m, const std::filesystem::path& path);
CtmModel load_model(const std::filesystem::path& path);

inline constexpr std::uint8_t kModelVersion = 1;

/// Bytes allocated by the trainer's working set for one sample (literal maps
/// plus per-clause match buffers); reported alongside the model size.
std::size_t training_workspace_bytes(const CtmModel& m);

}  // namespace jamguard::ctm
