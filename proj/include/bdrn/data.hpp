#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bdrn::data {

/// Timestamped power readings; timestamps strictly increasing epoch seconds.
struct RawSeries {
    std::vector<int64_t> timestamps;
    std::vector<double> watts;
    int64_t clamped_negative = 0;  // raw readings < 0 clamped to 0 during parsing

    size_t size() const { return timestamps.size(); }
};

/// Mains/appliance pair resampled onto one grid. `breaks` holds indices i
/// where a gap longer than gap_limit was excised between samples i-1 and i;
/// windows must not span them. gap_mask marks forward-filled samples.
struct AlignedPair {
    int64_t period = 0;
    int64_t start = 0;
    std::vector<int64_t> timestamps;
    std::vector<double> aggregate;
    std::vector<double> appliance;
    std::vector<uint8_t> gap_mask;
    std::vector<size_t> breaks;

    size_t size() const { return aggregate.size(); }
};

struct NormStats {
    double mean = 0.0;
    double std = 1.0;
};

struct WindowedDataset {
    int window_length = 0;
    size_t rows = 0;
    std::vector<float> inputs;   // [rows, window_length] row-major, normalized
    std::vector<float> targets;  // [rows], normalized appliance midpoint
    std::vector<std::pair<int, int64_t>> provenance;  // (source id, start index)
    NormStats stats_in, stats_target;

    const float* row(size_t r) const { return inputs.data() + r * window_length; }
};

enum class SignatureKind { RectangularPulse, TwoLevelCycle, Ramp };

struct ApplianceProfile {
    std::string name;
    SignatureKind kind = SignatureKind::RectangularPulse;
    double amplitude = 0.0;       // watts
    double amplitude_low = 0.0;   // two-level cycle only
    int64_t duration = 1;         // activation length, samples
    int64_t duty = 1;             // two-level segment length, samples
    double rate_per_1000 = 1.0;   // expected activations per 1000 samples
    uint64_t seed = 0;
};

struct SynthScene {
    RawSeries aggregate;
    std::vector<std::pair<std::string, RawSeries>> appliances;
    std::vector<double> noise;     // recorded per sample
    std::vector<uint8_t> clamped;  // aggregate floored at 0 here
};

RawSeries parse_channel_file(std::istream& in);
void write_channel_file(const RawSeries& s, std::ostream& out);

std::map<int, std::string> parse_labels(std::istream& in);

AlignedPair align_series(const RawSeries& mains, const RawSeries& appliance, int64_t period,
                         int64_t gap_limit);

double normalize(double x, const NormStats& s);
double denormalize(double z, const NormStats& s);
std::vector<double> normalize(const std::vector<double>& xs, const NormStats& s);
std::vector<double> denormalize(const std::vector<double>& zs, const NormStats& s);

enum class WindowPad { None, ZeroHalfWindow };

WindowedDataset make_windows(const AlignedPair& pair, const NormStats& stats_in,
                             const NormStats& stats_target, int window_length, int stride,
                             WindowPad pad, int source_id = 0);

std::pair<WindowedDataset, WindowedDataset> split_dataset(const WindowedDataset& ds,
                                                          double fraction);

SynthScene synth_generate(const std::vector<ApplianceProfile>& profiles, int64_t length,
                          double noise_sigma, uint64_t seed, int64_t period = 6,
                          int64_t start_epoch = 0);

/// Per-appliance normalization defaults (mean/std watts) by canonical name.
std::optional<NormStats> appliance_default_stats(const std::string& name);

/// Mean/std of the raw window inputs, for aggregate-side normalization.
NormStats compute_stats(const std::vector<double>& xs);

}  // namespace bdrn::data
