#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biopatch/io.hpp"

namespace biopatch {

inline constexpr int kAttdumpVersion = 1;
inline constexpr double kRowSumTolerance = 1e-4;

struct AttnInstance {
  std::string sample_id;
  int prompt_len = 0;
  /// Half-open token range of the person name.
  int span_start = 0;
  int span_end = 0;
  /// Offset into the blob, in floats.
  std::size_t blob_offset = 0;
};

/// In-memory `.attdump`: meta.json plus atts.f32, a flat little-endian float32
/// array holding n_layers x prompt_len values per instance.
struct AttentionDump {
  int format_version = kAttdumpVersion;
  int n_layers = 0;
  std::vector<AttnInstance> instances;
  std::vector<float> blob;

  std::span<const float> row(const AttnInstance& inst, int layer) const;
  /// kUnknownId if absent.
  const AttnInstance& find(std::string_view sample_id) const;
};

/// kFormat on any layout or value violation.
void validate(const AttentionDump& dump);

/// Appends an instance at the end of the blob. `rows` is n_layers x
/// prompt_len, layer-major.
void append_instance(AttentionDump& dump, std::string sample_id, int span_start, int span_end,
                     std::span<const float> rows);

AttentionDump read_attdump(const std::filesystem::path& dir);
std::string attdump_meta(const AttentionDump& dump);
std::string attdump_blob(const AttentionDump& dump);
void write_attdump(const std::filesystem::path& dir, const AttentionDump& dump,
                   OutputTransaction& tx);

/// Inclusive, 0-based.
struct LayerWindow {
  int lo = 12;
  int hi = 24;

  bool operator==(const LayerWindow&) const = default;
};

/// "12:24"
LayerWindow parse_window(std::string_view text);

/// Attention mass on the name span at one layer.
double span_score(const AttentionDump& dump, const AttnInstance& inst, int layer);

/// Mean over the window of the per-layer span scores.
double entity_attention(const AttentionDump& dump, std::string_view sample_id,
                        LayerWindow window);

struct LayerStat {
  double mean = 0.0;
  double std = 0.0;
};

/// Per-layer mean and population standard deviation of span scores over all
/// instances.
std::vector<LayerStat> layer_profile(const AttentionDump& dump);

/// Longest contiguous run of layers whose mean is at least
/// threshold_fraction * max; later runs win ties.
LayerWindow select_window(std::span<const double> profile, double threshold_fraction);

/// Percent change of the mean entity attention, over identical sample sets.
double relative_attention_change(const AttentionDump& variant, const AttentionDump& baseline,
                                 LayerWindow window);

}  // namespace biopatch
