#include "biopatch/attn.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <unordered_set>

#include "biopatch/error.hpp"

namespace biopatch {

namespace {

std::size_t cells(int n_layers, int prompt_len) {
  return static_cast<std::size_t>(n_layers) * static_cast<std::size_t>(prompt_len);
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void check_window(const AttentionDump& dump, LayerWindow w) {
  if (w.lo < 0 || w.lo > w.hi || w.hi >= dump.n_layers)
    throw Error(ErrorCode::kRange, "layer window " + std::to_string(w.lo) + ":" +
                                       std::to_string(w.hi) + " outside 0.." +
                                       std::to_string(dump.n_layers - 1));
}

double window_score(const AttentionDump& dump, const AttnInstance& inst, LayerWindow window) {
  double sum = 0.0;
  for (int l = window.lo; l <= window.hi; ++l) sum += span_score(dump, inst, l);
  return sum / static_cast<double>(window.hi - window.lo + 1);
}

double mean_attention(const AttentionDump& dump, LayerWindow window) {
  if (dump.instances.empty()) throw Error(ErrorCode::kInvalidArgument, "dump has no instances");
  check_window(dump, window);
  double sum = 0.0;
  for (const auto& inst : dump.instances) sum += window_score(dump, inst, window);
  return sum / static_cast<double>(dump.instances.size());
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::kInvalidArgument, "not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::span<const float> AttentionDump::row(const AttnInstance& inst, int layer) const {
  const std::size_t len = static_cast<std::size_t>(inst.prompt_len);
  return std::span<const float>(blob).subspan(inst.blob_offset + static_cast<std::size_t>(layer) * len,
                                              len);
}

const AttnInstance& AttentionDump::find(std::string_view sample_id) const {
  for (const auto& inst : instances)
    if (inst.sample_id == sample_id) return inst;
  throw Error(ErrorCode::kUnknownId, "sample " + std::string(sample_id) + " not in dump");
}

void validate(const AttentionDump& dump) {
  if (dump.format_version != kAttdumpVersion)
    throw Error(ErrorCode::kFormat,
                "unsupported attdump version " + std::to_string(dump.format_version));
  if (dump.n_layers < 1) throw Error(ErrorCode::kFormat, "n_layers must be >= 1");
  std::unordered_set<std::string_view> ids;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t expected = 0;
  for (const auto& inst : dump.instances) {
    const std::string where = "instance " + inst.sample_id;
    if (!ids.insert(inst.sample_id).second)
      throw Error(ErrorCode::kFormat, "duplicate " + where);
    if (inst.prompt_len < 1) throw Error(ErrorCode::kFormat, where + ": prompt_len < 1");
    if (inst.span_start < 0 || inst.span_start >= inst.span_end ||
        inst.span_end > inst.prompt_len)
      throw Error(ErrorCode::kFormat, where + ": name_span outside [0, prompt_len)");
    const std::size_t n = cells(dump.n_layers, inst.prompt_len);
    if (inst.blob_offset + n > dump.blob.size())
      throw Error(ErrorCode::kFormat, where + ": rows extend past the blob");
    ranges.emplace_back(inst.blob_offset, inst.blob_offset + n);
    expected += n;
  }
  if (expected != dump.blob.size())
    throw Error(ErrorCode::kFormat, "blob holds " + std::to_string(dump.blob.size()) +
                                        " floats, instances need " + std::to_string(expected));
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].first < ranges[i - 1].second)
      throw Error(ErrorCode::kFormat, "overlapping instance rows");
  for (const auto& inst : dump.instances)
    for (int l = 0; l < dump.n_layers; ++l) {
      double sum = 0.0;
      for (float v : dump.row(inst, l)) {
        if (!(v >= 0.0f))
          throw Error(ErrorCode::kFormat, "instance " + inst.sample_id + " layer " +
                                              std::to_string(l) + ": negative or NaN value");
        sum += v;
      }
      if (sum > 1.0 + kRowSumTolerance)
        throw Error(ErrorCode::kFormat, "instance " + inst.sample_id + " layer " +
                                            std::to_string(l) + ": row sums to " +
                                            std::to_string(sum));
    }
}

void append_instance(AttentionDump& dump, std::string sample_id, int span_start, int span_end,
                     std::span<const float> rows) {
  if (dump.n_layers < 1 || rows.empty() || rows.size() % static_cast<std::size_t>(dump.n_layers))
    throw Error(ErrorCode::kInvalidArgument, "rows are not n_layers x prompt_len");
  AttnInstance inst;
  inst.sample_id = std::move(sample_id);
  inst.prompt_len = static_cast<int>(rows.size() / static_cast<std::size_t>(dump.n_layers));
  inst.span_start = span_start;
  inst.span_end = span_end;
  inst.blob_offset = dump.blob.size();
  dump.blob.insert(dump.blob.end(), rows.begin(), rows.end());
  dump.instances.push_back(std::move(inst));
}

AttentionDump read_attdump(const std::filesystem::path& dir) {
  const json meta = read_json(dir / "meta.json");
  AttentionDump dump;
  try {
    if (!meta.contains("format_version"))
      throw Error(ErrorCode::kFormat, "meta.json lacks format_version");
    dump.format_version = meta.at("format_version").get<int>();
    dump.n_layers = meta.at("n_layers").get<int>();
    for (const auto& j : meta.at("instances")) {
      AttnInstance inst;
      inst.sample_id = j.at("sample_id").get<std::string>();
      inst.prompt_len = j.at("prompt_len").get<int>();
      const auto& span = j.at("name_span");
      if (!span.is_array() || span.size() != 2)
        throw Error(ErrorCode::kFormat, "name_span must be [start, end]");
      inst.span_start = span.at(0).get<int>();
      inst.span_end = span.at(1).get<int>();
      inst.blob_offset = j.at("blob_offset").get<std::size_t>();
      dump.instances.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, (dir / "meta.json").string() + ": " + e.what());
  }

  const std::string bytes = read_text(dir / "atts.f32");
  if (bytes.size() % 4)
    throw Error(ErrorCode::kFormat, "atts.f32 length is not a multiple of 4");
  dump.blob.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < dump.blob.size(); ++i) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) u = byteswap32(u);
    dump.blob[i] = std::bit_cast<float>(u);
  }
  validate(dump);
  return dump;
}

std::string attdump_meta(const AttentionDump& dump) {
  json instances = json::array();
  for (const auto& inst : dump.instances)
    instances.push_back({{"sample_id", inst.sample_id},
                         {"prompt_len", inst.prompt_len},
                         {"name_span", {inst.span_start, inst.span_end}},
                         {"blob_offset", inst.blob_offset}});
  return dump_pretty(json{{"format_version", dump.format_version},
                          {"n_layers", dump.n_layers},
                          {"instances", std::move(instances)}});
}

std::string attdump_blob(const AttentionDump& dump) {
  std::string bytes(dump.blob.size() * 4, '\0');
  for (std::size_t i = 0; i < dump.blob.size(); ++i) {
    auto u = std::bit_cast<std::uint32_t>(dump.blob[i]);
    if constexpr (std::endian::native == std::endian::big) u = byteswap32(u);
    std::memcpy(bytes.data() + 4 * i, &u, 4);
  }
  return bytes;
}

void write_attdump(const std::filesystem::path& dir, const AttentionDump& dump,
                   OutputTransaction& tx) {
  validate(dump);
  tx.write(dir / "meta.json", attdump_meta(dump));
  tx.write(dir / "atts.f32", attdump_blob(dump));
}

LayerWindow parse_window(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::kInvalidArgument, "window must look like LO:HI");
  LayerWindow w{parse_int(text.substr(0, colon)), parse_int(text.substr(colon + 1))};
  if (w.lo < 0 || w.lo > w.hi)
    throw Error(ErrorCode::kInvalidArgument, "window needs 0 <= LO <= HI");
  return w;
}

double span_score(const AttentionDump& dump, const AttnInstance& inst, int layer) {
  const auto r = dump.row(inst, layer);
  double s = 0.0;
  for (int i = inst.span_start; i < inst.span_end; ++i) s += r[static_cast<std::size_t>(i)];
  return s;
}

double entity_attention(const AttentionDump& dump, std::string_view sample_id,
                        LayerWindow window) {
  check_window(dump, window);
  return window_score(dump, dump.find(sample_id), window);
}

std::vector<LayerStat> layer_profile(const AttentionDump& dump) {
  if (dump.instances.empty()) throw Error(ErrorCode::kInvalidArgument, "dump has no instances");
  const double n = static_cast<double>(dump.instances.size());
  std::vector<LayerStat> out(static_cast<std::size_t>(dump.n_layers));
  for (int l = 0; l < dump.n_layers; ++l) {
    double sum = 0.0;
    for (const auto& inst : dump.instances) sum += span_score(dump, inst, l);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& inst : dump.instances) {
      const double d = span_score(dump, inst, l) - mean;
      ss += d * d;
    }
    out[static_cast<std::size_t>(l)] = {mean, std::sqrt(ss / n)};
  }
  return out;
}

LayerWindow select_window(std::span<const double> profile, double threshold_fraction) {
  if (profile.empty()) throw Error(ErrorCode::kInvalidArgument, "empty profile");
  const double cut = threshold_fraction * *std::max_element(profile.begin(), profile.end());
  LayerWindow best{-1, -1};
  int run_start = -1;
  for (int i = 0; i <= static_cast<int>(profile.size()); ++i) {
    const bool in = i < static_cast<int>(profile.size()) && profile[static_cast<std::size_t>(i)] >= cut;
    if (in && run_start < 0) run_start = i;
    if (!in && run_start >= 0) {
      if (best.lo < 0 || i - run_start >= best.hi - best.lo + 1) best = {run_start, i - 1};
      run_start = -1;
    }
  }
  return best;
}

double relative_attention_change(const AttentionDump& variant, const AttentionDump& baseline,
                                 LayerWindow window) {
  std::vector<std::string_view> a, b;
  for (const auto& i : variant.instances) a.push_back(i.sample_id);
  for (const auto& i : baseline.instances) b.push_back(i.sample_id);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(ErrorCode::kUnknownId, "dumps cover different sample ids");
  const double base = mean_attention(baseline, window);
  if (base == 0.0) throw Error(ErrorCode::kDomain, "baseline entity attention is zero");
  return 100.0 * (mean_attention(variant, window) - base) / base;
}

}  // namespace biopatch
