#pragma once

#include <filesystem>
#include <optional>

#include "winoc/ann.hpp"
#include "winoc/quantized.hpp"

namespace winoc {

struct ModelFile {
  AnnModel model;
  std::optional<QuantizedModel> quantized;
};

/// Versioned little-endian binary: magic, architecture header, horizon
/// encoding, row-major f64 parameter blocks, then an optional quantised
/// section (widths, int16 weights, sigmoid and threshold LUT blobs).
void save_model(const std::filesystem::path& path, const AnnModel& model, const QuantizedModel* quantized = nullptr);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace winoc
