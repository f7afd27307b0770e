#include "winoc/model_io.hpp"

#include <array>
#include <fstream>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

namespace {

constexpr std::array<char, 8> kModelMagic = {'W', 'N', 'O', 'C', 'A', 'N', 'N', '1'};
constexpr std::uint32_t kModelVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ostream& os, const std::vector<T>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ModelError("unexpected end of model file");
  return v;
}

template <class T>
std::vector<T> get_vec(std::istream& is, std::uint64_t limit) {
  const auto n = get<std::uint64_t>(is);
  if (n > limit) throw ModelError("corrupt model file: block too large");
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw ModelError("unexpected end of model file");
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const AnnModel& model, const QuantizedModel* quantized) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError(fmt::format("cannot write model file {}", path.string()));
  const auto& arch = model.arch();
  os.write(kModelMagic.data(), kModelMagic.size());
  put(os, kModelVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(arch.inputs));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(arch.hidden_activation));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(arch.streams.size()));
  for (const auto& s : arch.streams) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.hidden));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.outputs));
  }
  put<double>(os, model.horizon.max_steps);
  const auto p = model.params();
  put_vec(os, std::vector<double>(p.begin(), p.end()));

  put<std::uint8_t>(os, quantized ? 1 : 0);
  if (quantized) {
    const auto& c = quantized->config();
    for (int v : {c.weight_bits, c.frac_bits, c.input_bits, c.accumulator_bits, c.mac_units,
                  c.pipeline_overhead_cycles}) {
      put<std::int32_t>(os, v);
    }
    put<double>(os, c.sigmoid_range);
    put<double>(os, c.clock_hz);
    put_vec(os, quantized->weights());
    put_vec(os, quantized->sigmoid_lut());
    put_vec(os, quantized->threshold_lut());
  }
  if (!os) throw ConfigError(fmt::format("failed writing model file {}", path.string()));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot open model file {}", path.string()));
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kModelMagic) throw ModelError(fmt::format("{} is not a model file", path.string()));
  const auto version = get<std::uint32_t>(is);
  if (version != kModelVersion) throw ModelError(fmt::format("unsupported model version {}", version));

  AnnArchitecture arch;
  arch.inputs = static_cast<int>(get<std::uint32_t>(is));
  const auto act = get<std::uint8_t>(is);
  if (act > static_cast<std::uint8_t>(Activation::Identity)) throw ModelError("unknown activation in model file");
  arch.hidden_activation = static_cast<Activation>(act);
  const auto n_streams = get<std::uint32_t>(is);
  if (n_streams == 0 || n_streams > 64) throw ModelError("corrupt model file: stream count");
  for (std::uint32_t s = 0; s < n_streams; ++s) {
    StreamShape sh;
    sh.hidden = static_cast<int>(get<std::uint32_t>(is));
    sh.outputs = static_cast<int>(get<std::uint32_t>(is));
    arch.streams.push_back(sh);
  }
  ModelFile out{AnnModel(arch), std::nullopt};
  out.model.horizon.max_steps = get<double>(is);
  const auto params = get_vec<double>(is, out.model.params().size());
  if (params.size() != out.model.params().size()) throw ModelError("model parameter count mismatch");
  std::copy(params.begin(), params.end(), out.model.params().begin());

  if (get<std::uint8_t>(is) != 0) {
    QuantConfig c;
    c.weight_bits = get<std::int32_t>(is);
    c.frac_bits = get<std::int32_t>(is);
    c.input_bits = get<std::int32_t>(is);
    c.accumulator_bits = get<std::int32_t>(is);
    c.mac_units = get<std::int32_t>(is);
    c.pipeline_overhead_cycles = get<std::int32_t>(is);
    c.sigmoid_range = get<double>(is);
    c.clock_hz = get<double>(is);
    auto w = get_vec<std::int16_t>(is, params.size());
    auto sig = get_vec<std::uint8_t>(is, 1 << 20);
    auto thr = get_vec<std::uint8_t>(is, 256);
    out.quantized = QuantizedModel::from_parts(arch, out.model.horizon, c, std::move(w), std::move(sig), std::move(thr));
  }
  return out;
}

}  // namespace winoc
